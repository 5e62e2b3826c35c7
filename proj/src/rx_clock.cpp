#include "instanton/rx_clock.hpp"

#include <algorithm>
#include <cmath>

#include "instanton/errors.hpp"
#include "instanton/nav_message.hpp"

namespace instanton {

GpsTime GpsTime::normalized(int week, double second) {
    const double carry = std::floor(second / kSecondsPerWeek);
    second -= carry * kSecondsPerWeek;
    if (second >= kSecondsPerWeek) {  // rounding at the upper edge
        second -= kSecondsPerWeek;
        week += 1;
    }
    return {week + static_cast<int>(carry), second};
}

ReceiverClockState advance(const ReceiverClockState& state, double dt_true_s) {
    if (dt_true_s < 0.0) throw ValidationError("clock cannot advance by a negative interval");
    ReceiverClockState s = state;
    if (dt_true_s == 0.0) return s;
    s.rx_elapsed_s += dt_true_s * (1.0 + s.clock_drift_ppm * 1e-6);
    s.rtc_phase += s.rtc_nominal_hz * (1.0 + s.rtc_ppm_error * 1e-6) * dt_true_s;
    s.tic_count = std::max(s.tic_count, static_cast<std::int64_t>(std::floor(s.rx_elapsed_s / kTicPeriodS + 1e-9)));
    s.rtc_count = std::max(s.rtc_count, static_cast<std::int64_t>(std::floor(s.rtc_phase + 1e-6)));
    return s;
}

Rco compute_rco(const GpsTime& zt, int week_number, double sync_tic, int tow) {
    Rco r;
    r.week = zt.week - week_number;
    r.second = zt.second + sync_tic * kTicPeriodS - (tow * nav::kSubframePeriodS + kMeanPropagationDelayS);
    return r;
}

GpsTime to_gps_time(const GpsTime& receiver_time, const Rco& rco) {
    return GpsTime::normalized(receiver_time.week - rco.week, receiver_time.second - rco.second);
}

GpsTime to_receiver_time(const GpsTime& gps_time, const Rco& rco) {
    return GpsTime::normalized(gps_time.week + rco.week, gps_time.second + rco.second);
}

double code_time_at_tic(double bit_phase_fraction, double quantum_s) {
    if (!(bit_phase_fraction >= 0.0 && bit_phase_fraction < 1.0))
        throw ValidationError("bit phase fraction must be in [0, 1)");
    const double t = bit_phase_fraction * nav::kBitPeriodS;
    if (quantum_s <= 0.0) return t;
    return std::round(t / quantum_s) * quantum_s;
}

}  // namespace instanton
