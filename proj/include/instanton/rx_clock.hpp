#pragma once

// Receiver time base: zero time (ZT), 100 ms TIC epochs, a drifting RTC
// counter, and the receiver clock offset (RCO) that maps receiver time to
// GPS time.

#include <cstdint>

namespace instanton {

inline constexpr double kTicPeriodS = 0.1;
inline constexpr double kMeanPropagationDelayS = 0.075;
inline constexpr double kSecondsPerWeek = 604800.0;
inline constexpr double kCodeChipS = 1.0 / 1.023e6;
inline constexpr double kDefaultRtcHz = 32000.0;

struct GpsTime {
    int week = 0;
    double second = 0.0;  // [0, 604800) once normalized

    static GpsTime normalized(int week, double second);
    GpsTime plus(double seconds) const { return normalized(week, second + seconds); }
    // Signed difference in seconds.
    double minus(const GpsTime& other) const {
        return (week - other.week) * kSecondsPerWeek + (second - other.second);
    }
};

struct Rco {
    int week = 0;
    double second = 0.0;
    friend bool operator==(const Rco&, const Rco&) = default;
};

struct ReceiverClockState {
    int zt_week = 0;
    double zt_second = 0.0;
    std::int64_t tic_count = 0;
    std::int64_t rtc_count = 0;
    double rtc_nominal_hz = kDefaultRtcHz;
    double rtc_ppm_error = 0.0;
    // Offset of the receiver clock from GPS time at ZT, and its rate error.
    double clock_bias_s = 0.0;
    double clock_drift_ppm = 0.0;

    // Receiver-clock seconds since ZT and the unfloored RTC count.
    double rx_elapsed_s = 0.0;
    double rtc_phase = 0.0;

    GpsTime receiver_time() const { return GpsTime::normalized(zt_week, zt_second + rx_elapsed_s); }
    GpsTime zero_time() const { return {zt_week, zt_second}; }
};

// Advances the clock by dt seconds of true (GPS) time.
ReceiverClockState advance(const ReceiverClockState& state, double dt_true_s);

// RCO.week = ZT.week - WeekNumber
// RCO.second = ZT.second + SyncTIC * 0.1 - (TOW * 6 + 0.075)
//
// sync_tic may carry a fraction when the subframe end falls between TICs.
Rco compute_rco(const GpsTime& zt, int week_number, double sync_tic, int tow);

GpsTime to_gps_time(const GpsTime& receiver_time, const Rco& rco);
GpsTime to_receiver_time(const GpsTime& gps_time, const Rco& rco);

// Signal time elapsed inside the current 20 ms bit at a TIC, quantized to
// `quantum_s` (one code chip by default; 0 disables quantization).
double code_time_at_tic(double bit_phase_fraction, double quantum_s = kCodeChipS);

}  // namespace instanton
