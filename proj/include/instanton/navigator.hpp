#pragma once

// Turns frame-locked channel observations into pseudoranges and position
// fixes.
//
// The transmit time of a channel is its bit count since the start of the
// navigation week plus the code time measured inside the current bit. The
// receive time is receiver time minus RCO. The RCO comes from the anchor
// channel through compute_rco(), which assumes a 0.075 s transit and whole
// TICs. The first fix after a (re)start therefore evaluates every satellite
// at receive time - 0.075 s. Later fixes use per-satellite transit times
// predicted from the previous solution. After every fix the solved clock
// bias is folded back into the RCO.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "instanton/constellation.hpp"
#include "instanton/pvt.hpp"
#include "instanton/rx_clock.hpp"

namespace instanton::receiver {

struct ChannelObservation {
    int sat_id = 0;
    std::int64_t bit_count = 0;  // bits since the start of the navigation week
    double code_time_s = 0.0;    // signal time inside the current bit
    double noise_m = 0.0;        // additive measurement error (simulation input)
};

struct Fix {
    pvt::PvtSolution solution;
    bool first_after_start = false;
    std::vector<int> sat_ids;
    GpsTime receive_time;  // GPS time of reception after RCO refinement
};

class Navigator {
public:
    Navigator(std::vector<EphemerisRecord> ephemerides, int week_number);

    // Seeds the initial guess; a first-ever fix starts from Earth's centre.
    void set_last_known_position(const Vec3& position) { last_position_ = position; }
    const std::optional<Vec3>& last_known_position() const { return last_position_; }

    // Forget RCO and transit history (power cycle), keep ephemerides and the
    // last known position.
    void restart();

    // RCO from the anchor channel: SyncTIC is the first TIC at or after the
    // end of its current subframe, which together with the TOW of that
    // subframe gives RCO by compute_rco(). The TIC rounding leaves up to
    // 100 ms of RCO error until the first fix folds its bias back in.
    Rco update_rco_from_anchor(const GpsTime& zero_time, const GpsTime& receiver_time,
                               const ChannelObservation& anchor);
    const std::optional<Rco>& rco() const { return rco_; }

    // Transit time of `sat_id` for a signal received at t_receive_sow, seen
    // from the last known position.
    double predicted_transit(int sat_id, double t_receive_sow) const;

    // Bit count whose transmit time (count * 20 ms + code time) is nearest to
    // the predicted transmit time.
    static std::int64_t resolve_bit_count(double predicted_transmit_sow, double code_time_s);

    // Throws if no RCO is available or fewer than four channels are given.
    Fix fix(const GpsTime& receiver_time, std::span<const ChannelObservation> channels,
            const pvt::SolveOptions& options = {});

    bool has_fix_since_start() const { return has_fix_; }
    const EphemerisRecord& ephemeris(int sat_id) const;
    int week_number() const { return week_number_; }

private:
    pvt::PvtSolution solve_pass(const GpsTime& t_receive, std::span<const ChannelObservation> channels,
                                bool flat_delay, const pvt::SolveOptions& options) const;

    std::map<int, EphemerisRecord> ephemerides_;
    int week_number_;
    std::optional<Vec3> last_position_;
    std::optional<Rco> rco_;
    bool has_fix_ = false;
};

}  // namespace instanton::receiver
