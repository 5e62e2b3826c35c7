#include "instanton/navigator.hpp"

#include <cmath>

#include "instanton/errors.hpp"
#include "instanton/nav_message.hpp"

namespace instanton::receiver {

Navigator::Navigator(std::vector<EphemerisRecord> ephemerides, int week_number) : week_number_(week_number) {
    for (auto& e : ephemerides) {
        e.validate();
        ephemerides_[e.sat_id] = e;
    }
}

void Navigator::restart() {
    rco_.reset();
    has_fix_ = false;
}

const EphemerisRecord& Navigator::ephemeris(int sat_id) const {
    const auto it = ephemerides_.find(sat_id);
    if (it == ephemerides_.end()) throw ValidationError("no ephemeris for PRN " + std::to_string(sat_id));
    return it->second;
}

Rco Navigator::update_rco_from_anchor(const GpsTime& zero_time, const GpsTime& receiver_time,
                                      const ChannelObservation& anchor) {
    const double tic = receiver_time.minus(zero_time) / kTicPeriodS;
    const auto tow = static_cast<int>(anchor.bit_count / nav::kBitsPerSubframe) + 1;
    const double to_subframe_end =
        static_cast<double>(static_cast<std::int64_t>(tow) * nav::kBitsPerSubframe - anchor.bit_count) *
            nav::kBitPeriodS -
        anchor.code_time_s;
    const double sync_tic = std::ceil(tic + to_subframe_end / kTicPeriodS - 1e-9);
    rco_ = compute_rco(zero_time, week_number_, sync_tic, tow);
    return *rco_;
}

double Navigator::predicted_transit(int sat_id, double t_receive_sow) const {
    const Vec3 from = last_position_.value_or(Vec3::Zero());
    return transit_time(ephemeris(sat_id), from, t_receive_sow);
}

std::int64_t Navigator::resolve_bit_count(double predicted_transmit_sow, double code_time_s) {
    return static_cast<std::int64_t>(std::llround((predicted_transmit_sow - code_time_s) / nav::kBitPeriodS));
}

pvt::PvtSolution Navigator::solve_pass(const GpsTime& t_receive, std::span<const ChannelObservation> channels,
                                       bool flat_delay, const pvt::SolveOptions& options) const {
    // Receive and transmit times are taken relative to a whole second.
    const double ref = std::floor(t_receive.second);
    const double rx_rel = t_receive.second - ref;
    const std::int64_t week_offset_s = static_cast<std::int64_t>(t_receive.week - week_number_) * 604800;
    const std::int64_t ref_bits = (static_cast<std::int64_t>(ref) + week_offset_s) * nav::kBitsPerSecond;
    const double t_rx_sow = t_receive.second + static_cast<double>(week_offset_s);

    std::vector<double> rho;
    std::vector<Vec3> sats;
    for (const auto& ch : channels) {
        const double tx_rel = static_cast<double>(ch.bit_count - ref_bits) * nav::kBitPeriodS + ch.code_time_s;
        const double dt = rx_rel - tx_rel;
        if (dt < 0.0) throw CausalityError("PRN " + std::to_string(ch.sat_id) + " transmit time after receive time");
        rho.push_back(pvt::pseudorange_from_delay(dt) + ch.noise_m);
        const double transit = flat_delay ? kMeanPropagationDelayS : predicted_transit(ch.sat_id, t_rx_sow);
        sats.push_back(propagate(ephemeris(ch.sat_id), t_rx_sow - transit).position);
    }
    const pvt::PvtState guess{last_position_.value_or(Vec3::Zero()), 0.0};
    return pvt::solve(rho, sats, guess, options);
}

Fix Navigator::fix(const GpsTime& receiver_time, std::span<const ChannelObservation> channels,
                   const pvt::SolveOptions& options) {
    if (!rco_) throw ProtocolError("no receiver clock offset; frame lock required before a fix");
    if (channels.size() < 4) throw InsufficientSatellitesError("at least 4 frame-locked channels are required");

    Fix out;
    for (const auto& ch : channels) out.sat_ids.push_back(ch.sat_id);
    out.first_after_start = !has_fix_;

    auto absorb = [&](const pvt::PvtSolution& s) {
        rco_->second += s.clock_bias_m / kSpeedOfLight;
        last_position_ = s.position;
    };

    pvt::PvtSolution sol = solve_pass(to_gps_time(receiver_time, *rco_), channels, !has_fix_, options);
    if (sol.converged) {
        absorb(sol);
        if (has_fix_) {
            // Second pass with transit times and RCO from the pass just made.
            const auto refined = solve_pass(to_gps_time(receiver_time, *rco_), channels, false, options);
            if (refined.converged) {
                absorb(refined);
                sol.position = refined.position;
                sol.clock_bias_m = refined.clock_bias_m;
                sol.residual_norm_m = refined.residual_norm_m;
                sol.iterations += refined.iterations;
            }
        }
        has_fix_ = true;
    }
    out.solution = sol;
    out.receive_time = to_gps_time(receiver_time, *rco_);
    return out;
}

}  // namespace instanton::receiver
