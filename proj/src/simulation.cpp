#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "instanton/errors.hpp"
#include "instanton/navigator.hpp"
#include "instanton/scenario.hpp"

namespace instanton::sim {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double unit_open(std::uint64_t& state) {
    return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double keyed_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = seed;
    s = splitmix64(s) ^ a;
    s = splitmix64(s) ^ b;
    splitmix64(s);
    const double u1 = unit_open(s);
    const double u2 = unit_open(s);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

SignalGenerator::SignalGenerator(const ScenarioConfig& config, std::vector<EphemerisRecord> satellites)
    : sats_(std::move(satellites)),
      start_sow_(config.start_sow),
      week_(config.start_week),
      user0_(config.user_position),
      user_vel_(config.user_velocity) {
    for (std::size_t i = 0; i < sats_.size(); ++i) {
        if (!index_.emplace(sats_[i].sat_id, i).second)
            throw ScenarioError("duplicate PRN " + std::to_string(sats_[i].sat_id));
    }
}

const EphemerisRecord& SignalGenerator::satellite(int sat_id) const {
    const auto it = index_.find(sat_id);
    if (it == index_.end()) throw ScenarioError("unknown PRN " + std::to_string(sat_id));
    return sats_[it->second];
}

Vec3 SignalGenerator::user_position(double t) const { return user0_ + user_vel_ * t; }

double SignalGenerator::transit(int sat_id, double t) const {
    return transit_time(satellite(sat_id), user_position(t), sow(t));
}

double SignalGenerator::transmit_rel(int sat_id, double t) const { return t - transit(sat_id, t); }

std::int64_t SignalGenerator::bit_count(int sat_id, double t) const {
    const auto base = static_cast<std::int64_t>(start_sow_) * nav::kBitsPerSecond;
    return base + static_cast<std::int64_t>(std::floor(transmit_rel(sat_id, t) / nav::kBitPeriodS));
}

double SignalGenerator::bit_phase_s(int sat_id, double t) const {
    const double tx = transmit_rel(sat_id, t);
    const double phase = tx - std::floor(tx / nav::kBitPeriodS) * nav::kBitPeriodS;
    return std::clamp(phase, 0.0, std::nextafter(nav::kBitPeriodS, 0.0));
}

double SignalGenerator::arrival_of_bit(int sat_id, std::int64_t n) const {
    const auto base = static_cast<std::int64_t>(start_sow_) * nav::kBitsPerSecond;
    const double tx = static_cast<double>(n - base) * nav::kBitPeriodS;
    double t = tx + kMeanPropagationDelayS;
    for (int i = 0; i < 6; ++i) t = tx + transit(sat_id, t);
    return t;
}

double SignalGenerator::carrier_doppler_hz(int sat_id, double t) const {
    const auto& eph = satellite(sat_id);
    const auto state = propagate(eph, sow(t) - transit(sat_id, t));
    return carrier_doppler(state, user_position(t), user_vel_);
}

double SignalGenerator::elevation_deg(int sat_id, double t) const {
    const auto state = propagate(satellite(sat_id), sow(t) - transit(sat_id, t));
    return rad2deg(elevation_rad(state.position, user_position(t)));
}

nav::Subframe SignalGenerator::subframe(int sat_id, std::int64_t subframe_count) const {
    if (subframe_count < 0) throw ValidationError("negative subframe count");
    const int sfid = static_cast<int>(subframe_count % nav::kSubframesPerFrame) + 1;
    nav::Payload payload{};
    if (sfid <= 3) {
        payload = pack_ephemeris(satellite(sat_id))[static_cast<std::size_t>(sfid - 1)];
    } else {
        std::uint64_t s = (static_cast<std::uint64_t>(sat_id) << 32) ^ static_cast<std::uint64_t>(subframe_count);
        for (auto& w : payload) w = static_cast<std::uint32_t>(splitmix64(s) & 0xFFFFFFu);
        payload[7] &= ~3u;
    }
    return nav::build_subframe(sat_id, sfid, static_cast<int>(subframe_count + 1), week_ % (nav::kMaxWeek + 1),
                               payload);
}

nav::Bitstream SignalGenerator::bits(int sat_id, std::int64_t first_bit, std::size_t count) const {
    if (first_bit < 0) throw ValidationError("negative bit count");
    nav::Bitstream out;
    out.reserve(count);
    std::int64_t sf = first_bit / nav::kBitsPerSubframe;
    auto skip = static_cast<std::size_t>(first_bit % nav::kBitsPerSubframe);
    while (out.size() < count) {
        const auto b = subframe(sat_id, sf++).bits();
        const std::size_t take = std::min(b.size() - skip, count - out.size());
        out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(skip),
                   b.begin() + static_cast<std::ptrdiff_t>(skip + take));
        skip = 0;
    }
    return out;
}

double power_savings_ratio(double off_s, double on_s) {
    if (!(on_s > 0.0)) throw ValidationError("on time must be positive");
    if (off_s < 0.0) throw ValidationError("off time must be non-negative");
    return on_s / (on_s + off_s);
}

std::vector<Sample> ArmReport::fixes() const {
    std::vector<Sample> out;
    std::copy_if(series.begin(), series.end(), std::back_inserter(out), [](const Sample& s) { return s.fix_valid; });
    return out;
}

const ArmReport* RunReport::arm(const std::string& name) const {
    for (const auto& a : arms)
        if (a.arm == name) return &a;
    return nullptr;
}

namespace {

using receiver::ChannelObservation;
using receiver::Navigator;

struct PreambleLock {
    double delay_s = 0.0;  // after bit lock
};

class Runner {
public:
    explicit Runner(const ScenarioConfig& cfg)
        : cfg_(cfg),
          gen_(cfg, cfg.satellites.empty()
                        ? default_constellation(cfg.user_position, cfg.start_sow, cfg.default_satellite_count)
                        : cfg.satellites),
          r_off_(cfg.session_s),
          r_w_(cfg.session_s + cfg.off_duration_s) {
        select_satellites();
        check_geometry();
        clock1_.zt_week = cfg.start_week;
        clock1_.zt_second = cfg.start_sow + cfg.rx_clock_bias_s;
        clock1_.rtc_nominal_hz = cfg.rtc_nominal_hz;
        clock1_.rtc_ppm_error = cfg.rtc_ppm;
        clock1_.clock_drift_ppm = cfg.rx_drift_ppm;
    }

    RunReport run(const std::string& snapshot_path) {
        RunReport report;
        report.off_duration_s = cfg_.off_duration_s;
        report.drift_budget_ms = frame_sync::drift_budget(std::abs(cfg_.rtc_ppm), cfg_.bit_margin_ms);

        Navigator nav(decode_ephemerides(), cfg_.start_week % (nav::kMaxWeek + 1));
        run_first_session(nav);
        snapshot_ = persist(nav, snapshot_path);
        report.snapshot = snapshot_;

        clock2_ = advance(clock1_, r_w_);
        clock2_.zt_week = cfg_.start_week;
        clock2_.zt_second = cfg_.start_sow + r_w_ + cfg_.wake_clock_bias_s;
        clock2_.rx_elapsed_s = 0.0;
        clock2_.tic_count = 0;
        nav.restart();

        const double t_bl = r_w_ + cfg_.locks.total();
        const double t_edge = gen_.arrival_of_bit(anchor_, gen_.bit_count(anchor_, t_bl));
        const double elapsed_s =
            static_cast<double>(clock_at(t_edge).rtc_count - snapshot_.rtc_count) / cfg_.rtc_nominal_hz;
        report.predicted_code_phase_chips =
            frame_sync::predicted_code_phase(snapshot_, gen_.carrier_doppler_hz(anchor_, t_edge), elapsed_s);

        if (cfg_.arms != ArmSelection::hotstart) report.arms.push_back(run_arm(nav, true, report.drift_budget_ms));
        if (cfg_.arms != ArmSelection::estimator) report.arms.push_back(run_arm(nav, false, report.drift_budget_ms));

        const ArmReport& lead = report.arms.front();
        const auto fixes = lead.fixes();
        if (fixes.size() >= 2)
            report.power_ratio = power_savings_ratio(cfg_.off_duration_s, fixes[1].t_s);
        else if (!fixes.empty())
            report.power_ratio = power_savings_ratio(cfg_.off_duration_s, fixes[0].t_s);
        return report;
    }

private:
    void select_satellites() {
        const double window_end = r_w_ + cfg_.wake_window_s;
        for (const auto& s : gen_.satellites()) {
            s.validate();
            bool visible = true;
            for (double t : {0.0, r_off_, r_w_, window_end})
                visible = visible && gen_.elevation_deg(s.sat_id, t) >= cfg_.elevation_mask_deg;
            if (visible) visible_.push_back(s.sat_id);
            if (!s.valid_at(gen_.sow(window_end)))
                throw ScenarioError("ephemeris of PRN " + std::to_string(s.sat_id) +
                                    " expires before the wake window ends");
        }
        if (visible_.size() < 4)
            throw ScenarioError("only " + std::to_string(visible_.size()) + " satellites above the elevation mask");
        anchor_ = *std::max_element(visible_.begin(), visible_.end(), [&](int a, int b) {
            return gen_.elevation_deg(a, r_off_) < gen_.elevation_deg(b, r_off_);
        });
    }

    void check_geometry() const {
        for (double t : {r_off_, r_w_}) {
            std::vector<Vec3> sats;
            for (int id : visible_) sats.push_back(propagate(gen_.satellite(id), gen_.sow(t)).position);
            const Eigen::MatrixXd h = pvt::design_matrix({gen_.user_position(t), 0.0}, sats);
            const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
            const auto& sv = svd.singularValues();
            const double smin = sv(sv.size() - 1);
            if (!(smin > 0.0) || sv(0) / smin > 1e8) throw ScenarioError("degenerate satellite geometry");
        }
    }

    std::vector<EphemerisRecord> decode_ephemerides() const {
        std::vector<EphemerisRecord> out;
        for (int id : visible_) {
            const std::int64_t first = gen_.bit_count(id, 0.0) / nav::kBitsPerSubframe;
            const std::int64_t frame = first - first % nav::kSubframesPerFrame;
            std::array<nav::Payload, 3> payloads{};
            for (int k = 0; k < 3; ++k) {
                const auto sf = nav::decode_subframe(gen_.subframe(id, frame + k).bits());
                payloads[static_cast<std::size_t>(sf.subframe_id - 1)] = sf.payload;
            }
            out.push_back(unpack_ephemeris(id, payloads));
        }
        return out;
    }

    ReceiverClockState clock_at(double t) const {
        if (t < r_w_) return advance(clock1_, t);
        return advance(clock2_, t - r_w_);
    }

    ChannelObservation observe(int sat_id, double t, std::int64_t bit_offset) const {
        ChannelObservation o;
        o.sat_id = sat_id;
        o.bit_count = gen_.bit_count(sat_id, t) + bit_offset;
        o.code_time_s = code_time_at_tic(gen_.bit_phase_s(sat_id, t) / nav::kBitPeriodS, cfg_.code_quantum_s);
        const auto ms = static_cast<std::uint64_t>(std::llround(t * 1000.0));
        o.noise_m = cfg_.noise_sigma_m * keyed_gaussian(cfg_.seed, static_cast<std::uint64_t>(sat_id), ms);
        return o;
    }

    std::vector<ChannelObservation> observe_all(double t, const std::map<int, std::int64_t>& offsets) const {
        std::vector<ChannelObservation> out;
        for (int id : visible_) out.push_back(observe(id, t, offsets.at(id)));
        return out;
    }

    const ChannelObservation& anchor_of(const std::vector<ChannelObservation>& obs) const {
        return *std::find_if(obs.begin(), obs.end(), [&](const auto& o) { return o.sat_id == anchor_; });
    }

    std::map<int, std::int64_t> zero_offsets() const {
        std::map<int, std::int64_t> m;
        for (int id : visible_) m[id] = 0;
        return m;
    }

    // Hot Start frame lock: the first full bit after bit lock fixes the
    // start position, and the preamble + HOW found in the live stream give
    // the alignment.
    PreambleLock preamble_lock(int sat_id, double t_bl) const {
        std::int64_t n0 = gen_.bit_count(sat_id, t_bl);
        if (gen_.bit_phase_s(sat_id, t_bl) > 0.0) ++n0;
        const int pos = static_cast<int>(n0 % nav::kBitsPerSubframe);
        const auto stream = gen_.bits(sat_id, n0, 2 * nav::kBitsPerSubframe + 2 * nav::kBitsPerWord);
        const auto match = nav::scan_for_preamble(stream);
        if (!match) throw ScenarioError("no preamble found for PRN " + std::to_string(sat_id));
        const std::int64_t start = n0 + static_cast<std::int64_t>(match->offset);
        if (start % nav::kBitsPerSubframe != 0 || match->tow != start / nav::kBitsPerSubframe + 1)
            throw ScenarioError("false preamble lock for PRN " + std::to_string(sat_id));
        return {receiver::hotstart_frame_lock_delay(pos / nav::kBitsPerWord + 1, pos % nav::kBitsPerWord)};
    }

    void run_first_session(Navigator& nav) {
        const double t_ready = cfg_.locks.total() + 7.0;
        std::vector<double> times;
        for (double k = std::max(std::ceil(t_ready), r_off_ - 5.0); k <= r_off_ - 1.0; k += 1.0) times.push_back(k);
        if (times.empty()) throw ScenarioError("session_s too short for a fix before power-off");
        for (int id : visible_) preamble_lock(id, cfg_.locks.total());

        const auto offsets = zero_offsets();
        for (double t : times) {
            const auto obs = observe_all(t, offsets);
            const GpsTime rx = clock_at(t).receiver_time();
            if (!nav.rco()) nav.update_rco_from_anchor(clock1_.zero_time(), rx, anchor_of(obs));
            nav.fix(rx, obs);
        }
        if (!nav.last_known_position()) throw ScenarioError("no fix before power-off");
    }

    frame_sync::PersistedSnapshot persist(const Navigator& nav, const std::string& path) {
        const std::int64_t n = gen_.bit_count(anchor_, r_off_);
        r_snap_ = gen_.arrival_of_bit(anchor_, n);
        frame_sync::TrackingStatus tracking;
        tracking.bit_locked = true;
        tracking.frame_locked_once = nav.has_fix_since_start();
        tracking.carrier_doppler_hz = gen_.carrier_doppler_hz(anchor_, r_snap_);
        tracking.code_phase_chips =
            std::fmod(gen_.bit_phase_s(anchor_, r_snap_) * kCodeRateHz, kCodeLengthChips);
        tracking.rco = *nav.rco();
        for (int id : visible_) tracking.ephemerides.push_back({id, nav.ephemeris(id).epoch_s});
        const auto snap = frame_sync::take_snapshot(nav::BitstreamCursor::from_bit_count(n), clock_at(r_snap_),
                                                    tracking);
        if (path.empty()) return frame_sync::parse_snapshot(frame_sync::serialize_snapshot(snap));
        frame_sync::write_snapshot_file(path, snap);
        return frame_sync::read_snapshot_file(path);
    }

    bool ephemerides_valid(const Navigator& nav) const {
        const double t = gen_.sow(r_w_ + cfg_.wake_window_s);
        return std::all_of(snapshot_.ephemeris_ids.begin(), snapshot_.ephemeris_ids.end(), [&](const auto& tag) {
            const auto& e = nav.ephemeris(tag.sat_id);
            return e.epoch_s == tag.epoch_s && e.valid_at(t);
        });
    }

    Sample sample_at(double t, const std::optional<Vec3>& position, bool valid) const {
        Sample s;
        s.t_s = t - r_w_;
        s.fix_valid = valid;
        if (position) {
            const auto e = pvt::horizontal_error(*position, gen_.user_position(t));
            s.err_east_m = e.east_m;
            s.err_north_m = e.north_m;
            s.err_2d_m = e.horizontal_m;
        }
        return s;
    }

    ArmReport run_arm(Navigator nav, bool estimator, double budget_ms) {
        ArmReport arm;
        arm.arm = estimator ? "estimator" : "hotstart";
        const double wake = 0.0;

        std::vector<receiver::Channel> channels;
        double bl_rel = 0.0;
        for (int id : visible_) {
            channels.emplace_back(id);
            bl_rel = run_lock_sequence(channels.back(), cfg_.locks, wake);
        }
        const double t_bl = r_w_ + bl_rel;

        std::optional<std::map<int, std::int64_t>> offsets;
        double t_fl = 0.0;
        if (estimator) {
            try {
                offsets = estimate_offsets(nav, t_bl, budget_ms, arm);
            } catch (const StaleSnapshotError&) {
                arm.fell_back_to_hotstart = true;
            }
            if (offsets && !ephemerides_valid(nav)) {
                offsets.reset();
                arm.fell_back_to_hotstart = true;
            }
            if (offsets) {
                const double fl_rel = bl_rel + cfg_.estimator_epsilon_s;
                t_fl = r_w_ + fl_rel;
                for (auto& ch : channels) ch.apply({receiver::EventKind::estimate_available, fl_rel});
            }
        }
        if (!offsets) {
            double fl_rel = bl_rel;
            for (auto& ch : channels) {
                const double t = bl_rel + preamble_lock(ch.sat_id(), t_bl).delay_s;
                ch.apply({receiver::EventKind::preamble_decoded, t});
                fl_rel = std::max(fl_rel, t);
            }
            t_fl = r_w_ + fl_rel;
            offsets = zero_offsets();
        }
        arm.frame_lock_source = channels.front().state().source;
        for (const auto& ch : channels)
            arm.transitions.insert(arm.transitions.end(), ch.transitions().begin(), ch.transitions().end());
        std::stable_sort(arm.transitions.begin(), arm.transitions.end(),
                         [](const auto& a, const auto& b) { return a.time_s < b.time_s; });

        std::vector<double> grid;
        const double end = r_w_ + cfg_.wake_window_s + 1e-9;
        for (int k = 1; r_w_ + k * cfg_.sample_period_s <= end; ++k) grid.push_back(r_w_ + k * cfg_.sample_period_s);

        const std::optional<Vec3> stale = nav.last_known_position();
        arm.series.push_back(sample_at(r_w_, stale, false));

        std::vector<double> fix_times;
        if (t_fl <= end) fix_times.push_back(t_fl);
        for (double t : grid)
            if (t > t_fl + 1e-9) fix_times.push_back(t);

        std::vector<double> steady;
        std::size_t gi = 0;
        for (double t : fix_times) {
            for (; gi < grid.size() && grid[gi] < t - 1e-9; ++gi) arm.series.push_back(sample_at(grid[gi], stale, false));
            if (gi < grid.size() && std::abs(grid[gi] - t) <= 1e-9) ++gi;

            const auto obs = observe_all(t, *offsets);
            const GpsTime rx = clock_at(t).receiver_time();
            bool ok = false;
            std::optional<Vec3> pos = nav.last_known_position();
            try {
                if (!nav.rco()) nav.update_rco_from_anchor(clock2_.zero_time(), rx, anchor_of(obs));
                const auto f = nav.fix(rx, obs);
                ok = f.solution.converged;
                if (ok) pos = f.solution.position;
            } catch (const GeometryError&) {
            } catch (const CausalityError&) {
            }
            Sample s = sample_at(t, pos, ok);
            if (ok && !arm.time_to_first_fix_s) {
                arm.time_to_first_fix_s = s.t_s;
            } else if (ok) {
                steady.push_back(s.err_2d_m);
            }
            arm.series.push_back(s);
        }
        for (; gi < grid.size(); ++gi) arm.series.push_back(sample_at(grid[gi], stale, false));
        if (!steady.empty()) arm.rms_2d_m = pvt::rms_2d(steady);
        return arm;
    }

    // Bit-count corrections per channel from the frame-sync estimate; each
    // is the estimated minus the true bit count and stays fixed afterwards.
    std::map<int, std::int64_t> estimate_offsets(const Navigator& nav, double t_bl, double budget_ms, ArmReport& arm) {
        const std::int64_t n_true = gen_.bit_count(anchor_, t_bl);
        const double t_edge = gen_.arrival_of_bit(anchor_, n_true);
        const auto clk = clock_at(t_edge);
        const double elapsed_s = static_cast<double>(clk.rtc_count - snapshot_.rtc_count) / cfg_.rtc_nominal_hz;

        frame_sync::EstimateOptions opts;
        opts.mode = cfg_.estimation_mode;
        opts.current_tic = clk.tic_count;
        opts.max_elapsed_ms = budget_ms;
        if (cfg_.doppler_compensation)
            opts.elapsed_correction_ms =
                frame_sync::elapsed_correction_ms(snapshot_, gen_.carrier_doppler_hz(anchor_, t_edge), elapsed_s);
        const auto est = frame_sync::estimate_frame_state(snapshot_, clk.rtc_count, cfg_.rtc_nominal_hz, opts);

        const nav::BitstreamCursor cursor{est.word_index, est.bit_index, est.tow};
        const std::int64_t n_est = cursor.bit_count() + (est.residual_ms >= 0.5 * nav::kBitPeriodS * 1000.0 ? 1 : 0);
        arm.bit_alignment_error = n_est - n_true;

        const auto stream = gen_.bits(anchor_, n_true, 2 * nav::kBitsPerSubframe + 2 * nav::kBitsPerWord);
        if (const auto m = nav::scan_for_preamble(stream)) {
            const std::int64_t at = n_est + static_cast<std::int64_t>(m->offset);
            arm.preamble_consistent = at % nav::kBitsPerSubframe == 0 && m->tow == at / nav::kBitsPerSubframe + 1;
        }

        std::map<int, std::int64_t> offsets;
        offsets[anchor_] = n_est - n_true;
        const double t_fl = t_bl + cfg_.estimator_epsilon_s;
        const auto a = observe(anchor_, t_fl, offsets[anchor_]);
        const double tx_anchor = static_cast<double>(a.bit_count) * nav::kBitPeriodS + a.code_time_s;
        const double t_rx = tx_anchor + nav.predicted_transit(anchor_, tx_anchor + kMeanPropagationDelayS);
        for (int id : visible_) {
            if (id == anchor_) continue;
            const auto o = observe(id, t_fl, 0);
            const double pred_tx = t_rx - nav.predicted_transit(id, t_rx);
            offsets[id] = Navigator::resolve_bit_count(pred_tx, o.code_time_s) - o.bit_count;
        }
        return offsets;
    }

    const ScenarioConfig& cfg_;
    SignalGenerator gen_;
    double r_off_;
    double r_w_;
    double r_snap_ = 0.0;
    std::vector<int> visible_;
    int anchor_ = 0;
    ReceiverClockState clock1_;
    ReceiverClockState clock2_;
    frame_sync::PersistedSnapshot snapshot_;
};

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const std::string& snapshot_path) {
    config.validate();
    Runner runner(config);
    return runner.run(snapshot_path);
}

}  // namespace instanton::sim
