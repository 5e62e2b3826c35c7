#pragma once

// Scenario runner: fix, power off for a configured interval, wake, fix again,
// once through the frame-sync estimator and once through Hot Start.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "instanton/constellation.hpp"
#include "instanton/frame_sync.hpp"
#include "instanton/receiver.hpp"

namespace instanton::sim {

enum class ArmSelection { estimator, hotstart, both };
ArmSelection parse_arm(const std::string& name);
const char* to_string(ArmSelection arms);

struct ScenarioConfig {
    // Empty means default_constellation() around the user.
    std::vector<EphemerisRecord> satellites;
    int default_satellite_count = 8;
    Vec3 user_position = geodetic_to_ecef({deg2rad(37.2636), deg2rad(127.0286), 50.0});
    Vec3 user_velocity = Vec3::Zero();

    int start_week = 420;              // 0..1023, transmitted week number
    double start_sow = 345600.0;       // whole seconds
    double session_s = 60.0;           // time powered on before the power-off
    double off_duration_s = 900.0;
    double wake_window_s = 12.0;
    double sample_period_s = 1.0;

    receiver::LockLatencyConfig locks;
    double estimator_epsilon_s = 0.0;

    double rtc_nominal_hz = kDefaultRtcHz;
    double rtc_ppm = 10.0;
    double bit_margin_ms = 10.0;
    double rx_clock_bias_s = 0.0123;
    double wake_clock_bias_s = -0.0417;
    double rx_drift_ppm = 0.5;
    // Resolution of the code-phase measurement; 0 means unquantized.
    double code_quantum_s = kCodeChipS / 1024.0;

    double noise_sigma_m = 5.0;
    double elevation_mask_deg = 5.0;
    frame_sync::EstimationMode estimation_mode = frame_sync::EstimationMode::exact;
    bool doppler_compensation = true;

    ArmSelection arms = ArmSelection::both;
    std::uint64_t seed = 1;

    // Throws ScenarioError.
    void validate() const;
};

// Parses the line-oriented scenario format:
//
//   # comment
//   [scenario]            key = value lines follow
//   seed = 7
//   [satellite]           one section per satellite; repeatable
//   prn = 5
//
// Sections and keys are listed in README.md. Throws ScenarioError with the
// line number on any malformed or unknown entry.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);  // IoError if unreadable

// Deterministic standard normal draws addressed by a key, so equal keys give
// equal noise regardless of call order.
double keyed_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

// Signal truth for one scenario. Times are seconds since the scenario start
// (start_sow); transmit quantities are kept relative to that epoch.
class SignalGenerator {
public:
    SignalGenerator(const ScenarioConfig& config, std::vector<EphemerisRecord> satellites);

    const std::vector<EphemerisRecord>& satellites() const { return sats_; }
    const EphemerisRecord& satellite(int sat_id) const;
    double sow(double t) const { return start_sow_ + t; }

    Vec3 user_position(double t) const;
    double transit(int sat_id, double t) const;
    // Transmit time relative to the scenario start of the signal arriving at t.
    double transmit_rel(int sat_id, double t) const;
    // Bits since the start of the week and the time inside the current bit.
    std::int64_t bit_count(int sat_id, double t) const;
    double bit_phase_s(int sat_id, double t) const;
    // Arrival time of the leading edge of bit n.
    double arrival_of_bit(int sat_id, std::int64_t n) const;
    double carrier_doppler_hz(int sat_id, double t) const;
    double elevation_deg(int sat_id, double t) const;

    nav::Subframe subframe(int sat_id, std::int64_t subframe_count) const;
    nav::Bitstream bits(int sat_id, std::int64_t first_bit, std::size_t count) const;

private:
    std::vector<EphemerisRecord> sats_;
    std::map<int, std::size_t> index_;
    double start_sow_;
    int week_;
    Vec3 user0_;
    Vec3 user_vel_;
};

struct Sample {
    double t_s = 0.0;  // since wake
    bool fix_valid = false;
    double err_east_m = 0.0;
    double err_north_m = 0.0;
    double err_2d_m = 0.0;
};

struct ArmReport {
    std::string arm;
    std::vector<Sample> series;
    std::optional<double> time_to_first_fix_s;
    std::optional<double> rms_2d_m;
    receiver::FrameLockSource frame_lock_source = receiver::FrameLockSource::none;
    bool fell_back_to_hotstart = false;
    // Estimator arm: a preamble later decoded from the live stream agrees
    // with the estimated alignment.
    std::optional<bool> preamble_consistent;
    std::int64_t bit_alignment_error = 0;  // estimated minus true anchor bit count
    std::vector<receiver::Transition> transitions;

    // Fix samples only, in time order.
    std::vector<Sample> fixes() const;
};

struct RunReport {
    std::vector<ArmReport> arms;
    double off_duration_s = 0.0;
    double drift_budget_ms = 0.0;
    double power_ratio = 1.0;
    frame_sync::PersistedSnapshot snapshot;
    double predicted_code_phase_chips = 0.0;

    const ArmReport* arm(const std::string& name) const;
};

// Throws ScenarioError for invalid configurations or degenerate geometry.
RunReport run_scenario(const ScenarioConfig& config, const std::string& snapshot_path = "");

// on_s / (on_s + off_s), treating power-off as drawing nothing.
double power_savings_ratio(double off_s, double on_s);

// CSV with header `t_s,arm,fix_valid,err_east_m,err_north_m,err_2d_m` and a
// `#`-prefixed summary block.
std::string report_csv(const RunReport& report);
void export_report(const RunReport& report, const std::string& path);

}  // namespace instanton::sim
