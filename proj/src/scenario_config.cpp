#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "instanton/errors.hpp"
#include "instanton/scenario.hpp"

namespace instanton::sim {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct SatelliteEntry {
    EphemerisRecord eph;
    double epoch_offset_s = 0.0;
    bool has_prn = false;
};

class Parser {
public:
    explicit Parser(ScenarioConfig& cfg) : cfg_(cfg) {}

    void line(int number, const std::string& raw) {
        line_ = number;
        std::string s = raw;
        if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) return;
        if (s.front() == '[') {
            if (s.back() != ']') fail("unterminated section header");
            section_ = trim(s.substr(1, s.size() - 2));
            if (section_ == "satellite") {
                sats_.emplace_back();
            } else if (section_ != "scenario" && section_ != "clock" && section_ != "locks" && section_ != "user") {
                fail("unknown section [" + section_ + "]");
            }
            return;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (section_.empty()) fail("key outside of a section");
        assign(key, value);
    }

    void finish() {
        for (auto& e : sats_) {
            if (!e.has_prn) throw ScenarioError("[satellite] section without prn");
            e.eph.epoch_s = cfg_.start_sow + e.epoch_offset_s;
            cfg_.satellites.push_back(e.eph);
        }
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ScenarioError("line " + std::to_string(line_) + ": " + what);
    }

    double number(const std::string& v) const {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size() || !std::isfinite(d)) fail("not a number: '" + v + "'");
            return d;
        } catch (const std::logic_error&) {
            fail("not a number: '" + v + "'");
        }
    }

    std::int64_t integer(const std::string& v) const {
        const double d = number(v);
        if (d != std::floor(d)) fail("expected an integer: '" + v + "'");
        return static_cast<std::int64_t>(d);
    }

    bool boolean(const std::string& v) const {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail("expected true or false: '" + v + "'");
    }

    Vec3 triple(const std::string& v) const {
        std::stringstream ss(v);
        std::string part;
        std::vector<double> xs;
        while (std::getline(ss, part, ',')) xs.push_back(number(trim(part)));
        if (xs.size() != 3) fail("expected three comma-separated numbers");
        return {xs[0], xs[1], xs[2]};
    }

    void assign(const std::string& key, const std::string& v) {
        using Setter = std::function<void(const std::string&)>;
        auto f = [&](double& dst) { return Setter([this, &dst](const std::string& x) { dst = number(x); }); };

        std::map<std::string, Setter> table;
        if (section_ == "scenario") {
            table = {
                {"seed", [this](const std::string& x) { cfg_.seed = static_cast<std::uint64_t>(integer(x)); }},
                {"arm", [this](const std::string& x) {
                     try {
                         cfg_.arms = parse_arm(x);
                     } catch (const ScenarioError& e) {
                         fail(e.what());
                     }
                 }},
                {"off_duration_s", f(cfg_.off_duration_s)},
                {"session_s", f(cfg_.session_s)},
                {"wake_window_s", f(cfg_.wake_window_s)},
                {"sample_period_s", f(cfg_.sample_period_s)},
                {"noise_sigma_m", f(cfg_.noise_sigma_m)},
                {"elevation_mask_deg", f(cfg_.elevation_mask_deg)},
                {"start_sow", f(cfg_.start_sow)},
                {"start_week", [this](const std::string& x) { cfg_.start_week = static_cast<int>(integer(x)); }},
                {"satellite_count",
                 [this](const std::string& x) { cfg_.default_satellite_count = static_cast<int>(integer(x)); }},
                {"estimation_mode", [this](const std::string& x) {
                     if (x == "exact")
                         cfg_.estimation_mode = frame_sync::EstimationMode::exact;
                     else if (x == "literal")
                         cfg_.estimation_mode = frame_sync::EstimationMode::literal;
                     else
                         fail("estimation_mode must be exact or literal");
                 }},
                {"doppler_compensation", [this](const std::string& x) { cfg_.doppler_compensation = boolean(x); }},
            };
        } else if (section_ == "clock") {
            table = {
                {"rtc_nominal_hz", f(cfg_.rtc_nominal_hz)},   {"rtc_ppm", f(cfg_.rtc_ppm)},
                {"bit_margin_ms", f(cfg_.bit_margin_ms)},     {"rx_clock_bias_s", f(cfg_.rx_clock_bias_s)},
                {"wake_clock_bias_s", f(cfg_.wake_clock_bias_s)}, {"rx_drift_ppm", f(cfg_.rx_drift_ppm)},
                {"code_quantum_s", f(cfg_.code_quantum_s)},
            };
        } else if (section_ == "locks") {
            table = {
                {"code_s", f(cfg_.locks.code_s)},
                {"carrier_s", f(cfg_.locks.carrier_s)},
                {"bit_s", f(cfg_.locks.bit_s)},
                {"estimator_epsilon_s", f(cfg_.estimator_epsilon_s)},
            };
        } else if (section_ == "user") {
            table = {
                {"ecef_m", [this](const std::string& x) { cfg_.user_position = triple(x); }},
                {"lla", [this](const std::string& x) {
                     const Vec3 t = triple(x);
                     cfg_.user_position = geodetic_to_ecef({deg2rad(t.x()), deg2rad(t.y()), t.z()});
                 }},
                {"velocity_mps", [this](const std::string& x) { cfg_.user_velocity = triple(x); }},
            };
        } else {  // satellite
            SatelliteEntry& s = sats_.back();
            auto deg = [this](double& dst) {
                return Setter([this, &dst](const std::string& x) { dst = deg2rad(number(x)); });
            };
            table = {
                {"prn", [this, &s](const std::string& x) {
                     s.eph.sat_id = static_cast<int>(integer(x));
                     s.has_prn = true;
                 }},
                {"radius_m", f(s.eph.orbit_radius_m)},
                {"inclination_deg", deg(s.eph.inclination_rad)},
                {"raan_deg", deg(s.eph.raan_rad)},
                {"phase_deg", deg(s.eph.phase_at_epoch_rad)},
                {"epoch_offset_s", f(s.epoch_offset_s)},
                {"validity_s", f(s.eph.validity_s)},
            };
        }
        const auto it = table.find(key);
        if (it == table.end()) fail("unknown key '" + key + "' in [" + section_ + "]");
        it->second(v);
    }

    ScenarioConfig& cfg_;
    std::string section_;
    std::vector<SatelliteEntry> sats_;
    int line_ = 0;
};

}  // namespace

ArmSelection parse_arm(const std::string& name) {
    if (name == "estimator") return ArmSelection::estimator;
    if (name == "hotstart") return ArmSelection::hotstart;
    if (name == "both") return ArmSelection::both;
    throw ScenarioError("arm must be estimator, hotstart or both, got '" + name + "'");
}

const char* to_string(ArmSelection arms) {
    switch (arms) {
        case ArmSelection::estimator: return "estimator";
        case ArmSelection::hotstart: return "hotstart";
        case ArmSelection::both: return "both";
    }
    return "?";
}

void ScenarioConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ScenarioError(what);
    };
    require(off_duration_s >= 0.0, "off_duration_s must be >= 0");
    require(session_s >= 10.0, "session_s must be >= 10");
    require(wake_window_s > 0.0, "wake_window_s must be > 0");
    require(sample_period_s > 0.0, "sample_period_s must be > 0");
    require(start_week >= 0 && start_week <= nav::kMaxWeek, "start_week must be in 0..1023");
    require(start_sow >= 0.0 && start_sow == std::floor(start_sow), "start_sow must be a whole number of seconds");
    require(start_sow + session_s + off_duration_s + wake_window_s + 10.0 < kSecondsPerWeek,
            "scenario must stay inside one GPS week");
    require(rtc_nominal_hz > 0.0, "rtc_nominal_hz must be > 0");
    require(bit_margin_ms >= 0.0, "bit_margin_ms must be >= 0");
    require(noise_sigma_m >= 0.0, "noise_sigma_m must be >= 0");
    require(code_quantum_s >= 0.0, "code_quantum_s must be >= 0");
    require(estimator_epsilon_s >= 0.0, "estimator_epsilon_s must be >= 0");
    require(std::abs(rx_clock_bias_s) < 1.0 && std::abs(wake_clock_bias_s) < 1.0, "clock bias must be below 1 s");
    require(satellites.size() <= 32, "at most 32 satellites");
    require(!satellites.empty() || (default_satellite_count >= 4 && default_satellite_count <= 8),
            "satellite_count must be in 4..8");
    try {
        locks.validate();
        for (const auto& s : satellites) s.validate();
    } catch (const ValidationError& e) {
        throw ScenarioError(e.what());
    }
}

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig cfg;
    Parser p(cfg);
    std::istringstream is(text);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) p.line(++n, line);
    p.finish();
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError(path, "cannot open scenario file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace instanton::sim
