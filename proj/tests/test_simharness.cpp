#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "instanton/errors.hpp"
#include "instanton/scenario.hpp"

using namespace instanton;
using namespace instanton::sim;

namespace {

ScenarioConfig quiet(double off_s) {
    ScenarioConfig c;
    c.off_duration_s = off_s;
    c.noise_sigma_m = 0.0;
    c.code_quantum_s = 0.0;
    c.rx_clock_bias_s = 0.0;
    c.wake_clock_bias_s = 0.0;
    c.rx_drift_ppm = 0.0;
    return c;
}

std::string what_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(KeyedGaussian, DeterministicAndStandard) {
    EXPECT_EQ(keyed_gaussian(1, 2, 3), keyed_gaussian(1, 2, 3));
    EXPECT_NE(keyed_gaussian(1, 2, 3), keyed_gaussian(1, 2, 4));
    EXPECT_NE(keyed_gaussian(1, 2, 3), keyed_gaussian(2, 2, 3));
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double g = keyed_gaussian(9, 1, static_cast<std::uint64_t>(i));
        sum += g;
        sq += g * g;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.02);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(SignalGenerator, BitEdgesInvertBitCount) {
    ScenarioConfig c;
    SignalGenerator g(c, default_constellation(c.user_position, c.start_sow));
    for (const auto& s : g.satellites()) {
        for (double t : {1.0, 60.0, 901.3}) {
            const auto n = g.bit_count(s.sat_id, t);
            const double edge = g.arrival_of_bit(s.sat_id, n);
            EXPECT_LE(edge, t);
            EXPECT_GT(edge, t - 0.0201);
            EXPECT_EQ(g.bit_count(s.sat_id, edge + 1e-7), n);
            EXPECT_LT(g.bit_phase_s(s.sat_id, edge + 1e-7), 1e-6);
            EXPECT_LT(std::abs(g.carrier_doppler_hz(s.sat_id, t)), 10000.0);
        }
    }
}

TEST(SignalGenerator, StreamDecodesToItsOwnBitCount) {
    ScenarioConfig c;
    SignalGenerator g(c, default_constellation(c.user_position, c.start_sow));
    const int id = g.satellites().front().sat_id;
    const std::int64_t n0 = g.bit_count(id, 30.0);
    const auto s = g.bits(id, n0, 700);
    const auto m = nav::scan_for_preamble(s);
    ASSERT_TRUE(m);
    const std::int64_t at = n0 + static_cast<std::int64_t>(m->offset);
    EXPECT_EQ(at % 300, 0);
    EXPECT_EQ(m->tow, at / 300 + 1);
    EXPECT_EQ(nav::decode_subframe(std::span<const nav::Bit>(s).subspan(m->offset, 300)).week_number,
              c.start_week);
}

TEST(Scenario, ParsesAllSections) {
    const auto c = parse_scenario(R"(# sample
[scenario]
seed = 7
arm = estimator
off_duration_s = 300   # five minutes
estimation_mode = literal
doppler_compensation = false
[clock]
rtc_ppm = -4.5
code_quantum_s = 0
[locks]
code_s = 0.6
[user]
lla = 10, 20, 30
[satellite]
prn = 3
phase_deg = 10
[satellite]
prn = 4
phase_deg = 20
[satellite]
prn = 5
[satellite]
prn = 6
)");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.arms, ArmSelection::estimator);
    EXPECT_EQ(c.off_duration_s, 300.0);
    EXPECT_EQ(c.estimation_mode, frame_sync::EstimationMode::literal);
    EXPECT_FALSE(c.doppler_compensation);
    EXPECT_EQ(c.rtc_ppm, -4.5);
    EXPECT_EQ(c.code_quantum_s, 0.0);
    EXPECT_EQ(c.locks.code_s, 0.6);
    EXPECT_LT((c.user_position - geodetic_to_ecef({deg2rad(10), deg2rad(20), 30})).norm(), 1e-6);
    ASSERT_EQ(c.satellites.size(), 4u);
    EXPECT_EQ(c.satellites[1].sat_id, 4);
    EXPECT_NEAR(c.satellites[1].phase_at_epoch_rad, deg2rad(20), 1e-12);
}

TEST(Scenario, ErrorsCarryLineNumbers) {
    EXPECT_NE(what_of("[scenario]\nseed = 1\nbogus = 2\n").find("line 3"), std::string::npos);
    EXPECT_NE(what_of("[nowhere]\n").find("line 1"), std::string::npos);
    EXPECT_NE(what_of("seed = 1\n").find("line 1"), std::string::npos);
    EXPECT_NE(what_of("[scenario]\n\noff_duration_s = abc\n").find("line 3"), std::string::npos);
    EXPECT_NE(what_of("[scenario]\narm = neither\n").find("line 2"), std::string::npos);
    EXPECT_FALSE(what_of("[scenario]\noff_duration_s = -1\n").empty());
    EXPECT_THROW(load_scenario_file("/nonexistent/scenario.cfg"), IoError);
}

TEST(PowerRatio, Examples) {
    EXPECT_NEAR(power_savings_ratio(900.0, 2.5), 1.0 / 361.0, 1e-12);
    EXPECT_NEAR(power_savings_ratio(900.0, 3.0), 1.0 / 301.0, 1e-12);
    EXPECT_EQ(power_savings_ratio(0.0, 5.0), 1.0);
    EXPECT_THROW(power_savings_ratio(900.0, 0.0), ValidationError);
    EXPECT_THROW(power_savings_ratio(-1.0, 1.0), ValidationError);
}

TEST(Run, DefaultScenarioShapesTheReport) {
    const auto r = run_scenario(ScenarioConfig{});
    ASSERT_EQ(r.arms.size(), 2u);
    const auto* est = r.arm("estimator");
    const auto* hot = r.arm("hotstart");
    ASSERT_TRUE(est && hot);
    EXPECT_EQ(est->frame_lock_source, receiver::FrameLockSource::estimate);
    EXPECT_EQ(hot->frame_lock_source, receiver::FrameLockSource::preamble);
    EXPECT_FALSE(est->fell_back_to_hotstart);
    EXPECT_EQ(est->bit_alignment_error, 0);
    ASSERT_TRUE(est->preamble_consistent);
    EXPECT_TRUE(*est->preamble_consistent);
    ASSERT_TRUE(est->time_to_first_fix_s && hot->time_to_first_fix_s);
    EXPECT_LT(*est->time_to_first_fix_s, *hot->time_to_first_fix_s);
    for (const auto* a : {est, hot}) {
        ASSERT_FALSE(a->series.empty());
        EXPECT_EQ(a->series.front().t_s, 0.0);
        EXPECT_FALSE(a->series.front().fix_valid);
        for (std::size_t i = 1; i < a->series.size(); ++i) EXPECT_GT(a->series[i].t_s, a->series[i - 1].t_s);
        EXPECT_TRUE(a->rms_2d_m);
        EXPECT_LT(*a->rms_2d_m, 20.0);
    }
    EXPECT_EQ(r.drift_budget_ms, 1e6);
}

TEST(Run, ZeroNoiseFixesAreExactAfterTheFirst) {
    const auto r = run_scenario(quiet(900.0));
    for (const auto& a : r.arms) {
        const auto f = a.fixes();
        ASSERT_GE(f.size(), 2u) << a.arm;
        for (std::size_t i = 1; i < f.size(); ++i) EXPECT_LT(f[i].err_2d_m, 1e-3) << a.arm << " t=" << f[i].t_s;
    }
}

TEST(Run, NoOffIntervalGivesIdenticalSteadyState) {
    const auto r = run_scenario(quiet(0.0));
    const auto e = r.arm("estimator")->fixes();
    const auto h = r.arm("hotstart")->fixes();
    ASSERT_GE(e.size(), 2u);
    ASSERT_GE(h.size(), 2u);
    for (const auto& fh : h) {
        if (&fh == &h.front()) continue;
        for (const auto& fe : e)
            if (std::abs(fe.t_s - fh.t_s) < 1e-9 && &fe != &e.front()) EXPECT_NEAR(fe.err_2d_m, fh.err_2d_m, 1e-6);
    }
}

TEST(Run, OverBudgetFallsBackToHotStart) {
    ScenarioConfig c;
    c.rtc_ppm = 2000.0;
    const auto r = run_scenario(c);
    const auto* est = r.arm("estimator");
    EXPECT_TRUE(est->fell_back_to_hotstart);
    EXPECT_EQ(est->frame_lock_source, receiver::FrameLockSource::preamble);
    EXPECT_NEAR(*est->time_to_first_fix_s, *r.arm("hotstart")->time_to_first_fix_s, 1e-9);
}

TEST(Run, MisalignedEstimateIsDetected) {
    ScenarioConfig c;
    c.rtc_ppm = 200.0;
    c.bit_margin_ms = 1e5;
    const auto r = run_scenario(c);
    const auto* est = r.arm("estimator");
    EXPECT_FALSE(est->fell_back_to_hotstart);
    EXPECT_NE(est->bit_alignment_error, 0);
    ASSERT_TRUE(est->preamble_consistent);
    EXPECT_FALSE(*est->preamble_consistent);
}

TEST(Run, ExportIsByteIdentical) {
    const auto dir = std::filesystem::temp_directory_path() / "instanton_export_test";
    std::filesystem::create_directories(dir);
    const auto a = run_scenario(ScenarioConfig{});
    const auto b = run_scenario(ScenarioConfig{});
    export_report(a, (dir / "a.csv").string());
    export_report(b, (dir / "b.csv").string());
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    };
    const auto text = slurp(dir / "a.csv");
    EXPECT_EQ(text, slurp(dir / "b.csv"));
    EXPECT_EQ(text, report_csv(a));
    EXPECT_EQ(text.rfind("t_s,arm,fix_valid,err_east_m,err_north_m,err_2d_m\n", 0), 0u);

    std::size_t rows = 0;
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') ++rows;
    EXPECT_EQ(rows, a.arms[0].series.size() + a.arms[1].series.size());
    EXPECT_THROW(export_report(a, (dir / "missing" / "x.csv").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST(Run, SnapshotFileMatchesReport) {
    const auto dir = std::filesystem::temp_directory_path() / "instanton_run_snapshot";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "s.bin").string();
    const auto r = run_scenario(ScenarioConfig{}, path);
    EXPECT_EQ(frame_sync::read_snapshot_file(path), r.snapshot);
    std::filesystem::remove_all(dir);
}
