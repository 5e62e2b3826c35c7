// Acceptance checks. Usage: acceptance [criterion...]; no argument runs all.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "instanton/constellation.hpp"
#include "instanton/frame_sync.hpp"
#include "instanton/nav_message.hpp"
#include "instanton/pvt.hpp"
#include "instanton/scenario.hpp"

using namespace instanton;

namespace {

// Tolerances.
constexpr double kCodeDopplerTolHz = 0.005;
constexpr double kPvtTolM = 1e-3;
constexpr int kPvtMaxIterations = 10;
constexpr double kJacobianRelTol = 1e-6;
constexpr double kTtfDiffMinS = 1.2;
constexpr double kTtfDiffMaxS = 6.0;
constexpr double kFirstFixShareMin = 0.90;
constexpr double kZeroNoiseSteadyM = 10.0;
constexpr double kPowerRatioLo = 1.0 / 310.0;
constexpr double kPowerRatioHi = 1.0 / 290.0;

struct Result {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

frame_sync::PersistedSnapshot random_snapshot(std::mt19937_64& rng) {
    frame_sync::PersistedSnapshot s;
    s.word_index = static_cast<int>(rng() % 10) + 1;
    s.bit_index = static_cast<int>(rng() % 30);
    s.tow = static_cast<int>(rng() % 90000);
    s.rtc_count = static_cast<std::int64_t>(rng() % 1000000000);
    return s;
}

Result c1() {
    frame_sync::PersistedSnapshot s;
    s.word_index = 6;
    s.bit_index = 19;
    s.tow = 2679;
    frame_sync::EstimateOptions o;
    o.mode = frame_sync::EstimationMode::literal;
    const auto e = frame_sync::estimate_from_elapsed(s, 209806.6875, o);
    return {e.bit_index == 9 && e.word_index == 6 && e.tow == 2713,
            fmt("bit %.0f word %.0f tow %.0f", e.bit_index, e.word_index, e.tow)};
}

Result c2() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> el(0.0, 1e6);
    int match = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        const auto s = random_snapshot(rng);
        const double ms = el(rng);
        int bit = s.bit_index, word = s.word_index, tow = s.tow;
        for (double t = 20.0; t <= ms; t += 20.0) {
            if (++bit == 30) {
                bit = 0;
                if (++word == 11) {
                    word = 1;
                    ++tow;
                }
            }
        }
        const auto e = frame_sync::estimate_from_elapsed(s, ms);
        if (e.bit_index == bit && e.word_index == word && e.tow == tow) ++match;
    }
    return {match == trials, fmt("%.0f/%.0f exact matches", match, trials)};
}

// Alignment error (ms) of the estimate against truth when the RTC runs
// `ppm` fast for the whole budget. The snapshot is latched at a bit edge and
// the RTC starts at a random phase.
double drift_trial_error_ms(std::mt19937_64& rng, double ppm, double budget_ms) {
    auto s = random_snapshot(rng);
    const double hz = kDefaultRtcHz;
    const double phase0 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double counts_true = budget_ms * 1e-3 * hz * (1.0 + ppm * 1e-6);
    const auto dn = static_cast<std::int64_t>(std::floor(phase0 + counts_true));
    const auto e = frame_sync::estimate_frame_state(s, s.rtc_count + dn, hz);
    const nav::BitstreamCursor start{s.word_index, s.bit_index, s.tow};
    const nav::BitstreamCursor est{e.word_index, e.bit_index, e.tow};
    const double est_ms = static_cast<double>(est.bit_count() - start.bit_count()) * 20.0 + e.residual_ms;
    return est_ms - budget_ms;
}

Result c3() {
    const double budget = frame_sync::drift_budget(10.0, 10.0);
    const bool exact = budget == 1e6;
    std::mt19937_64 rng(3);
    double worst10 = 0.0, worst30 = 0.0;
    int within10 = 0, exceed30 = 0;
    for (int i = 0; i < 100; ++i) {
        const double ppm = std::uniform_real_distribution<double>(-10.0, 10.0)(rng);
        const double err = std::abs(drift_trial_error_ms(rng, ppm, budget));
        worst10 = std::max(worst10, err);
        if (err <= 10.0) ++within10;
    }
    for (int i = 0; i < 100; ++i) {
        const double ppm = std::uniform_real_distribution<double>(-30.0, 30.0)(rng);
        const double err = std::abs(drift_trial_error_ms(rng, ppm, budget));
        worst30 = std::max(worst30, err);
        if (err > 10.0) ++exceed30;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "budget %.1f ms; 10 ppm: %d/100 within, worst %.4f ms; 30 ppm: %d/100 exceed, worst %.4f ms",
                  budget, within10, worst10, exceed30, worst30);
    return {exact && within10 == 100 && exceed30 >= 1, buf};
}

Result c4() {
    const double v = frame_sync::code_doppler_from_carrier(10000.0);
    return {std::abs(v - 6.4935) <= kCodeDopplerTolHz, fmt("%.6f Hz", v)};
}

Result c5() {
    const Vec3 base = geodetic_to_ecef({deg2rad(37.2636), deg2rad(127.0286), 50.0});
    const auto enu = enu_basis(ecef_to_geodetic(base));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> az(0.0, 2 * kPi), el(deg2rad(15.0), deg2rad(85.0)), off(-1e4, 1e4),
        bias(-3e5, 3e5);
    int ok = 0, trials = 0, max_iter = 0;
    double worst_pos = 0.0, worst_bias = 0.0, worst_jac = 0.0;
    for (int n : {4, 8}) {
        for (int t = 0; t < 100; ++t, ++trials) {
            const Vec3 user = base + Vec3(off(rng), off(rng), off(rng));
            const double b = bias(rng);
            std::vector<Vec3> sats;
            std::vector<double> rho;
            for (int i = 0; i < n; ++i) {
                const double a = az(rng), e = el(rng);
                const Vec3 los(std::cos(e) * std::sin(a), std::cos(e) * std::cos(a), std::sin(e));
                sats.push_back(base + 2.1e7 * (enu.transpose() * los));
                rho.push_back((sats.back() - user).norm() + b);
            }
            const auto s = pvt::solve(rho, sats, {});
            const double dp = (s.position - user).norm(), db = std::abs(s.clock_bias_m - b);
            worst_pos = std::max(worst_pos, dp);
            worst_bias = std::max(worst_bias, db);
            max_iter = std::max(max_iter, s.iterations);
            if (s.converged && dp <= kPvtTolM && db <= kPvtTolM && s.iterations <= kPvtMaxIterations) ++ok;

            const pvt::PvtState st{user + Vec3(50.0, -20.0, 10.0), b};
            const auto H = pvt::design_matrix(st, sats);
            const double h = 1.0;
            for (int k = 0; k < 4; ++k) {
                pvt::PvtState p = st, m = st;
                (k < 3 ? p.position[k] : p.clock_bias_m) += h;
                (k < 3 ? m.position[k] : m.clock_bias_m) -= h;
                const Eigen::VectorXd fd =
                    (pvt::predicted_pseudoranges(p, sats) - pvt::predicted_pseudoranges(m, sats)) / (2 * h);
                worst_jac = std::max(worst_jac, (fd - H.col(k)).norm() / H.col(k).norm());
            }
        }
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d/%d recovered, worst pos %.2e m, bias %.2e m, max %d iterations, jacobian rel %.2e",
                  ok, trials, worst_pos, worst_bias, max_iter, worst_jac);
    return {ok == trials && worst_jac <= kJacobianRelTol, buf};
}

Result c6() {
    int ok = 0, trials = 0;
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k < 60; ++k, ++trials) {
        sim::ScenarioConfig c;
        c.off_duration_s = 900.0 + 0.1 * k;
        const auto r = sim::run_scenario(c);
        const auto* e = r.arm("estimator");
        const auto* h = r.arm("hotstart");
        if (!e->time_to_first_fix_s || !h->time_to_first_fix_s || e->fell_back_to_hotstart) continue;
        const double d = *h->time_to_first_fix_s - *e->time_to_first_fix_s;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        if (d >= kTtfDiffMinS - 1e-9 && d <= kTtfDiffMaxS + 1e-9) ++ok;
    }
    return {ok == trials, fmt("%.0f/60 in range, difference %.3f..%.3f s", ok, lo, hi)};
}

Result c7() {
    int larger = 0;
    for (int seed = 1; seed <= 100; ++seed) {
        sim::ScenarioConfig c;
        c.seed = static_cast<std::uint64_t>(seed);
        c.arms = sim::ArmSelection::estimator;
        const auto f = sim::run_scenario(c).arms.front().fixes();
        if (f.size() >= 2 && f[0].err_2d_m > f[1].err_2d_m) ++larger;
    }
    sim::ScenarioConfig z;
    z.noise_sigma_m = 0.0;
    z.arms = sim::ArmSelection::estimator;
    const auto f = sim::run_scenario(z).arms.front().fixes();
    double worst = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) worst = std::max(worst, f[i].err_2d_m);
    const bool steady = f.size() >= 2 && worst < kZeroNoiseSteadyM;
    char buf[256];
    std::snprintf(buf, sizeof buf, "first > second in %d/100; zero-noise first %.3f m, worst later %.4f m", larger,
                  f.empty() ? -1.0 : f[0].err_2d_m, worst);
    return {larger >= kFirstFixShareMin * 100 && steady, buf};
}

Result c8() {
    std::mt19937_64 rng(8);
    auto payload = [&] {
        nav::Payload p{};
        for (auto& w : p) w = static_cast<std::uint32_t>(rng() & 0xFFFFFFu);
        p[7] &= ~3u;
        return p;
    };
    int lossless = 0;
    for (int i = 0; i < 10000; ++i) {
        const int sat = static_cast<int>(rng() % 32) + 1, sfid = static_cast<int>(rng() % 5) + 1;
        const int tow = static_cast<int>(rng() % (nav::kMaxTow + 1)), week = static_cast<int>(rng() % 1024);
        const auto p = payload();
        const auto d = nav::decode_subframe(nav::build_subframe(sat, sfid, tow, week, p).bits());
        if (d.sat_id == sat && d.subframe_id == sfid && d.tow == tow && d.week_number == week && d.payload == p)
            ++lossless;
    }
    long flips = 0, detected = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto data = static_cast<std::uint32_t>(rng() & 0xFFFFFFu);
        const nav::ParityTail tail{(rng() & 1) != 0, (rng() & 2) != 0};
        const auto w = nav::parity_encode(data, tail);
        for (int b = 0; b < 30; ++b, ++flips)
            if (!nav::parity_check({w.bits ^ (1u << b)}, tail)) ++detected;
    }
    nav::Bitstream stream;
    const int subframes = 200;
    for (int k = 0; k < subframes; ++k) {
        const auto b = nav::build_subframe(11, k % 5 + 1, 5000 + k, 420, payload()).bits();
        stream.insert(stream.end(), b.begin(), b.end());
    }
    const auto found = nav::scan_all_preambles(stream);
    bool boundaries = found.size() == static_cast<std::size_t>(subframes);
    for (std::size_t k = 0; boundaries && k < found.size(); ++k)
        boundaries = found[k].offset == k * 300 && found[k].tow == 5000 + static_cast<int>(k);
    nav::Bitstream noise(1000000);
    for (auto& b : noise) b = static_cast<nav::Bit>(rng() & 1);
    const auto false_locks = nav::scan_all_preambles(noise).size();
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d/10000 lossless, %ld/%ld flips detected, %zu/%d boundaries, %zu false locks",
                  lossless, detected, flips, found.size(), subframes, false_locks);
    return {lossless == 10000 && detected == flips && boundaries && false_locks == 0, buf};
}

Result c9() {
    const double r = sim::power_savings_ratio(900.0, 3.0);
    return {r >= kPowerRatioLo && r <= kPowerRatioHi, fmt("ratio %.6f (1/%.1f)", r, 1.0 / r)};
}

Result c10() {
    sim::ScenarioConfig c;
    c.seed = 10;
    const auto a = sim::report_csv(sim::run_scenario(c));
    const auto b = sim::report_csv(sim::run_scenario(c));
    return {a == b && !a.empty(), fmt("%.0f bytes, identical %.0f", static_cast<double>(a.size()), a == b)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Result()>> criteria = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
    std::vector<int> pick;
    for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
    if (pick.empty())
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) pick.push_back(i);

    int failed = 0;
    for (int n : pick) {
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion %d\n", n);
            return 2;
        }
        Result r{false, ""};
        try {
            r = criteria[static_cast<std::size_t>(n - 1)]();
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s (%s)\n", n, r.pass ? "PASS" : "FAIL", r.detail.c_str());
        if (!r.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
