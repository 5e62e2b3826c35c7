#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "instanton/errors.hpp"
#include "instanton/rx_clock.hpp"

using namespace instanton;

TEST(Advance, OneTicPerHundredMilliseconds) {
    ReceiverClockState s;
    s = advance(s, 0.1);
    EXPECT_EQ(s.tic_count, 1);
    for (int i = 0; i < 99; ++i) s = advance(s, 0.1);
    EXPECT_EQ(s.tic_count, 100);
}

TEST(Advance, ZeroIsIdentityAndNegativeThrows) {
    ReceiverClockState s;
    s.rtc_ppm_error = 3.0;
    s = advance(s, 12.345);
    const auto same = advance(s, 0.0);
    EXPECT_EQ(same.tic_count, s.tic_count);
    EXPECT_EQ(same.rtc_count, s.rtc_count);
    EXPECT_EQ(same.rx_elapsed_s, s.rx_elapsed_s);
    EXPECT_EQ(same.rtc_phase, s.rtc_phase);
    EXPECT_THROW(advance(s, -1e-3), ValidationError);
}

TEST(Advance, TenPpmGains320CountsOver1000Seconds) {
    ReceiverClockState nominal, fast;
    fast.rtc_ppm_error = 10.0;
    nominal = advance(nominal, 1000.0);
    fast = advance(fast, 1000.0);
    EXPECT_EQ(nominal.rtc_count, 32000000);
    EXPECT_EQ(fast.rtc_count - nominal.rtc_count, 320);
    EXPECT_DOUBLE_EQ((fast.rtc_count - nominal.rtc_count) / kDefaultRtcHz, 0.010);
}

TEST(Advance, CountsAreMonotone) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dt(0.0, 0.05);
    ReceiverClockState s;
    s.rtc_ppm_error = -25.0;
    s.clock_drift_ppm = 3.0;
    for (int i = 0; i < 10000; ++i) {
        const auto next = advance(s, dt(rng));
        ASSERT_GE(next.tic_count, s.tic_count);
        ASSERT_GE(next.rtc_count, s.rtc_count);
        s = next;
    }
}

TEST(Advance, ZeroDriftReceiverTimeIsTrueTime) {
    ReceiverClockState s;
    s.zt_week = 400;
    s.zt_second = 1000.0;
    double t = 0.0;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dt(0.0, 0.3);
    for (int i = 0; i < 1000; ++i) {
        const double d = dt(rng);
        s = advance(s, d);
        t += d;
        ASSERT_NEAR(s.receiver_time().minus({400, 1000.0}), t, 1e-12);
    }
}

TEST(ComputeRco, Examples) {
    const Rco a = compute_rco({0, 0.0}, 0, 0, 0);
    EXPECT_EQ(a.week, 0);
    EXPECT_DOUBLE_EQ(a.second, -0.075);
    const Rco b = compute_rco({0, 100.0}, 0, 50, 0);
    EXPECT_DOUBLE_EQ(b.second, 104.925);
    const Rco c = compute_rco({421, 10.0}, 420, 0, 1);
    EXPECT_EQ(c.week, 1);
    EXPECT_DOUBLE_EQ(c.second, 10.0 - 6.075);
}

TEST(ToGpsTime, Examples) {
    const GpsTime rx{3, 1234.5};
    const auto id = to_gps_time(rx, {0, 0.0});
    EXPECT_EQ(id.week, 3);
    EXPECT_EQ(id.second, 1234.5);

    const auto g = to_gps_time({0, 104.925}, {0, 104.925});
    EXPECT_EQ(g.week, 0);
    EXPECT_EQ(g.second, 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> sec(0.0, kSecondsPerWeek), off(-200.0, 200.0);
    for (int i = 0; i < 1000; ++i) {
        const GpsTime t{420, sec(rng)};
        const Rco r{0, off(rng)};
        const auto back = to_receiver_time(to_gps_time(t, r), r);
        ASSERT_NEAR(back.minus(t), 0.0, 1e-9);
    }
}

TEST(GpsTime, NormalizesAcrossWeekBoundaries) {
    const auto a = GpsTime::normalized(10, kSecondsPerWeek + 5.0);
    EXPECT_EQ(a.week, 11);
    EXPECT_DOUBLE_EQ(a.second, 5.0);
    const auto b = GpsTime::normalized(10, -5.0);
    EXPECT_EQ(b.week, 9);
    EXPECT_DOUBLE_EQ(b.second, kSecondsPerWeek - 5.0);
}

TEST(CodeTime, Examples) {
    EXPECT_EQ(code_time_at_tic(0.0), 0.0);
    EXPECT_NEAR(code_time_at_tic(0.5), 0.010, kCodeChipS);
    EXPECT_EQ(code_time_at_tic(0.5, 0.0), 0.010);
    EXPECT_THROW(code_time_at_tic(1.0), ValidationError);
    EXPECT_THROW(code_time_at_tic(-0.1), ValidationError);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> f(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = f(rng);
        const double q = code_time_at_tic(x);
        ASSERT_LE(std::abs(q - x * 0.02), 0.5 * kCodeChipS + 1e-15);
        ASSERT_NEAR(std::round(q / kCodeChipS) * kCodeChipS, q, 1e-15);
    }
}
