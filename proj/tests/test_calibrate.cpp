#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lpopt/calibrate.hpp"

using namespace lpopt;

namespace {

PricePath make_path(const std::vector<double>& prices, const std::vector<double>& volumes) {
    std::vector<SwapEvent> ev;
    for (std::size_t i = 0; i < prices.size(); ++i) ev.push_back({static_cast<Timestamp>(60 * i), prices[i], volumes[i]});
    return PricePath(ev);
}

}  // namespace

TEST(Grid, Endpoints) {
    const Grid lin{-3.0, 3.0, 61, false};
    EXPECT_DOUBLE_EQ(lin[0], -3.0);
    EXPECT_NEAR(lin[30], 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(lin[60], 3.0);
    const Grid geo{std::sqrt(0.01), std::sqrt(10.0), 61, true};
    EXPECT_DOUBLE_EQ(geo[0], 0.1);
    EXPECT_DOUBLE_EQ(geo[60], std::sqrt(10.0));
    EXPECT_NEAR(geo[30] * geo[30], geo[0] * geo[60], 1e-12);
}

TEST(GaussianWeights, DirectDensity) {
    const BucketPartition part(0.0, 1.0, 5);
    const auto a = gaussian_weights({0.0, 1.0}, part, part.center(3), 1.0);
    const double raw[5] = {std::exp(-2.0), std::exp(-0.5), 1.0, std::exp(-0.5), std::exp(-2.0)};
    double s = 0.0;
    for (double r : raw) s += r;
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(a[static_cast<std::size_t>(i)], raw[i] / s, 1e-15);
}

TEST(GaussianWeights, SymmetryFlatLimitAndFloor) {
    const BucketPartition part(0.0, 1.0, 41);
    const auto sym = gaussian_weights({0.0, 0.7}, part, part.center(21), 3.0);
    for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(sym[k], sym[40 - k], 1e-15);
    double total = 0.0;
    for (double v : sym) {
        EXPECT_GE(v, 0.0);
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);

    const BucketPartition few(0.0, 1.0, 3);
    const auto flat = gaussian_weights({0.0, 1e4}, few, few.center(2), 1.0);
    EXPECT_NEAR(flat[0] / flat[1], 1.0, 1e-8);

    const BucketPartition wide(0.0, 1.0, 600);
    const auto narrow = gaussian_weights({0.0, 0.1}, wide, wide.center(300), 1.0);
    double mn = 1.0;
    for (double v : narrow) mn = std::min(mn, v);
    EXPECT_GT(mn, 0.0);
}

TEST(GaussianWeights, MassVariantSumsToOne) {
    const BucketPartition part(0.0, 1.0, 50);
    const auto a = gaussian_weights({0.5, 1.3}, part, 25.0, 4.0, ProfileShape::IntegratedMass);
    double total = 0.0;
    for (double v : a) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(SimulatePoolFees, Examples) {
    const BucketPartition part(1.0, 3.0, 1);  // single bucket [1, 4]
    const LiquidityProfile prof(std::vector<double>{100.0});
    const std::vector<double> flat{2.0, 2.0, 2.0};
    EXPECT_EQ(simulate_pool_fees(prof, flat, part, 0.003, 2.0).value, 0.0);
    const std::vector<double> up{2.25, 4.0};
    const auto fu = simulate_pool_fees(prof, up, part, 0.003, 4.0);
    EXPECT_NEAR(fu.tokens.x, 0.0, 1e-15);
    EXPECT_NEAR(fu.tokens.y, 0.15, 1e-12);
    EXPECT_NEAR(fu.value, 0.15, 1e-12);
    const std::vector<double> down{2.25, 1.0};
    const auto fd = simulate_pool_fees(prof, down, part, 0.003, 1.0);
    EXPECT_NEAR(fd.tokens.x, 0.1, 1e-12);
    EXPECT_NEAR(fd.value, 0.1, 1e-12);
}

TEST(FeeWindow, MatchesSimulation) {
    const BucketPartition part(0.0, 1.0, 30);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(3.0, 27.0);
    std::vector<double> prices;
    for (int i = 0; i < 40; ++i) prices.push_back(u(rng));
    LiquidityProfile prof(30);
    for (auto& v : prof.values) v = 10.0 * u(rng);
    const FeeWindow w(prices, part);
    const auto direct = simulate_pool_fees(prof, prices, part, 0.003, prices.back());
    const auto in = w.inflow_for(prof);
    EXPECT_NEAR(0.003 * in.x, direct.tokens.x, 1e-9 * std::abs(direct.tokens.x));
    EXPECT_NEAR(0.003 * in.y, direct.tokens.y, 1e-9 * std::abs(direct.tokens.y));
}

TEST(Calibrate, ZeroMovementZeroFee) {
    const BucketPartition part(0.0, 10.0, 650);
    const auto path = make_path({2500, 2500, 2500}, {0, 0, 0});
    const Epoch e{0, 0, 2, 251, 120, false};
    const auto r = calibrate_epoch(path, e, CalibrationConfig{}, part);
    EXPECT_EQ(r.model_fee, 0.0);
    EXPECT_EQ(r.hist_fee, 0.0);
    EXPECT_FALSE(r.best_effort);
    EXPECT_EQ(r.params.mu, 0.0);
    EXPECT_DOUBLE_EQ(r.params.sigma, std::sqrt(10.0));
}

TEST(Calibrate, RecoversSyntheticFee) {
    const BucketPartition part(0.0, 10.0, 650);
    std::mt19937_64 rng(12);
    std::normal_distribution<double> step(0.0, 6.0);
    CalibrationConfig cfg;
    int hits = 0;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> prices{2500.0};
        for (int i = 0; i < 60; ++i) prices.push_back(prices.back() + step(rng));
        const auto stats = window_stats(prices, part.width());
        const GaussianParams truth{-1.0 + 0.1 * t, 0.3 + 0.1 * t};
        const auto prof = pool_profile(gaussian_weights(truth, part, stats.anchor, stats.scale), cfg.tvl, prices[0], part);
        const double fee = simulate_pool_fees(prof, prices, part, cfg.fee_tier, prices.back()).value;
        const auto r = calibrate_window(prices, fee, cfg, part);
        EXPECT_NEAR(r.rel_error, std::abs(r.model_fee - fee) / fee, 1e-12);
        if (r.rel_error <= cfg.tolerance) ++hits;
        EXPECT_EQ(r.best_effort, r.rel_error > cfg.tolerance);
    }
    EXPECT_GE(hits, 19);
}

TEST(Calibrate, UnreachableFeeIsBestEffort) {
    const BucketPartition part(0.0, 10.0, 650);
    std::vector<double> prices{2500, 2502, 2499, 2503};
    const auto r = calibrate_window(prices, 1e12, CalibrationConfig{}, part);
    EXPECT_TRUE(r.best_effort);
    EXPECT_GT(r.rel_error, 0.05);
}

TEST(Calibrate, LrfFlagAtGridMinimum) {
    const BucketPartition part(0.0, 10.0, 650);
    std::vector<double> prices{2500, 2530, 2560};
    CalibrationConfig cfg;
    cfg.lrf_enabled = true;
    // a tiny historical fee can only be met by pushing liquidity away from the traded range
    const auto r = calibrate_window(prices, 1e-6, cfg, part);
    EXPECT_EQ(r.lrf_flag, r.params.mu == cfg.mu_grid.min);
    cfg.lrf_enabled = false;
    EXPECT_FALSE(calibrate_window(prices, 1e-6, cfg, part).lrf_flag);
}

TEST(SubEpochs, Segmentation) {
    const auto a = segment_subepochs(10, 2);
    EXPECT_EQ(a.count, 9u);
    EXPECT_DOUBLE_EQ(a.flexibility, 1.0);
    const auto b = segment_subepochs(10, 4);
    EXPECT_EQ(b.count, 3u);
    EXPECT_EQ(b.windows.back().second, 9u);
    EXPECT_EQ(b.windows.back().first, 6u);
    const auto c = segment_subepochs(10, 10);
    EXPECT_EQ(c.count, 1u);
    EXPECT_NEAR(c.flexibility, 1.0 / 9.0, 1e-15);
    const auto d = segment_subepochs(11, 4);  // remainder 1 joins the last window
    EXPECT_EQ(d.count, 3u);
    EXPECT_EQ(d.windows.back().first, 6u);
    EXPECT_EQ(d.windows.back().second, 10u);
    const auto e = segment_subepochs(3, 5);
    EXPECT_TRUE(e.clamped);
    EXPECT_EQ(e.count, 1u);
}

TEST(SubEpochs, WholeWindowMatchesEpochCalibration) {
    const BucketPartition part(0.0, 10.0, 650);
    const auto path = make_path({2500, 2512, 2490, 2531, 2507}, {0, 1e5, 2e5, 1.5e5, 3e4});
    const Epoch e{0, 0, 4, 251, 240, false};
    CalibrationConfig cfg;
    cfg.window_n = 5;
    const auto subs = calibrate_subepochs(path, e, cfg, part);
    const auto whole = calibrate_epoch(path, e, cfg, part);
    ASSERT_EQ(subs.size(), 1u);
    EXPECT_EQ(subs[0].params.mu, whole.params.mu);
    EXPECT_EQ(subs[0].params.sigma, whole.params.sigma);
    EXPECT_EQ(subs[0].model_fee, whole.model_fee);
}

TEST(SubEpochs, HistoricalFeesAdd) {
    const BucketPartition part(0.0, 10.0, 650);
    const auto path = make_path({2500, 2512, 2490}, {0, 1e5, 2e5});
    const Epoch e{0, 0, 2, 251, 120, false};
    CalibrationConfig cfg;
    cfg.window_n = 2;
    const auto subs = calibrate_subepochs(path, e, cfg, part);
    ASSERT_EQ(subs.size(), 2u);
    EXPECT_DOUBLE_EQ(subs[0].hist_fee + subs[1].hist_fee, epoch_hist_fee(path, e, cfg.fee_tier));
    EXPECT_EQ(subs[0].start_idx, 0u);
    EXPECT_EQ(subs[1].end_idx, 2u);
}
