// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lpopt/backtest.hpp"

using namespace lpopt;

namespace {

// pinned tolerances and budgets
constexpr double kRelTol = 1e-9;
constexpr std::size_t kInvariantInstances = 20000;
constexpr double kInvariantBudgetS = 60.0;
constexpr std::size_t kOraclePaths = 2000;
constexpr std::size_t kEpochPaths = 1000;
constexpr std::size_t kCalibrationTrials = 200;
constexpr double kCalibrationHitRate = 0.95;
constexpr double kCalibrationBudgetS = 120.0;
constexpr std::size_t kBoundInstances = 500;
constexpr double kSoftmaxSumTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradFloor = 1e-8;  // denominators below this compare absolutely
constexpr double kRegimeMseRatio = 0.5;
constexpr double kPredictorBudgetS = 300.0;
constexpr double kEnsembleSlack = 1e-6;
constexpr std::size_t kEnsembleSets = 100;
constexpr std::size_t kMetricSeries = 100;
constexpr double kMetricTol = 1e-12;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel_err(double got, double want, double scale = 0.0) {
    const double denom = std::max({std::abs(want), std::abs(got), scale});
    return denom == 0.0 ? 0.0 : std::abs(got - want) / denom;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- invariant suite --------------------------------------------------------------------------------

Outcome invariants() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    auto track = [&](double e) { worst = std::max(worst, e); };
    for (std::size_t t = 0; t < kInvariantInstances; ++t) {
        const double a = std::exp(-3.0 + 12.0 * u(rng));
        const double b = a * (1.0 + 1e-3 + 2.0 * u(rng));
        const Bucket bk{a, b};
        const double L = std::exp(-5.0 + 20.0 * u(rng));
        const double sa = std::sqrt(a), sb = std::sqrt(b);
        const double xs = L * (1.0 / sa - 1.0 / sb), ys = L * (sb - sa);  // reserve scales
        auto draw_price = [&] {
            const double v = u(rng);
            if (v < 0.15) return a * (0.2 + 0.8 * u(rng));
            if (v > 0.85) return b * (1.0 + 3.0 * u(rng));
            return a + (b - a) * u(rng);
        };
        const double p = draw_price(), p1 = draw_price(), p2 = draw_price();

        // virtual-reserve invariant (x + L/√b)(y + L√a) = L²
        const auto st = liquidity_state(L, p, bk);
        track(rel_err((st.x + L / sb) * (st.y + L * sa), L * L));

        // capital round trip and W = y + p·x
        const double w = std::exp(-2.0 + 16.0 * u(rng));
        const auto pos = liquidity_from_capital(w, p, bk);
        track(rel_err(pos.reserves.y + p * pos.reserves.x, w));
        const auto back = liquidity_state(pos.liquidity, p, bk);
        track(rel_err(back.value(p), w));

        // continuity at the edges: the interior closed form evaluated at √a and √b
        const auto at_a = liquidity_state(L, a, bk), at_b = liquidity_state(L, b, bk);
        track(rel_err(at_a.x, L * (1.0 / sa - 1.0 / sb), xs));
        track(std::abs(at_a.y) / ys);
        track(std::abs(at_b.x) / xs);
        track(rel_err(at_b.y, L * (sb - sa), ys));
        const auto just_in = liquidity_state(L, std::nextafter(a, b), bk);
        track(rel_err(just_in.x, at_a.x, xs));
        track(std::abs(just_in.y - at_a.y) / ys);

        // path independence and round trip
        const auto d01 = delta_reserves(L, p, p1, bk), d12 = delta_reserves(L, p1, p2, bk), d02 = delta_reserves(L, p, p2, bk);
        track(std::abs(d01.x + d12.x - d02.x) / xs);
        track(std::abs(d01.y + d12.y - d02.y) / ys);
        const auto d10 = delta_reserves(L, p1, p, bk);
        track(std::abs(d01.x + d10.x) / xs);
        track(std::abs(d01.y + d10.y) / ys);

        // homogeneity in L
        const double c = std::exp(-4.0 + 8.0 * u(rng));
        const auto sc = liquidity_state(c * L, p, bk);
        track(rel_err(sc.x, c * st.x, c * xs));
        track(rel_err(sc.y, c * st.y, c * ys));
        track(rel_err(liquidity_from_capital(c * w, p, bk).liquidity, c * pos.liquidity));
    }
    return {worst <= kRelTol, fmt("%zu instances, max rel err %.2e (tol %.0e)", kInvariantInstances, worst, kRelTol)};
}

// ---- oracle equivalence -----------------------------------------------------------------------------

/// Per-swap, per-bucket integration over the clipped sub-interval each swap sweeps through a bucket.
ReserveState oracle_inflow_per_l(double from, double to, double a, double b) {
    const double lo = std::clamp(std::min(from, to), a, b), hi = std::clamp(std::max(from, to), a, b);
    if (!(hi > lo)) return {};
    if (to > from) return {0.0, std::sqrt(hi) - std::sqrt(lo)};
    return {1.0 / std::sqrt(lo) - 1.0 / std::sqrt(hi), 0.0};
}

/// Liquidity bought by capital w in [a, b] at price p, from the value of one unit of liquidity.
double oracle_liquidity(double w, double p, double a, double b) {
    const double sa = std::sqrt(a), sb = std::sqrt(b);
    double unit = 0.0;
    if (p <= a)
        unit = p * (1.0 / sa - 1.0 / sb);
    else if (p >= b)
        unit = sb - sa;
    else
        unit = p * (1.0 / std::sqrt(p) - 1.0 / sb) + (std::sqrt(p) - sa);
    return w / unit;
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_pool = 0.0, worst_lp = 0.0;
    for (std::size_t t = 0; t < kOraclePaths; ++t) {
        const std::size_t tau = static_cast<std::size_t>(rng() % 5);
        const std::size_t n_buckets = std::max<std::size_t>(2 * tau + 1, 1 + rng() % 10);
        const double lower = 0.5 + 4.5 * u(rng), width = 0.2 + 2.8 * u(rng);
        const BucketPartition part(lower, width, n_buckets);
        const std::size_t swaps = 2 + rng() % 49;
        std::vector<double> prices;
        for (std::size_t i = 0; i < swaps; ++i)
            prices.push_back(lower + width * n_buckets * (0.001 + 0.998 * u(rng)));
        // the LP opens on a bucket whose support fits the partition
        const std::size_t m = tau + 1 + static_cast<std::size_t>(rng() % (n_buckets - 2 * tau));
        prices[0] = part.bucket_lower(m) + width * (0.001 + 0.998 * u(rng));
        const double close = prices.back();
        const double gamma = 0.0005 + 0.01 * u(rng);
        LiquidityProfile pool(n_buckets);
        for (auto& v : pool.values) v = std::exp(6.0 * u(rng));

        // pool fees
        ReserveState want;
        for (std::size_t q = 1; q < prices.size(); ++q)
            for (std::size_t n = 1; n <= n_buckets; ++n) {
                const auto in = oracle_inflow_per_l(prices[q - 1], prices[q], part.bucket_lower(n), part.bucket_lower(n + 1));
                want.x += gamma * pool.at_bucket(n) * in.x;
                want.y += gamma * pool.at_bucket(n) * in.y;
            }
        const auto got = simulate_pool_fees(pool, prices, part, gamma, close);
        worst_pool = std::max(worst_pool, rel_err(got.value, close * want.x + want.y));

        // LP fees with uniform α and capped shares
        const double capital = std::exp(2.0 + 8.0 * u(rng));
        ReserveState lp_want;
        for (std::size_t n = m - tau; n <= m + tau; ++n) {
            const double a = part.bucket_lower(n), b = part.bucket_lower(n + 1);
            const double l_lp = oracle_liquidity(capital / static_cast<double>(2 * tau + 1), prices[0], a, b);
            const double r = std::min(l_lp / pool.at_bucket(n), 1.0);
            for (std::size_t q = 1; q < prices.size(); ++q) {
                const auto in = oracle_inflow_per_l(prices[q - 1], prices[q], a, b);
                lp_want.x += gamma * r * pool.at_bucket(n) * in.x;
                lp_want.y += gamma * r * pool.at_bucket(n) * in.y;
            }
        }
        const auto alloc = make_allocation(capital, uniform_reduced(tau), StrategyShape::plain(tau), m, n_buckets);
        const auto lp = lp_profile(alloc, prices[0], part);
        const auto approach = RewardApproach::ShareOfHistorical;
        const auto lp_got = lp_fees(lp_shares(lp, pool, approach), volume_profile(lp, pool, approach), prices, part, gamma, close);
        worst_lp = std::max(worst_lp, rel_err(lp_got.value, close * lp_want.x + lp_want.y));
    }
    const bool ok = worst_pool <= kRelTol && worst_lp <= kRelTol;
    return {ok, fmt("%zu paths, pool fee max rel err %.2e, uniform LP fee max rel err %.2e (tol %.0e)", kOraclePaths,
                    worst_pool, worst_lp, kRelTol)};
}

// ---- epoching ---------------------------------------------------------------------------------------

Outcome epoching() {
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const BucketPartition part(0.0, 1.0, 400);
    std::size_t containment_bad = 0, tau_bad = 0, eta_bad = 0, tau_checks = 0, eta_checks = 0;
    for (std::size_t t = 0; t < kEpochPaths; ++t) {
        std::normal_distribution<double> step(0.0, 0.2 + 1.5 * u(rng));
        std::vector<SwapEvent> ev;
        double p = 200.0 + u(rng);
        for (int i = 0; i < 400; ++i) {
            ev.push_back({static_cast<Timestamp>(i) * 60, p, 1.0});
            p = std::clamp(p + step(rng), 60.0, 340.0);
        }
        const PricePath path(ev);
        std::vector<std::size_t> k_plain;
        for (std::size_t tau = 0; tau <= 6; ++tau) {
            const auto set = partition_epochs(path, part, StrategyShape::plain(tau));
            k_plain.push_back(set.count());
            bool ok = set[0].start_idx == 0 && set.epochs.back().end_idx == path.last_index();
            for (std::size_t k = 0; k < set.count() && ok; ++k) {
                const auto& e = set[k];
                const auto sup = liquid_support(StrategyShape::plain(tau), e.ref_bucket, part.size());
                if (k > 0 && set[k - 1].end_idx != e.start_idx) ok = false;
                if (e.ref_bucket != part.bucket_of(path.price(e.start_idx))) ok = false;
                const std::size_t last_inside = k + 1 < set.count() ? e.end_idx - 1 : e.end_idx;
                for (std::size_t j = e.start_idx; j <= last_inside && ok; ++j)
                    if (!sup.covers(part.bucket_of(path.price(j)))) ok = false;
                if (k + 1 < set.count() && sup.covers(part.bucket_of(path.price(e.end_idx)))) ok = false;
            }
            containment_bad += ok ? 0 : 1;
            if (tau > 0) {
                ++tau_checks;
                if (k_plain[tau] > k_plain[tau - 1]) ++tau_bad;
            }
            for (std::size_t eta = 1; eta <= 2; ++eta)
                for (const StrategyShape s : {StrategyShape{tau, eta, eta}, StrategyShape{tau, eta, 0}, StrategyShape{tau, 0, eta}}) {
                    ++eta_checks;
                    if (partition_epochs(path, part, s).count() > k_plain[tau]) ++eta_bad;
                }
        }
    }
    const bool ok = containment_bad == 0 && tau_bad == 0 && eta_bad == 0;
    return {ok, fmt("%zu paths: containment/boundary violations %zu; K(tau+1) > K(tau) in %zu of %zu comparisons; "
                    "K(tau,eta) > K(tau,0) in %zu of %zu comparisons",
                    kEpochPaths, containment_bad, tau_bad, tau_checks, eta_bad, eta_checks)};
}

// ---- calibration loop -------------------------------------------------------------------------------

std::vector<double> free_walk(std::mt19937_64& rng, std::size_t n, double p0, double sigma) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out{p0};
    while (out.size() < n) out.push_back(out.back() * std::exp(sigma * z(rng)));
    return out;
}


Outcome calibration_loop() {
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const BucketPartition part(0.0, 10.0, 650);
    CalibrationConfig cfg;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < kCalibrationTrials; ++t) {
        const double step_sigma = 0.0005 + 0.003 * u(rng);
        const std::size_t n = 20 + rng() % 200;
        const auto raw = free_walk(rng, n, 2500.0, step_sigma);
        const GaussianParams truth{cfg.mu_grid.min + (cfg.mu_grid.max - cfg.mu_grid.min) * u(rng),
                                   std::exp(std::log(cfg.sigma_grid.min) +
                                            (std::log(cfg.sigma_grid.max) - std::log(cfg.sigma_grid.min)) * u(rng))};
        const auto stats = window_stats(raw, part.width());
        const auto prof = pool_profile(gaussian_weights(truth, part, stats.anchor, stats.scale, cfg.shape), cfg.tvl, raw[0], part);
        const double fee = simulate_pool_fees(prof, raw, part, cfg.fee_tier, raw.back()).value;
        // historical volume spread so that Γ·Σ volume reproduces the synthetic fee
        std::vector<SwapEvent> ev;
        for (std::size_t i = 0; i < raw.size(); ++i)
            ev.push_back({static_cast<Timestamp>(i) * 60, raw[i], i ? fee / cfg.fee_tier / static_cast<double>(n - 1) : 0.0});
        const PricePath path(ev);
        const Epoch e{0, 0, path.last_index(), part.bucket_of(raw[0]), 0, false};
        const auto r = calibrate_epoch(path, e, cfg, part);
        if (fee > 0.0 && std::abs(r.model_fee - fee) / fee <= cfg.tolerance) ++hits;
    }
    const double rate = static_cast<double>(hits) / static_cast<double>(kCalibrationTrials);
    return {rate >= kCalibrationHitRate,
            fmt("%zu of %zu trials within %.0f%% (need %.0f%%)", hits, kCalibrationTrials, 100.0 * cfg.tolerance,
                100.0 * kCalibrationHitRate)};
}

// ---- sub-epoch algebra ------------------------------------------------------------------------------

Outcome subepoch_algebra() {
    std::size_t bad_plans = 0, plans = 0;
    for (std::size_t q = 2; q <= 200; ++q)
        for (std::size_t n = 2; n <= q; ++n) {
            ++plans;
            const auto plan = segment_subepochs(q, n);
            bool ok = plan.count == (q - 1) / (n - 1) && plan.windows.size() == plan.count &&
                      plan.windows.front().first == 0 && plan.windows.back().second == q - 1;
            for (std::size_t j = 1; j < plan.windows.size(); ++j) ok = ok && plan.windows[j].first == plan.windows[j - 1].second;
            bad_plans += ok ? 0 : 1;
        }
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const BucketPartition part(0.0, 1.0, 60);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t q = 2 + rng() % 150, n = 2 + rng() % (q - 1);
        std::vector<double> prices;
        double p = 30.0;
        for (std::size_t i = 0; i < q; ++i) {
            prices.push_back(p);
            p = std::clamp(p + 1.5 * (u(rng) - 0.5), 1.0, 59.0);
        }
        LiquidityProfile prof(60);
        for (auto& v : prof.values) v = std::exp(5.0 * u(rng));
        const auto whole = simulate_pool_fees(prof, prices, part, 0.003, prices.back());
        ReserveState sum;
        for (const auto& [a, b] : segment_subepochs(q, n).windows) {
            const std::vector<double> slice(prices.begin() + static_cast<long>(a), prices.begin() + static_cast<long>(b) + 1);
            sum += simulate_pool_fees(prof, slice, part, 0.003, prices.back()).tokens;
        }
        worst = std::max({worst, rel_err(sum.x, whole.tokens.x), rel_err(sum.y, whole.tokens.y)});
    }
    return {bad_plans == 0 && worst <= kRelTol,
            fmt("%zu (q, n) plans, %zu wrong; fixed-profile fee sums max rel err %.2e", plans, bad_plans, worst)};
}

// ---- share-of-historical bound ----------------------------------------------------------------------

Outcome share_bound() {
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const BucketPartition part(0.0, 1.0, 40);
    std::size_t violations = 0;
    double worst_eq = 0.0;
    for (std::size_t t = 0; t < kBoundInstances; ++t) {
        std::vector<SwapEvent> ev;
        double p = 20.0 + u(rng) * 0.99;
        const std::size_t n = 3 + rng() % 40;
        for (std::size_t i = 0; i < n; ++i) {
            ev.push_back({static_cast<Timestamp>(i) * 60, p, 1e3 * u(rng)});
            p = std::clamp(p + 0.8 * (u(rng) - 0.5), 15.01, 25.99);
        }
        const PricePath path(ev);
        const Epoch e{0, 0, path.last_index(), part.bucket_of(ev[0].price_after), 0, false};
        CalibrationConfig cfg;
        cfg.tvl = std::exp(4.0 + 8.0 * u(rng));
        cfg.window_n = 2 + rng() % 6;
        cfg.mu_grid.steps = cfg.sigma_grid.steps = 21;
        const auto cals = calibrate_subepochs(path, e, cfg, part);
        const EpochRewardModel model(path, e, cals, part, cfg.fee_tier);
        const auto prices = epoch_prices(path, e);
        ReserveState pool_tokens;
        for (const auto& c : cals) {
            const std::vector<double> slice(prices.begin() + static_cast<long>(c.start_idx),
                                            prices.begin() + static_cast<long>(c.end_idx) + 1);
            pool_tokens += simulate_pool_fees(c.profile, slice, part, cfg.fee_tier, prices.back()).tokens;
        }
        const double f_pool = mark(pool_tokens, prices.back());
        const std::size_t tau = rng() % 4;
        const auto lp = lp_profile(make_allocation(std::exp(2.0 + 14.0 * u(rng)), sample_strategies({1, rng(), tau})[0],
                                                   StrategyShape::plain(tau), e.ref_bucket, part.size()),
                                   prices[0], part);
        const double f_lp = model.lp_fee(lp, RewardApproach::ShareOfHistorical).value;
        if (f_lp > f_pool * (1.0 + kRelTol)) ++violations;
        // an LP holding the whole pool earns the whole pool's fees
        ReserveState full;
        for (std::size_t j = 0; j < cals.size(); ++j) {
            full += model.window_fee_tokens(j, cals[j].profile, RewardApproach::ShareOfHistorical);
        }
        worst_eq = std::max(worst_eq, rel_err(mark(full, prices.back()), f_pool));
    }
    return {violations == 0 && worst_eq <= kRelTol,
            fmt("%zu epochs: %zu bound violations; L_LP = L_pool max rel err %.2e", kBoundInstances, violations, worst_eq)};
}

// ---- predictor --------------------------------------------------------------------------------------

Outcome predictor_sanity() {
    std::mt19937_64 rng(7007);
    std::normal_distribution<double> z(0.0, 1.0);
    const std::size_t tau = 5, rows = 600;
    Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(kFeatureDim));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = z(rng);
    Vector dir(static_cast<Eigen::Index>(kFeatureDim));
    for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = z(rng);
    const auto uni = uniform_reduced(tau);
    ReducedWeights conc{0.75, 0.05, 0.05, 0.05, 0.05, 0.05};
    Matrix y(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(tau + 1));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto& t = x.row(i).dot(dir) > 0.0 ? conc : uni;
        for (std::size_t k = 0; k <= tau; ++k) y(i, static_cast<Eigen::Index>(k)) = t[k];
    }
    const auto split = split_dataset(x, y);
    const auto model = train_mlp(split, MlpConfig{}, 17);
    const Matrix pred = predict(model, split.x_test);
    double worst_sum = 0.0;
    for (Eigen::Index i = 0; i < pred.rows(); ++i) worst_sum = std::max(worst_sum, std::abs(pred.row(i).sum() - 1.0));
    const RowVector u_row = Eigen::Map<const RowVector>(uni.data(), static_cast<Eigen::Index>(uni.size()));
    const double mse = Mlp::mse(pred, split.y_test);
    const double base = Mlp::mse(u_row.replicate(split.y_test.rows(), 1), split.y_test);

    // central differences on a sample of parameters of the production architecture
    Mlp net(kFeatureDim, MlpConfig{}.hidden, tau + 1, 23);
    const Matrix gx = model.standardizer.transform(split.x_train.topRows(16));
    const Matrix gy = split.y_train.topRows(16);
    std::vector<DenseLayer> grad, scratch;
    net.loss_and_gradient(gx, gy, grad);
    double worst_grad = 0.0;
    const double h = 1e-6;
    for (int s = 0; s < 400; ++s) {
        const std::size_t l = rng() % net.layers().size();
        auto& layer = net.layers()[l];
        const bool bias = rng() % 4 == 0;
        double* slot = bias ? &layer.b(static_cast<Eigen::Index>(rng() % static_cast<std::size_t>(layer.b.size())))
                            : layer.w.data() + rng() % static_cast<std::size_t>(layer.w.size());
        const double ana = bias ? grad[l].b.data()[slot - layer.b.data()] : grad[l].w.data()[slot - layer.w.data()];
        const double keep = *slot;
        *slot = keep + h;
        const double up = net.loss_and_gradient(gx, gy, scratch);
        *slot = keep - h;
        const double dn = net.loss_and_gradient(gx, gy, scratch);
        *slot = keep;
        const double num = (up - dn) / (2.0 * h);
        worst_grad = std::max(worst_grad, std::abs(num - ana) / std::max(std::abs(num) + std::abs(ana), kGradFloor));
    }
    const bool ok = worst_sum <= kSoftmaxSumTol && worst_grad <= kGradRelTol && mse <= kRegimeMseRatio * base;
    return {ok, fmt("row-sum err %.1e; gradient max rel err %.1e; two-regime test MSE %.3e vs uniform %.3e (ratio %.2f)",
                    worst_sum, worst_grad, mse, base, mse / base)};
}

// ---- ensemble ---------------------------------------------------------------------------------------

Outcome ensemble_optimality() {
    std::mt19937_64 rng(8008);
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto simplex_rows = [&](Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = e(rng);
            m.row(i) /= m.row(i).sum();
        }
        return m;
    };
    double worst = -1.0;
    for (std::size_t t = 0; t < kEnsembleSets; ++t) {
        const std::size_t members = 2 + rng() % 2;
        const Matrix y = simplex_rows(40, 6);
        std::vector<Matrix> preds;
        for (std::size_t j = 0; j < members; ++j) {
            const double mix = u(rng);
            preds.push_back(mix * y + (1.0 - mix) * simplex_rows(40, 6));
        }
        const auto fit = fit_ensemble(preds, y, 0.001);
        for (std::size_t j = 0; j < members; ++j) {
            std::vector<double> one(members, 0.0);
            one[j] = 1.0;
            worst = std::max(worst, fit.objective - ensemble_objective(preds, y, one, 0.001));
        }
    }
    return {worst <= kEnsembleSlack, fmt("%zu member sets; max (ensemble - best single) objective %.2e (slack %.0e)",
                                         kEnsembleSets, worst, kEnsembleSlack)};
}

// ---- metrics ----------------------------------------------------------------------------------------

Outcome metrics_oracles() {
    std::mt19937_64 rng(9009);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t sharpe_mismatch = 0;
    for (std::size_t t = 0; t < kMetricSeries; ++t) {
        std::vector<CapitalPoint> s;
        Timestamp ts = 1'700'000'000 + static_cast<Timestamp>(u(rng) * 86400);
        double c = 1000.0;
        const std::size_t n = 5 + rng() % 300;
        for (std::size_t i = 0; i < n; ++i) {
            s.push_back({ts, c});
            ts += 600 + static_cast<Timestamp>(u(rng) * 3 * 86400);
            c *= std::exp(0.05 * (u(rng) - 0.5));
        }
        const auto m = compute_metrics(s, 1000.0);
        double mdd = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            for (std::size_t i = 0; i <= j; ++i) mdd = std::min(mdd, s[j].capital / s[i].capital - 1.0);
        worst = std::max(worst, std::abs(m.max_drawdown - mdd));
        const double days = static_cast<double>(s.back().timestamp - s.front().timestamp) / 86400.0;
        worst = std::max(worst, rel_err(m.cagr, std::pow(s.back().capital / 1000.0, 365.0 / days) - 1.0));
        // day closes via a map keyed by UTC day, forward-filled
        std::map<Timestamp, double> last_by_day;
        for (const auto& p : s) last_by_day[p.timestamp / 86400] = p.capital;
        std::vector<double> closes;
        double carry = s.front().capital;
        for (Timestamp d = s.front().timestamp / 86400; d <= s.back().timestamp / 86400; ++d) {
            if (auto it = last_by_day.find(d); it != last_by_day.end()) carry = it->second;
            closes.push_back(carry);
        }
        std::vector<double> r;
        double prev = 1000.0;
        for (double v : closes) {
            r.push_back(v / prev - 1.0);
            prev = v;
        }
        double mean = 0.0, ss = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(r.size());
        for (double v : r) ss += (v - mean) * (v - mean);
        if (r.size() >= 2 && ss > 0.0) {
            const double want = mean / std::sqrt(ss / static_cast<double>(r.size() - 1)) * std::sqrt(365.0);
            if (!m.sharpe) ++sharpe_mismatch;
            else worst = std::max(worst, rel_err(*m.sharpe, want));
        } else if (m.sharpe) {
            ++sharpe_mismatch;
        }
    }
    std::vector<CapitalPoint> mono;
    for (int i = 0; i < 50; ++i) mono.push_back({i * 86400, 100.0 + i * i});
    const double mono_mdd = compute_metrics(mono, 100.0).max_drawdown;
    const bool ok = worst <= kMetricTol && sharpe_mismatch == 0 && mono_mdd == 0.0;
    return {ok, fmt("%zu series; max err %.2e; Sharpe presence mismatches %zu; monotone MDD %g", kMetricSeries, worst,
                    sharpe_mismatch, mono_mdd)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> criteria{
        {"invariant-suite", invariants, kInvariantBudgetS},
        {"oracle-equivalence", oracle_equivalence, 0.0},
        {"epoching", epoching, 0.0},
        {"calibration-loop", calibration_loop, kCalibrationBudgetS},
        {"subepoch-algebra", subepoch_algebra, 0.0},
        {"share-of-historical-bound", share_bound, 0.0},
        {"predictor-sanity", predictor_sanity, kPredictorBudgetS},
        {"ensemble-optimality", ensemble_optimality, 0.0},
        {"metrics", metrics_oracles, 0.0},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s budget", c.budget_s);
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %-26s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("NOT-RUN %-23s needs public swap extracts; run acceptance_data with LPOPT_OOT_DATA_DIR set\n",
                "data-reproduction");
    return failures == 0 ? 0 : 1;
}
