#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "lpopt/clmm.hpp"
#include "lpopt/epochs.hpp"
#include "lpopt/error.hpp"
#include "lpopt/fee_model.hpp"
#include "lpopt/market_data.hpp"

namespace lpopt {

struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct Grid {
    double min = 0.0;
    double max = 0.0;
    std::size_t steps = 1;
    bool geometric = false;

    double operator[](std::size_t i) const {
        if (steps <= 1) return min;
        if (i + 1 == steps) return max;
        const double k = static_cast<double>(i), last = static_cast<double>(steps - 1);
        return geometric ? min * std::pow(max / min, k / last) : min + (max - min) * k / last;
    }
    std::size_t size() const noexcept { return steps; }
};

/// How a Gaussian is turned into bucket weights: density at the bucket center, or mass over the bucket.
enum class ProfileShape { Density, IntegratedMass };

struct CalibrationConfig {
    Grid mu_grid{-3.0, 3.0, 61, false};
    Grid sigma_grid{std::sqrt(0.01), std::sqrt(10.0), 61, true};
    double tolerance = 0.05;
    double tvl = 80e6;  // Σ, numéraire
    double fee_tier = 0.003;
    std::size_t window_n = 2;
    bool lrf_enabled = false;
    ProfileShape shape = ProfileShape::Density;

    void validate() const {
        require(tolerance > 0.0, Errc::InvalidArgument, "tolerance must be positive");
        require(tvl > 0.0, Errc::InvalidArgument, "TVL must be positive");
        require(window_n >= 2, Errc::InvalidArgument, "sub-epoch window must hold at least two prices");
        require(fee_tier > 0.0 && fee_tier < 1.0, Errc::InvalidArgument, "fee tier must lie in (0, 1)");
        require(mu_grid.steps >= 1 && sigma_grid.steps >= 1, Errc::InvalidArgument, "grids must be non-empty");
        require(sigma_grid.min > 0.0 && sigma_grid.max >= sigma_grid.min && mu_grid.max >= mu_grid.min,
                Errc::InvalidArgument, "grid bounds are inconsistent");
    }
};

struct CalibrationResult {
    std::size_t start_idx = 0;  // global path indices of the calibrated window
    std::size_t end_idx = 0;
    GaussianParams params;
    LiquidityProfile profile;
    double model_fee = 0.0;
    double hist_fee = 0.0;
    double rel_error = 0.0;
    bool best_effort = false;  // no grid pair met the tolerance
    bool lrf_flag = false;     // μ* sits at the grid minimum (LRF enabled)
};

inline constexpr double kWeightFloor = 1e-12;

/// Mean and standardization scale of a price window; the scale falls back to the bucket width.
struct WindowStats {
    double anchor = 0.0;
    double scale = 1.0;
};

inline WindowStats window_stats(std::span<const double> prices, double bucket_width) {
    require(!prices.empty(), Errc::EmptySeries, "window is empty");
    const double n = static_cast<double>(prices.size());
    const double mean = std::accumulate(prices.begin(), prices.end(), 0.0) / n;
    double ss = 0.0;
    for (double p : prices) ss += (p - mean) * (p - mean);
    const double sd = std::sqrt(ss / n);
    return {mean, sd < bucket_width ? bucket_width : sd};
}

namespace detail {

/// Unnormalized Gaussian weights: exact inside the window of buckets where the curve exceeds
/// the floor, the floor elsewhere. Returns the normalizing total; raw[k] holds bucket first+k.
struct RawWeights {
    std::size_t first = 1;
    std::size_t last = 0;
    std::vector<double> raw;
    double total = 0.0;
    double floor_total = 0.0;

    double at(std::size_t bucket) const noexcept {
        return (bucket >= first && bucket <= last) ? raw[bucket - first] : kWeightFloor;
    }
};

inline void raw_gaussian(RawWeights& out, const GaussianParams& g, const BucketPartition& part, double anchor,
                         double scale, ProfileShape shape) {
    const std::size_t n = part.size();
    // exp(-z²/2) < 1e-12 beyond |z| = sqrt(2·ln 1e12) ≈ 7.43; widen a little for the mass variant
    const double reach = 7.5 * g.sigma * scale + part.width();
    const double lo_price = anchor + g.mu * scale - reach;
    const double hi_price = anchor + g.mu * scale + reach;
    const double w = part.width();
    auto clamp_index = [&](double p) {
        const double k = std::floor((p - part.lower_bound()) / w) + 1.0;
        if (k < 1.0) return std::size_t{1};
        if (k > static_cast<double>(n)) return n;
        return static_cast<std::size_t>(k);
    };
    out.raw.clear();
    if (hi_price < part.lower_bound() || lo_price > part.upper_bound()) {
        out.first = 1;
        out.last = 0;
    } else {
        out.first = clamp_index(lo_price);
        out.last = clamp_index(hi_price);
    }
    double sum = 0.0;
    for (std::size_t i = out.first; i <= out.last && out.last >= out.first; ++i) {
        double v;
        if (shape == ProfileShape::Density) {
            const double z = ((part.center(i) - anchor) / scale - g.mu) / g.sigma;
            v = std::exp(-0.5 * z * z);
        } else {
            const double z0 = ((part.bucket_lower(i) - anchor) / scale - g.mu) / g.sigma;
            const double z1 = ((part.bucket_lower(i + 1) - anchor) / scale - g.mu) / g.sigma;
            v = 0.5 * (std::erfc(z0 / std::sqrt(2.0)) - std::erfc(z1 / std::sqrt(2.0)));
        }
        require(std::isfinite(v), Errc::NonfiniteWeight, "Gaussian weight is not finite");
        v = std::max(v, kWeightFloor);
        out.raw.push_back(v);
        sum += v;
    }
    const std::size_t inside = out.last >= out.first ? out.last - out.first + 1 : 0;
    out.floor_total = kWeightFloor * static_cast<double>(n - inside);
    out.total = sum + out.floor_total;
    require(std::isfinite(out.total) && out.total > 0.0, Errc::NonfiniteWeight, "Gaussian weights do not normalize");
}

}  // namespace detail

/// Normalized bucket weights α_n ∝ exp(−(u_n − μ)²/(2σ²)), u_n = (c_n − anchor)/scale, floored at 1e-12.
inline std::vector<double> gaussian_weights(const GaussianParams& g, const BucketPartition& part, double anchor,
                                            double scale, ProfileShape shape = ProfileShape::Density) {
    require(scale > 0.0 && g.sigma > 0.0, Errc::InvalidArgument, "scale and sigma must be positive");
    detail::RawWeights rw;
    detail::raw_gaussian(rw, g, part, anchor, scale, shape);
    std::vector<double> alpha(part.size());
    for (std::size_t i = 1; i <= part.size(); ++i) alpha[i - 1] = rw.at(i) / rw.total;
    return alpha;
}

/// Capital w_n = α_n·Σ placed at the opening price, per bucket.
inline LiquidityProfile pool_profile(std::span<const double> weights, double tvl, double open_price,
                                     const BucketPartition& part) {
    require(weights.size() == part.size(), Errc::ShapeMismatch, "weight vector length differs from partition");
    LiquidityProfile prof(part.size());
    for (std::size_t i = 1; i <= part.size(); ++i)
        prof.at_bucket(i) = liquidity_from_capital(weights[i - 1] * tvl, open_price, part.bucket(i)).liquidity;
    return prof;
}

/// Historical fee of a window: Γ × volumes of the swaps that move the price inside (start, end].
inline double window_hist_fee(const PricePath& path, std::size_t start, std::size_t end, double fee_tier) {
    double v = 0.0;
    for (std::size_t j = start + 1; j <= end; ++j) v += path[j].volume;
    return fee_tier * v;
}

/// Prices of an epoch; a degenerate epoch repeats its single price.
inline std::vector<double> epoch_prices(const PricePath& path, const Epoch& e) {
    if (e.degenerate) return {path.price(e.start_idx), path.price(e.start_idx)};
    auto all = path.prices();
    return {all.begin() + static_cast<std::ptrdiff_t>(e.start_idx),
            all.begin() + static_cast<std::ptrdiff_t>(e.end_idx) + 1};
}

inline double epoch_hist_fee(const PricePath& path, const Epoch& e, double fee_tier) {
    return e.degenerate ? 0.0 : window_hist_fee(path, e.start_idx, e.end_idx, fee_tier);
}

/// Profile, model fee and flags of a window for chosen parameters. Also rebuilds stored calibrations.
inline CalibrationResult finish_calibration(std::span<const double> prices, const GaussianParams& params,
                                            double hist_fee, bool best_effort, const CalibrationConfig& cfg,
                                            const BucketPartition& part) {
    require(!prices.empty(), Errc::EmptySeries, "calibration window is empty");
    const auto stats = window_stats(prices, part.width());
    CalibrationResult res;
    res.params = params;
    res.hist_fee = hist_fee;
    res.best_effort = best_effort;
    const auto alpha = gaussian_weights(params, part, stats.anchor, stats.scale, cfg.shape);
    res.profile = pool_profile(alpha, cfg.tvl, prices.front(), part);
    res.model_fee = simulate_pool_fees(res.profile, prices, part, cfg.fee_tier, prices.back()).value;
    if (hist_fee > 0.0) {
        res.rel_error = std::abs(res.model_fee - hist_fee) / hist_fee;
    } else {
        res.rel_error = 0.0;
        res.best_effort = res.model_fee > 0.0;
    }
    res.lrf_flag = cfg.lrf_enabled && params.mu == cfg.mu_grid.min;
    return res;
}

/// Grid sweep on one price window (μ outer ascending, σ inner ascending). Stops at the first pair
/// within tolerance; otherwise keeps the first global-minimum-error pair and flags best effort.
inline CalibrationResult calibrate_window(std::span<const double> prices, double hist_fee,
                                          const CalibrationConfig& cfg, const BucketPartition& part) {
    cfg.validate();
    require(hist_fee >= 0.0 && std::isfinite(hist_fee), Errc::InvalidArgument, "historical fee must be >= 0");
    require(!prices.empty(), Errc::EmptySeries, "calibration window is empty");
    const double open = prices.front();
    const double close = prices.back();
    const auto stats = window_stats(prices, part.width());
    const FeeWindow window(prices, part);

    // liquidity per unit capital at the opening price for the buckets the path touches
    std::vector<double> unit_liq;
    unit_liq.reserve(window.last_bucket() - window.first_bucket() + 1);
    std::vector<double> unit_fee;  // marked fee per unit capital
    for (std::size_t n = window.first_bucket(); n <= window.last_bucket(); ++n) {
        unit_liq.push_back(liquidity_from_capital(1.0, open, part.bucket(n)).liquidity);
        unit_fee.push_back(cfg.fee_tier * unit_liq.back() * mark(window.unit_inflow(n), close));
    }

    detail::RawWeights rw;
    auto model_fee_fast = [&](const GaussianParams& g) {
        detail::raw_gaussian(rw, g, part, stats.anchor, stats.scale, cfg.shape);
        double acc = 0.0;
        for (std::size_t n = window.first_bucket(); n <= window.last_bucket(); ++n)
            acc += rw.at(n) * unit_fee[n - window.first_bucket()];
        return cfg.tvl * acc / rw.total;
    };

    CalibrationResult res;
    res.hist_fee = hist_fee;
    if (hist_fee == 0.0) {
        res.params = {0.0, cfg.sigma_grid.max};
    } else {
        double best_err = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i = 0; i < cfg.mu_grid.size() && !found; ++i) {
            for (std::size_t j = 0; j < cfg.sigma_grid.size(); ++j) {
                const GaussianParams g{cfg.mu_grid[i], cfg.sigma_grid[j]};
                const double err = std::abs(model_fee_fast(g) - hist_fee) / hist_fee;
                if (err <= cfg.tolerance) {
                    res.params = g;
                    found = true;
                    break;
                }
                if (err < best_err) {
                    best_err = err;
                    res.params = g;
                }
            }
        }
        res.best_effort = !found;
    }

    return finish_calibration(prices, res.params, hist_fee, res.best_effort, cfg, part);
}

inline CalibrationResult calibrate_epoch(const PricePath& path, const Epoch& epoch, const CalibrationConfig& cfg,
                                         const BucketPartition& part) {
    const auto prices = epoch_prices(path, epoch);
    auto res = calibrate_window(prices, epoch_hist_fee(path, epoch, cfg.fee_tier), cfg, part);
    res.start_idx = epoch.start_idx;
    res.end_idx = epoch.end_idx;
    return res;
}

/// Overlapping windows of n prices inside an epoch of q prices; the remainder joins the last window.
struct SubEpochPlan {
    std::size_t count = 1;  // m
    std::vector<std::pair<std::size_t, std::size_t>> windows;  // local [first, last] indices
    double flexibility = 0.0;  // m / (q − 1)
    bool clamped = false;      // n exceeded q; the epoch is one window
};

inline SubEpochPlan segment_subepochs(std::size_t q, std::size_t n) {
    require(q >= 2 && n >= 2, Errc::InvalidArgument, "epoch size and window length must be >= 2");
    SubEpochPlan plan;
    if (n > q) {
        plan.count = 1;
        plan.clamped = true;
    } else {
        plan.count = (q - 1) / (n - 1);
    }
    for (std::size_t j = 0; j < plan.count; ++j) {
        const std::size_t first = j * (n - 1);
        const std::size_t last = (j + 1 == plan.count) ? q - 1 : (j + 1) * (n - 1);
        plan.windows.emplace_back(first, last);
    }
    plan.flexibility = static_cast<double>(plan.count) / static_cast<double>(q - 1);
    return plan;
}

/// Calibrates each window of `plan` over `prices` against its own historical fee.
inline std::vector<CalibrationResult> calibrate_subepochs(std::span<const double> prices,
                                                          std::span<const double> window_hist_fees,
                                                          const SubEpochPlan& plan, const CalibrationConfig& cfg,
                                                          const BucketPartition& part) {
    require(window_hist_fees.size() == plan.windows.size(), Errc::ShapeMismatch,
            "one historical fee per sub-epoch is required");
    std::vector<CalibrationResult> out;
    out.reserve(plan.windows.size());
    for (std::size_t j = 0; j < plan.windows.size(); ++j) {
        const auto [a, b] = plan.windows[j];
        auto res = calibrate_window(prices.subspan(a, b - a + 1), window_hist_fees[j], cfg, part);
        res.start_idx = a;
        res.end_idx = b;
        out.push_back(std::move(res));
    }
    return out;
}

/// Sub-epoch calibration of an epoch on a path, with window length cfg.window_n. Window indices in the
/// results are global path indices.
inline std::vector<CalibrationResult> calibrate_subepochs(const PricePath& path, const Epoch& epoch,
                                                          const CalibrationConfig& cfg, const BucketPartition& part) {
    const auto prices = epoch_prices(path, epoch);
    const auto plan = segment_subepochs(prices.size(), cfg.window_n);
    std::vector<double> fees;
    for (const auto& [a, b] : plan.windows)
        fees.push_back(epoch.degenerate ? 0.0
                                        : window_hist_fee(path, epoch.start_idx + a, epoch.start_idx + b, cfg.fee_tier));
    auto out = calibrate_subepochs(prices, fees, plan, cfg, part);
    for (auto& r : out) {
        r.start_idx = epoch.degenerate ? epoch.start_idx : epoch.start_idx + r.start_idx;
        r.end_idx = epoch.degenerate ? epoch.end_idx : epoch.start_idx + r.end_idx;
    }
    return out;
}

}  // namespace lpopt
