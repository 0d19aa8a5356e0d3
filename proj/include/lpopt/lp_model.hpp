#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpopt/calibrate.hpp"
#include "lpopt/clmm.hpp"
#include "lpopt/epochs.hpp"
#include "lpopt/error.hpp"
#include "lpopt/fee_model.hpp"

namespace lpopt {

enum class RewardApproach {
    PoolLevel,          // the whole pool's fee stream
    IsolatedLP,         // the LP is the only provider
    ShareOfHistorical,  // share of the calibrated pool liquidity, capped at 1
    Augmented,          // share of calibrated pool liquidity plus the LP's own
};

inline std::string_view to_string(RewardApproach a) noexcept {
    switch (a) {
        case RewardApproach::PoolLevel: return "pool-level";
        case RewardApproach::IsolatedLP: return "isolated";
        case RewardApproach::ShareOfHistorical: return "share-of-historical";
        case RewardApproach::Augmented: return "augmented";
    }
    return "unknown";
}

inline RewardApproach parse_approach(std::string_view s) {
    if (s == "pool-level") return RewardApproach::PoolLevel;
    if (s == "isolated") return RewardApproach::IsolatedLP;
    if (s == "share-of-historical") return RewardApproach::ShareOfHistorical;
    if (s == "augmented") return RewardApproach::Augmented;
    fail(Errc::InvalidArgument, "unknown reward approach '" + std::string(s) + "'");
}

inline constexpr double kSimplexTolerance = 1e-9;

/// Reduced τ-symmetric weights (α_M, 2α_{M+1}, …, 2α_{M+τ}).
using ReducedWeights = std::vector<double>;

inline ReducedWeights uniform_reduced(std::size_t tau) {
    const double unit = 1.0 / static_cast<double>(2 * tau + 1);
    ReducedWeights r(tau + 1, 2.0 * unit);
    r[0] = unit;
    return r;
}

inline void validate_reduced(std::span<const double> rho, std::size_t tau) {
    require(rho.size() == tau + 1, Errc::ShapeMismatch,
            "reduced weights need tau+1 = " + std::to_string(tau + 1) + " entries");
    double sum = 0.0;
    for (double v : rho) {
        require(std::isfinite(v) && v >= 0.0, Errc::InvalidArgument, "reduced weights must be non-negative");
        sum += v;
    }
    require(std::abs(sum - 1.0) <= kSimplexTolerance, Errc::InvalidArgument, "reduced weights must sum to 1");
}

struct LpAllocation {
    double capital = 0.0;
    std::size_t ref_bucket = 0;
    StrategyShape shape;
    std::vector<double> weights;  // α per bucket, element i-1 for bucket i
    ReducedWeights reduced;
};

/// α_M = ρ̂_0, α_{M±k} = ρ̂_k / 2; zero elsewhere, including the buffer buckets.
inline std::vector<double> expand_allocation(std::span<const double> rho, const StrategyShape& shape,
                                             std::size_t ref_bucket, std::size_t bucket_count) {
    validate_reduced(rho, shape.tau);
    liquid_support(shape, ref_bucket, bucket_count);
    std::vector<double> alpha(bucket_count, 0.0);
    alpha[ref_bucket - 1] = rho[0];
    for (std::size_t k = 1; k <= shape.tau; ++k) {
        alpha[ref_bucket - 1 - k] = 0.5 * rho[k];
        alpha[ref_bucket - 1 + k] = 0.5 * rho[k];
    }
    return alpha;
}

inline ReducedWeights reduce_allocation(std::span<const double> alpha, std::size_t tau, std::size_t ref_bucket) {
    require(ref_bucket > tau && ref_bucket + tau <= alpha.size(), Errc::SupportClipped,
            "support exceeds the weight vector");
    ReducedWeights r(tau + 1);
    r[0] = alpha[ref_bucket - 1];
    for (std::size_t k = 1; k <= tau; ++k) {
        const double lo = alpha[ref_bucket - 1 - k], hi = alpha[ref_bucket - 1 + k];
        require(std::abs(lo - hi) <= kSimplexTolerance, Errc::InvalidArgument, "allocation is not tau-symmetric");
        r[k] = lo + hi;
    }
    return r;
}

inline LpAllocation make_allocation(double capital, std::span<const double> rho, const StrategyShape& shape,
                                    std::size_t ref_bucket, std::size_t bucket_count) {
    require(capital >= 0.0 && std::isfinite(capital), Errc::InvalidArgument, "capital must be non-negative");
    LpAllocation a;
    a.capital = capital;
    a.ref_bucket = ref_bucket;
    a.shape = shape;
    a.weights = expand_allocation(rho, shape, ref_bucket, bucket_count);
    a.reduced.assign(rho.begin(), rho.end());
    return a;
}

/// Per-bucket liquidity of an allocation deployed at the opening price.
inline LiquidityProfile lp_profile(const LpAllocation& alloc, double open_price, const BucketPartition& part) {
    require(alloc.weights.size() == part.size(), Errc::ShapeMismatch, "allocation length differs from partition");
    LiquidityProfile prof(part.size());
    for (std::size_t i = 1; i <= part.size(); ++i) {
        const double w = alloc.weights[i - 1] * alloc.capital;
        if (w > 0.0) prof.at_bucket(i) = liquidity_from_capital(w, open_price, part.bucket(i)).liquidity;
    }
    return prof;
}

struct ShareVector {
    std::vector<double> r;
};

inline double share_of(double lp, double pool, RewardApproach approach, bool cap = true) {
    switch (approach) {
        case RewardApproach::PoolLevel:
            return 1.0;
        case RewardApproach::IsolatedLP:
            return lp > 0.0 ? 1.0 : 0.0;
        case RewardApproach::ShareOfHistorical: {
            if (lp <= 0.0) return 0.0;
            require(pool > 0.0, Errc::ZeroPoolLiquidity, "LP liquidity in a bucket with zero pool liquidity");
            const double r = lp / pool;
            return cap ? std::min(r, 1.0) : r;
        }
        case RewardApproach::Augmented:
            return lp > 0.0 ? lp / (pool + lp) : 0.0;
    }
    return 0.0;
}

/// Fee shares per bucket. `cap = false` gives the raw ratio L^LP/L^Σ used for position valuation.
inline ShareVector lp_shares(const LiquidityProfile& lp, const LiquidityProfile& pool, RewardApproach approach,
                             bool cap = true) {
    require(lp.size() == pool.size(), Errc::ShapeMismatch, "LP and pool profiles differ in length");
    ShareVector s;
    s.r.resize(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) s.r[i] = share_of(lp.values[i], pool.values[i], approach, cap);
    return s;
}

/// Liquidity whose reserve changes generate the fee flow the shares apply to.
inline double volume_liquidity(double lp, double pool, RewardApproach approach) noexcept {
    switch (approach) {
        case RewardApproach::IsolatedLP: return lp;
        case RewardApproach::Augmented: return pool + lp;
        default: return pool;
    }
}

inline LiquidityProfile volume_profile(const LiquidityProfile& lp, const LiquidityProfile& pool,
                                       RewardApproach approach) {
    require(lp.size() == pool.size(), Errc::ShapeMismatch, "LP and pool profiles differ in length");
    LiquidityProfile v(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) v.values[i] = volume_liquidity(lp.values[i], pool.values[i], approach);
    return v;
}

/// LP fee: Γ Σ_q Σ_n r_n [ΔV_n^q]_+ over the volume profile, marked at the closing price.
inline PoolFees lp_fees(const ShareVector& shares, const LiquidityProfile& volume, std::span<const double> prices,
                        const BucketPartition& part, double fee_tier, double closing_price) {
    require(shares.r.size() == part.size() && volume.size() == part.size(), Errc::ShapeMismatch,
            "shares and volume profile must match the partition");
    ReserveState sum;
    for (std::size_t q = 1; q < prices.size(); ++q) {
        const double from = prices[q - 1], to = prices[q];
        if (from == to) continue;
        const std::size_t lo = part.bucket_of(std::min(from, to));
        const std::size_t hi = part.bucket_of(std::max(from, to));
        for (std::size_t n = lo; n <= hi; ++n) {
            const double r = shares.r[n - 1];
            if (r == 0.0) continue;
            const auto in = inflow(delta_reserves(volume.at_bucket(n), from, to, part.bucket(n)));
            sum.x += r * in.x;
            sum.y += r * in.y;
        }
    }
    PoolFees out;
    out.tokens = {fee_tier * sum.x, fee_tier * sum.y};
    out.value = mark(out.tokens, closing_price);
    return out;
}

/// ⟨(p_close, 1), Σ_n V_n(L_n, p_close)·r_n⟩ + F^LP.
inline double end_of_epoch_capital(const ShareVector& shares, const LiquidityProfile& volume, double closing_price,
                                   double lp_fee, const BucketPartition& part) {
    require(shares.r.size() == part.size() && volume.size() == part.size(), Errc::ShapeMismatch,
            "shares and volume profile must match the partition");
    ReserveState held;
    for (std::size_t n = 1; n <= part.size(); ++n) {
        const double r = shares.r[n - 1];
        if (r == 0.0) continue;
        const auto v = liquidity_state(volume.at_bucket(n), closing_price, part.bucket(n));
        held.x += r * v.x;
        held.y += r * v.y;
    }
    return mark(held, closing_price) + lp_fee;
}

/// Marked value of a liquidity profile at price p.
inline double position_value(const LiquidityProfile& lp, double price, const BucketPartition& part) {
    ReserveState held;
    for (std::size_t n = 1; n <= part.size(); ++n)
        if (lp.at_bucket(n) > 0.0) held += liquidity_state(lp.at_bucket(n), price, part.bucket(n));
    return mark(held, price);
}

struct CostModel {
    double gas_mint = 430000.0;
    double gas_burn = 215000.0;
    double gas_price_gwei = 20.0;
};

struct GasOps {
    std::size_t mints = 0;
    std::size_t burns = 0;
};

/// Positions to burn and mint moving from `prev` to `next`; a bucket whose liquidity is unchanged
/// within 1e-9 relative is left alone.
inline GasOps count_gas_ops(const LiquidityProfile* prev, const LiquidityProfile& next) {
    GasOps ops;
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double a = prev ? prev->values.at(i) : 0.0;
        const double b = next.values[i];
        if (a > 0.0 && b > 0.0 && std::abs(a - b) <= 1e-9 * std::max(a, b)) continue;
        if (a > 0.0) ++ops.burns;
        if (b > 0.0) ++ops.mints;
    }
    return ops;
}

inline double gas_cost(const GasOps& ops, const CostModel& cost, double eth_price) {
    const double gas = cost.gas_mint * static_cast<double>(ops.mints) + cost.gas_burn * static_cast<double>(ops.burns);
    return gas * cost.gas_price_gwei * 1e-9 * eth_price;
}

inline double gas_cost(const LiquidityProfile* prev, const LiquidityProfile& next, const CostModel& cost,
                       double eth_price) {
    return gas_cost(count_gas_ops(prev, next), cost, eth_price);
}

/// Fast LP-fee evaluation for one epoch: one fee window per calibrated (sub-)epoch, each with its own
/// pool profile. Shares are recomputed per window; LRF-flagged windows earn nothing.
class EpochRewardModel {
public:
    EpochRewardModel(const PricePath& path, const Epoch& epoch, std::vector<CalibrationResult> calibrations,
                     const BucketPartition& part, double fee_tier)
        : part_(part), fee_tier_(fee_tier), cals_(std::move(calibrations)) {
        require(!cals_.empty(), Errc::InvalidArgument, "epoch needs at least one calibration");
        prices_ = epoch_prices(path, epoch);
        open_ = prices_.front();
        close_ = prices_.back();
        windows_.reserve(cals_.size());
        for (const auto& c : cals_) {
            std::size_t a = 0, b = prices_.size() - 1;
            if (!epoch.degenerate) {
                require(c.start_idx >= epoch.start_idx && c.end_idx <= epoch.end_idx && c.start_idx <= c.end_idx,
                        Errc::ShapeMismatch, "calibration window lies outside its epoch");
                a = c.start_idx - epoch.start_idx;
                b = c.end_idx - epoch.start_idx;
            }
            windows_.emplace_back(std::span<const double>(prices_).subspan(a, b - a + 1), part_);
        }
    }

    double open_price() const noexcept { return open_; }
    double close_price() const noexcept { return close_; }
    std::span<const double> prices() const noexcept { return prices_; }
    const std::vector<CalibrationResult>& calibrations() const noexcept { return cals_; }
    const FeeWindow& window(std::size_t j) const { return windows_[j]; }
    const BucketPartition& partition() const noexcept { return part_; }
    double fee_tier() const noexcept { return fee_tier_; }

    std::size_t lrf_zeroed() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(cals_.begin(), cals_.end(), [](const CalibrationResult& c) { return c.lrf_flag; }));
    }

    /// Fee tokens earned in one window (Γ applied); zero for an LRF-flagged window.
    ReserveState window_fee_tokens(std::size_t j, const LiquidityProfile& lp, RewardApproach approach) const {
        if (cals_[j].lrf_flag) return {};
        const auto& w = windows_[j];
        const auto& pool = cals_[j].profile;
        ReserveState sum;
        for (std::size_t n = w.first_bucket(); n <= w.last_bucket(); ++n) {
            const double l = lp.at_bucket(n);
            const double p = pool.at_bucket(n);
            const double r = share_of(l, p, approach);
            if (r == 0.0) continue;
            const double vol = volume_liquidity(l, p, approach);
            const auto& g = w.unit_inflow(n);
            sum.x += r * vol * g.x;
            sum.y += r * vol * g.y;
        }
        return {fee_tier_ * sum.x, fee_tier_ * sum.y};
    }

    std::size_t window_count() const noexcept { return windows_.size(); }

    PoolFees lp_fee(const LiquidityProfile& lp, RewardApproach approach) const {
        PoolFees out;
        for (std::size_t j = 0; j < windows_.size(); ++j) out.tokens += window_fee_tokens(j, lp, approach);
        out.value = mark(out.tokens, close_);
        return out;
    }

private:
    BucketPartition part_;
    double fee_tier_;
    std::vector<CalibrationResult> cals_;
    std::vector<double> prices_;
    std::vector<FeeWindow> windows_;
    double open_ = 0.0;
    double close_ = 0.0;
};

}  // namespace lpopt
