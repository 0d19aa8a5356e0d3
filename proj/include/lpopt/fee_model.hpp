#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "lpopt/clmm.hpp"
#include "lpopt/error.hpp"

namespace lpopt {

struct PoolFees {
    ReserveState tokens;  // fee amounts per token, Γ·Σ[ΔV]+
    double value = 0.0;   // tokens marked at (closing price, 1)
};

inline double mark(const ReserveState& tokens, double closing_price) noexcept {
    return closing_price * tokens.x + tokens.y;
}

/// Fees earned by a fixed liquidity profile while the price walks `prices`.
inline PoolFees simulate_pool_fees(const LiquidityProfile& profile, std::span<const double> prices,
                                   const BucketPartition& partition, double fee_tier, double closing_price) {
    require(profile.size() == partition.size(), Errc::ShapeMismatch, "profile length differs from partition size");
    ReserveState sum;
    for (std::size_t q = 1; q < prices.size(); ++q) {
        const double from = prices[q - 1], to = prices[q];
        if (from == to) continue;
        const std::size_t lo = partition.bucket_of(std::min(from, to));
        const std::size_t hi = partition.bucket_of(std::max(from, to));
        for (std::size_t n = lo; n <= hi; ++n)
            sum += inflow(delta_reserves(profile.at_bucket(n), from, to, partition.bucket(n)));
    }
    PoolFees out;
    out.tokens = {fee_tier * sum.x, fee_tier * sum.y};
    out.value = mark(out.tokens, closing_price);
    return out;
}

/// Token inflow per unit of liquidity, per bucket, accumulated over a price slice. Fees are
/// linear in each bucket's liquidity, so any profile's fees follow from this table.
class FeeWindow {
public:
    FeeWindow() = default;

    FeeWindow(std::span<const double> prices, const BucketPartition& partition) {
        require(!prices.empty(), Errc::EmptyPath, "fee window needs at least one price");
        open_ = prices.front();
        close_ = prices.back();
        const auto [mn, mx] = std::minmax_element(prices.begin(), prices.end());
        first_ = partition.bucket_of(*mn);
        last_ = partition.bucket_of(*mx);
        unit_.assign(last_ - first_ + 1, ReserveState{});
        for (std::size_t q = 1; q < prices.size(); ++q) {
            const double from = prices[q - 1], to = prices[q];
            if (from == to) continue;
            const std::size_t lo = partition.bucket_of(std::min(from, to));
            const std::size_t hi = partition.bucket_of(std::max(from, to));
            for (std::size_t n = lo; n <= hi; ++n)
                unit_[n - first_] += inflow(delta_reserves(1.0, from, to, partition.bucket(n)));
        }
    }

    std::size_t first_bucket() const noexcept { return first_; }
    std::size_t last_bucket() const noexcept { return last_; }
    double open_price() const noexcept { return open_; }
    double close_price() const noexcept { return close_; }
    const ReserveState& unit_inflow(std::size_t bucket) const { return unit_[bucket - first_]; }

    /// Σ_n L_n·g_n (no fee tier applied).
    ReserveState inflow_for(const LiquidityProfile& profile) const {
        ReserveState s;
        for (std::size_t n = first_; n <= last_; ++n) {
            const double l = profile.at_bucket(n);
            const auto& g = unit_[n - first_];
            s.x += l * g.x;
            s.y += l * g.y;
        }
        return s;
    }

private:
    std::size_t first_ = 1;
    std::size_t last_ = 0;
    double open_ = 0.0;
    double close_ = 0.0;
    std::vector<ReserveState> unit_;
};

}  // namespace lpopt
