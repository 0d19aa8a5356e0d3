#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lpopt/clmm.hpp"
#include "lpopt/error.hpp"
#include "lpopt/market_data.hpp"

namespace lpopt {

/// τ-reset strategy shape with optional empty buffer buckets below (eta_down) and above (eta_up).
struct StrategyShape {
    std::size_t tau = 0;
    std::size_t eta_up = 0;
    std::size_t eta_down = 0;

    static StrategyShape plain(std::size_t tau) { return {tau, 0, 0}; }
    static StrategyShape symmetric(std::size_t tau, std::size_t eta) { return {tau, eta, eta}; }

    bool is_plain() const noexcept { return eta_up == 0 && eta_down == 0; }
    std::size_t reduced_size() const noexcept { return tau + 1; }
};

/// Coverage [first, last] of a reset strategy around M. Only [liquid_first, liquid_last] may carry
/// capital; the remaining covered buckets are the zero-locked buffers.
struct LiquidSupport {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t liquid_first = 0;
    std::size_t liquid_last = 0;

    bool covers(std::size_t bucket) const noexcept { return bucket >= first && bucket <= last; }
    bool is_liquid(std::size_t bucket) const noexcept { return bucket >= liquid_first && bucket <= liquid_last; }
    std::size_t coverage() const noexcept { return last - first + 1; }
};

inline LiquidSupport liquid_support(const StrategyShape& shape, std::size_t ref_bucket, std::size_t bucket_count) {
    const std::size_t below = shape.tau + shape.eta_down;
    const std::size_t above = shape.tau + shape.eta_up;
    require(ref_bucket >= 1 && ref_bucket <= bucket_count, Errc::OutOfPartition, "reference bucket outside partition");
    require(ref_bucket > below && ref_bucket + above <= bucket_count, Errc::SupportClipped,
            "support around bucket " + std::to_string(ref_bucket) + " exceeds the partition of " +
                std::to_string(bucket_count) + " buckets");
    return {ref_bucket - below, ref_bucket + above, ref_bucket - shape.tau, ref_bucket + shape.tau};
}

struct Epoch {
    std::size_t id = 0;         // 0-based position in the epoch set
    std::size_t start_idx = 0;  // γ_{i-1}
    std::size_t end_idx = 0;    // γ_i
    std::size_t ref_bucket = 0;
    Timestamp duration = 0;     // seconds
    bool degenerate = false;    // single closing price, recorded with size 2

    std::size_t size() const noexcept { return degenerate ? 2 : end_idx - start_idx + 1; }
};

struct EpochSet {
    std::vector<Epoch> epochs;

    std::size_t count() const noexcept { return epochs.size(); }
    const Epoch& operator[](std::size_t i) const { return epochs[i]; }
    auto begin() const noexcept { return epochs.begin(); }
    auto end() const noexcept { return epochs.end(); }
};

/// Splits the path at every price whose bucket leaves the current coverage; the triggering price
/// closes one epoch and opens the next with M = bucket_of(trigger).
inline EpochSet partition_epochs(const PricePath& path, const BucketPartition& partition, const StrategyShape& shape) {
    require(!path.empty(), Errc::EmptyPath, "cannot partition an empty path");
    const std::size_t n = partition.size();
    EpochSet set;
    auto open = [&](std::size_t idx, std::size_t m) {
        liquid_support(shape, m, n);
        Epoch e;
        e.id = set.epochs.size();
        e.start_idx = idx;
        e.ref_bucket = m;
        set.epochs.push_back(e);
    };
    auto close = [&](std::size_t idx) {
        auto& e = set.epochs.back();
        e.end_idx = idx;
        e.duration = path.timestamp(idx) - path.timestamp(e.start_idx);
        e.degenerate = e.start_idx == idx;
    };

    open(0, partition.bucket_of(path.price(0)));
    for (std::size_t j = 1; j < path.size(); ++j) {
        const std::size_t b = partition.bucket_of(path.price(j));
        const std::size_t m = set.epochs.back().ref_bucket;
        if (b + shape.tau + shape.eta_down < m || b > m + shape.tau + shape.eta_up) {
            close(j);
            open(j, b);
        }
    }
    close(path.last_index());
    return set;
}

}  // namespace lpopt
