#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lpopt/error.hpp"

namespace lpopt {

/// Price interval [lower, upper] of one bucket.
struct Bucket {
    double lower = 0.0;
    double upper = 0.0;
};

/// N contiguous equal-width buckets starting at `lower_bound`. Bucket indices are 1-based.
class BucketPartition {
public:
    BucketPartition() = default;

    BucketPartition(double lower_bound, double width, std::size_t count, double tick_size = 0.0)
        : lower_(lower_bound), width_(width), count_(count) {
        require(count >= 1, Errc::InvalidArgument, "partition needs at least one bucket");
        require(width > 0.0 && std::isfinite(width), Errc::InvalidArgument, "bucket width must be positive");
        require(lower_bound >= 0.0 && std::isfinite(lower_bound), Errc::InvalidArgument,
                "partition lower bound must be non-negative");
        require(width >= tick_size, Errc::InvalidArgument, "bucket width is below the pool tick size");
    }

    double lower_bound() const noexcept { return lower_; }
    double upper_bound() const noexcept { return lower_ + static_cast<double>(count_) * width_; }
    double width() const noexcept { return width_; }
    std::size_t size() const noexcept { return count_; }

    double bucket_lower(std::size_t i) const noexcept { return lower_ + static_cast<double>(i - 1) * width_; }
    Bucket bucket(std::size_t i) const noexcept { return {bucket_lower(i), bucket_lower(i + 1)}; }
    double center(std::size_t i) const noexcept { return lower_ + (static_cast<double>(i) - 0.5) * width_; }

    bool contains(double p) const noexcept { return p >= lower_ && p <= upper_bound(); }

    /// Bucket holding p; interior boundary prices go to the upper bucket, the top edge to bucket N.
    std::size_t bucket_of(double p) const {
        require(std::isfinite(p) && contains(p), Errc::OutOfPartition,
                "price " + std::to_string(p) + " outside partition [" + std::to_string(lower_) + ", " +
                    std::to_string(upper_bound()) + "]");
        auto i = static_cast<std::size_t>(std::floor((p - lower_) / width_)) + 1;
        if (i > count_) i = count_;
        if (i < 1) i = 1;
        // settle the floor() estimate against the same bounds bucket() reports
        while (i < count_ && p >= bucket_lower(i + 1)) ++i;
        while (i > 1 && p < bucket_lower(i)) --i;
        return i;
    }

    friend bool operator==(const BucketPartition& a, const BucketPartition& b) {
        return a.lower_ == b.lower_ && a.width_ == b.width_ && a.count_ == b.count_;
    }

private:
    double lower_ = 0.0;
    double width_ = 1.0;
    std::size_t count_ = 1;
};

/// Real reserves of a position: x risky token, y numéraire.
struct ReserveState {
    double x = 0.0;
    double y = 0.0;

    double value(double price) const noexcept { return y + price * x; }
    ReserveState& operator+=(const ReserveState& o) noexcept {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend ReserveState operator-(const ReserveState& a, const ReserveState& b) noexcept {
        return {a.x - b.x, a.y - b.y};
    }
    friend ReserveState operator+(ReserveState a, const ReserveState& b) noexcept { return a += b; }
    friend bool operator==(const ReserveState&, const ReserveState&) = default;
};

/// Per-bucket liquidity L_1..L_N; element i-1 holds bucket i.
struct LiquidityProfile {
    std::vector<double> values;

    LiquidityProfile() = default;
    explicit LiquidityProfile(std::size_t n, double fill = 0.0) : values(n, fill) {}
    explicit LiquidityProfile(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const noexcept { return values.size(); }
    double at_bucket(std::size_t i) const { return values[i - 1]; }
    double& at_bucket(std::size_t i) { return values[i - 1]; }
};

struct Position {
    ReserveState reserves;
    double liquidity = 0.0;
};

/// Converts capital W at pool price p into reserves and liquidity in `bucket`.
/// Below the range everything is held as x = W / p; above it as y = W.
inline Position liquidity_from_capital(double capital, double price, Bucket bucket, double min_width = 0.0) {
    require(capital >= 0.0 && std::isfinite(capital), Errc::InvalidArgument, "capital must be non-negative");
    require(price > 0.0 && std::isfinite(price), Errc::InvalidArgument, "price must be positive");
    require(bucket.upper > bucket.lower && bucket.upper - bucket.lower >= min_width, Errc::DegenerateBucket,
            "bucket narrower than the tick size");
    const double sa = std::sqrt(bucket.lower);
    const double sb = std::sqrt(bucket.upper);
    Position pos;
    if (price <= bucket.lower) {
        pos.reserves = {capital / price, 0.0};
        pos.liquidity = pos.reserves.x * sa * sb / (sb - sa);
    } else if (price >= bucket.upper) {
        pos.reserves = {0.0, capital};
        pos.liquidity = capital / (sb - sa);
    } else {
        const double s = std::sqrt(price);
        const double x_unit = sb * s / (sb - s);  // L per unit of x
        const double y_unit = 1.0 / (s - sa);     // L per unit of y
        const double denom = x_unit + y_unit * price;
        pos.reserves = {capital * y_unit / denom, capital * x_unit / denom};
        pos.liquidity = pos.reserves.x * x_unit;
    }
    require(std::isfinite(pos.liquidity) && std::isfinite(pos.reserves.x) && std::isfinite(pos.reserves.y),
            Errc::NonfiniteResult, "liquidity from capital is not finite");
    return pos;
}

/// Liquidity-state function: reserves held by liquidity L at price p.
inline ReserveState liquidity_state(double liquidity, double price, Bucket bucket) noexcept {
    const double sa = std::sqrt(bucket.lower);
    const double sb = std::sqrt(bucket.upper);
    if (price <= bucket.lower) return {liquidity * (1.0 / sa - 1.0 / sb), 0.0};
    if (price >= bucket.upper) return {0.0, liquidity * (sb - sa)};
    const double s = std::sqrt(price);
    return {liquidity * (1.0 / s - 1.0 / sb), liquidity * (s - sa)};
}

/// Reserve change of liquidity L when the price moves from `from` to `to`.
inline ReserveState delta_reserves(double liquidity, double from, double to, Bucket bucket) noexcept {
    if (from == to) return {0.0, 0.0};
    return liquidity_state(liquidity, to, bucket) - liquidity_state(liquidity, from, bucket);
}

/// Component-wise positive part: the tokens traders bring into the bucket.
inline ReserveState inflow(const ReserveState& d) noexcept {
    return {d.x > 0.0 ? d.x : 0.0, d.y > 0.0 ? d.y : 0.0};
}

}  // namespace lpopt
