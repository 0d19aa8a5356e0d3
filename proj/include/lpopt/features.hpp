#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lpopt/csv.hpp"
#include "lpopt/epochs.hpp"
#include "lpopt/error.hpp"
#include "lpopt/market_data.hpp"

namespace lpopt {

inline constexpr std::size_t kFeaturesPerPair = 15;
inline constexpr std::size_t kFeatureDim = 3 * kFeaturesPerPair;
inline constexpr std::size_t kLookbackBars = 1440 * 7;
inline constexpr double kFeatureFloor = 1e-8;

/// Recursive EMA with smoothing 2/(period+1), seeded with the first value.
inline std::vector<double> ema(std::span<const double> series, std::size_t period) {
    require(!series.empty(), Errc::EmptySeries, "EMA of an empty series");
    require(period >= 1, Errc::InvalidArgument, "EMA period must be >= 1");
    const double a = 2.0 / (static_cast<double>(period) + 1.0);
    std::vector<double> out(series.size());
    out[0] = series[0];
    for (std::size_t i = 1; i < series.size(); ++i) out[i] = a * series[i] + (1.0 - a) * out[i - 1];
    return out;
}

struct MacdSeries {
    std::vector<double> ema_fast;
    std::vector<double> ema_slow;
    std::vector<double> macd;
    std::vector<double> signal;
    std::vector<double> histogram;
};

inline MacdSeries macd_features(std::span<const double> close, std::size_t fast = 12, std::size_t slow = 26,
                                std::size_t signal = 9) {
    require(close.size() >= slow, Errc::InsufficientHistory,
            "MACD needs at least " + std::to_string(slow) + " values, got " + std::to_string(close.size()));
    MacdSeries m;
    m.ema_fast = ema(close, fast);
    m.ema_slow = ema(close, slow);
    m.macd.resize(close.size());
    for (std::size_t i = 0; i < close.size(); ++i) m.macd[i] = m.ema_fast[i] - m.ema_slow[i];
    m.signal = ema(m.macd, signal);
    m.histogram.resize(close.size());
    for (std::size_t i = 0; i < close.size(); ++i) m.histogram[i] = m.macd[i] - m.signal[i];
    return m;
}

/// Last close and summed volume per clock hour.
inline std::vector<OhlcvBar> hourly_bars(std::span<const OhlcvBar> bars) {
    std::vector<OhlcvBar> out;
    for (const auto& b : bars) {
        const Timestamp hour = b.timestamp - ((b.timestamp % 3600) + 3600) % 3600;
        if (out.empty() || out.back().timestamp != hour) {
            out.push_back({hour, b.open, b.high, b.low, b.close, b.volume});
        } else {
            auto& h = out.back();
            h.high = std::max(h.high, b.high);
            h.low = std::min(h.low, b.low);
            h.close = b.close;
            h.volume += b.volume;
        }
    }
    return out;
}

struct VolumeVolatility {
    std::vector<double> std30;
    std::vector<double> std60;
    std::vector<double> diff;
};

namespace detail {

inline double trailing_pstd(std::span<const double> v, std::size_t end, std::size_t window) {
    const auto w = v.subspan(end + 1 - window, window);
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= static_cast<double>(window);
    double ss = 0.0;
    for (double x : w) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(window));
}

}  // namespace detail

/// Trailing population std of volume over 30 and 60 bars, one row per bar t >= 59. Zero volumes are
/// replaced by 1e-8 first.
inline VolumeVolatility volume_volatility(std::span<const double> volume) {
    require(volume.size() >= 60, Errc::InsufficientHistory, "volume volatility needs at least 60 bars");
    std::vector<double> v(volume.begin(), volume.end());
    for (auto& x : v)
        if (x == 0.0) x = kFeatureFloor;
    VolumeVolatility out;
    for (std::size_t t = 59; t < v.size(); ++t) {
        out.std30.push_back(detail::trailing_pstd(v, t, 30));
        out.std60.push_back(detail::trailing_pstd(v, t, 60));
        out.diff.push_back(out.std30.back() - out.std60.back());
    }
    return out;
}

using PairFeatures = std::array<double, kFeaturesPerPair>;

/// The 15 features of one pair at the last bar of `window`.
inline PairFeatures pair_features(std::span<const OhlcvBar> window) {
    require(window.size() >= 60, Errc::InsufficientHistory, "pair features need at least 60 bars");
    std::vector<double> close(window.size()), vol(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
        close[i] = window[i].close;
        vol[i] = window[i].volume;
    }
    const auto m = macd_features(close);
    const auto hourly = hourly_bars(window);
    std::vector<double> hclose(hourly.size());
    for (std::size_t i = 0; i < hourly.size(); ++i) hclose[i] = hourly[i].close;
    require(hclose.size() >= 26, Errc::InsufficientHistory, "hourly MACD needs at least 26 hours of bars");
    const auto h = macd_features(hclose);
    // only the final row is needed
    const std::size_t t = window.size() - 1;
    double vv30 = 0.0, vv60 = 0.0;
    {
        std::vector<double> tail(vol.end() - 60, vol.end());
        for (auto& x : tail)
            if (x == 0.0) x = kFeatureFloor;
        vv30 = detail::trailing_pstd(tail, 59, 30);
        vv60 = detail::trailing_pstd(tail, 59, 60);
    }
    const std::size_t u = hclose.size() - 1;
    return {close[t],        vol[t],        m.ema_fast[t],  m.ema_slow[t], m.macd[t],
            m.signal[t],     m.histogram[t], h.ema_fast[u], h.ema_slow[u], h.macd[u],
            h.signal[u],     h.histogram[u], vv30,          vv60,          vv30 - vv60};
}

/// A/B with both sides kept at least 1e-8 away from zero, so equal inputs always give 1.
inline double guarded_ratio(double a, double b) noexcept {
    auto g = [](double v) { return std::abs(v) < kFeatureFloor ? std::copysign(kFeatureFloor, v) : v; };
    return g(a) / g(b);
}

using FeatureVector = std::array<double, kFeatureDim>;

struct FeatureMatrix {
    std::vector<std::size_t> epoch_ids;
    std::vector<FeatureVector> rows;

    std::size_t size() const noexcept { return rows.size(); }
};

inline FeatureVector assemble_features(const PairFeatures& a, const PairFeatures& b) {
    FeatureVector f{};
    for (std::size_t k = 0; k < kFeaturesPerPair; ++k) {
        f[k] = a[k];
        f[kFeaturesPerPair + k] = b[k];
        f[2 * kFeaturesPerPair + k] = guarded_ratio(a[k], b[k]);
    }
    return f;
}

/// One row per epoch from the week of bars ending at the bar nearest the epoch-opening timestamp.
inline FeatureMatrix build_feature_matrix(const EpochSet& epochs, const PricePath& path,
                                          std::span<const OhlcvBar> bars_a, std::span<const OhlcvBar> bars_b,
                                          std::size_t lookback = kLookbackBars) {
    require(lookback >= 60, Errc::InvalidArgument, "look-back must cover at least 60 bars");
    FeatureMatrix fm;
    auto window_for = [&](std::span<const OhlcvBar> bars, Timestamp t, std::size_t id) {
        std::size_t i = 0;
        try {
            i = nearest_bar_index(bars, t);
        } catch (const Error& e) {
            fail(e.code(), "epoch " + std::to_string(id) + ": " + e.what());
        }
        require(i + 1 >= lookback, Errc::LookbackUnderflow,
                "epoch " + std::to_string(id) + " has only " + std::to_string(i + 1) + " bars of history, needs " +
                    std::to_string(lookback));
        return bars.subspan(i + 1 - lookback, lookback);
    };
    for (const auto& e : epochs) {
        const Timestamp t = path.timestamp(e.start_idx);
        const auto a = pair_features(window_for(bars_a, t, e.id));
        const auto b = pair_features(window_for(bars_b, t, e.id));
        auto row = assemble_features(a, b);
        for (double v : row) require(std::isfinite(v), Errc::NonfiniteResult, "non-finite feature in epoch " + std::to_string(e.id));
        fm.epoch_ids.push_back(e.id);
        fm.rows.push_back(row);
    }
    return fm;
}

inline void write_features(std::ostream& os, const FeatureMatrix& fm) {
    os << "epoch_id";
    for (std::size_t k = 1; k <= kFeatureDim; ++k) os << ",f" << k;
    os << '\n';
    for (std::size_t i = 0; i < fm.size(); ++i) {
        os << fm.epoch_ids[i];
        for (double v : fm.rows[i]) os << ',' << csv::fmt(v);
        os << '\n';
    }
}

inline FeatureMatrix read_features(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), Errc::EmptyFile, "features file is empty");
    require(csv::split(line).size() == kFeatureDim + 1, Errc::MalformedRecord, "features header must be epoch_id,f1..f45");
    FeatureMatrix fm;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        require(cells.size() == kFeatureDim + 1, Errc::MalformedRecord,
                "features line " + std::to_string(lineno) + ": expected 46 fields");
        std::int64_t id = 0;
        require(csv::parse(cells[0], id) && id >= 0, Errc::MalformedRecord,
                "features line " + std::to_string(lineno) + ": bad epoch_id");
        FeatureVector row{};
        for (std::size_t k = 0; k < kFeatureDim; ++k)
            require(csv::parse(cells[k + 1], row[k]) && std::isfinite(row[k]), Errc::MalformedRecord,
                    "features line " + std::to_string(lineno) + ": bad value");
        fm.epoch_ids.push_back(static_cast<std::size_t>(id));
        fm.rows.push_back(row);
    }
    return fm;
}

}  // namespace lpopt
