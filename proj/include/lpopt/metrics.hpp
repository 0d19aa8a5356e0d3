#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "lpopt/error.hpp"
#include "lpopt/market_data.hpp"

namespace lpopt {

inline constexpr double kTradingDays = 365.0;
inline constexpr Timestamp kSecondsPerDay = 86400;

struct CapitalPoint {
    Timestamp timestamp = 0;
    double capital = 0.0;
};

struct Metrics {
    double final_capital = 0.0;
    double cagr = 0.0;
    double max_drawdown = 0.0;    // in [-1, 0]
    std::optional<double> sharpe;  // absent when daily returns have zero spread
    std::size_t days_resampled = 0;
};

inline double max_drawdown(const std::vector<CapitalPoint>& series) {
    double peak = -std::numeric_limits<double>::infinity();
    double mdd = 0.0;
    for (const auto& p : series) {
        peak = std::max(peak, p.capital);
        if (peak > 0.0) mdd = std::min(mdd, p.capital / peak - 1.0);
    }
    return std::max(mdd, -1.0);
}

/// Last capital of every UTC day from the first to the last observation, forward-filled over empty days.
inline std::vector<double> daily_closes(const std::vector<CapitalPoint>& series) {
    std::vector<double> out;
    if (series.empty()) return out;
    auto day_of = [](Timestamp t) { return t >= 0 ? t / kSecondsPerDay : (t - kSecondsPerDay + 1) / kSecondsPerDay; };
    Timestamp day = day_of(series.front().timestamp);
    double last = series.front().capital;
    for (const auto& p : series) {
        const Timestamp d = day_of(p.timestamp);
        while (day < d) {
            out.push_back(last);
            ++day;
        }
        last = p.capital;
    }
    out.push_back(last);
    return out;
}

/// Annualized Sharpe of daily returns (risk-free rate 0, sample standard deviation). The first return is
/// measured from `w0`.
inline std::optional<double> sharpe_ratio(const std::vector<double>& daily, double w0) {
    std::vector<double> r;
    double prev = w0;
    for (double c : daily) {
        if (prev <= 0.0) break;
        r.push_back(c / prev - 1.0);
        prev = c;
    }
    if (r.size() < 2) return std::nullopt;
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(r.size() - 1));
    if (!(sd > 0.0)) return std::nullopt;
    return mean / sd * std::sqrt(kTradingDays);
}

inline Metrics compute_metrics(const std::vector<CapitalPoint>& series, double w0) {
    require(!series.empty(), Errc::EmptySeries, "capital series is empty");
    require(w0 > 0.0, Errc::InvalidArgument, "initial capital must be positive");
    Metrics m;
    m.final_capital = series.back().capital;
    const double days =
        static_cast<double>(series.back().timestamp - series.front().timestamp) / static_cast<double>(kSecondsPerDay);
    if (m.final_capital <= 0.0)
        m.cagr = -1.0;
    else if (days > 0.0)
        m.cagr = std::pow(m.final_capital / w0, kTradingDays / days) - 1.0;
    else
        m.cagr = 0.0;
    m.max_drawdown = max_drawdown(series);
    const auto daily = daily_closes(series);
    m.days_resampled = daily.size();
    m.sharpe = sharpe_ratio(daily, w0);
    return m;
}

}  // namespace lpopt
