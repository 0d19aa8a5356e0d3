#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lpopt/csv.hpp"
#include "lpopt/error.hpp"

namespace lpopt {

using Timestamp = std::int64_t;  // seconds since Unix epoch

struct SwapEvent {
    Timestamp timestamp = 0;
    double price_after = 0.0;  // numéraire per risky token
    double volume = 0.0;       // numéraire, gross
};

struct PoolSpec {
    double fee_tier = 0.003;
    double tick_size = 1e-6;
    std::string token_a = "ETH";
    std::string token_b = "USDC";
    std::string numeraire = "USDC";

    void validate() const {
        require(fee_tier > 0.0 && fee_tier < 1.0, Errc::InvalidArgument, "fee tier must lie in (0, 1)");
        require(tick_size > 0.0, Errc::InvalidArgument, "tick size must be positive");
    }
};

/// Swap-ordered pool prices p_0..p_H with timestamps and volumes.
class PricePath {
public:
    PricePath() = default;

    explicit PricePath(std::vector<SwapEvent> events) : events_(std::move(events)) {
        require(!events_.empty(), Errc::EmptyPath, "price path needs at least one swap");
        for (std::size_t i = 0; i < events_.size(); ++i) {
            const auto& e = events_[i];
            require(std::isfinite(e.price_after) && e.price_after > 0.0, Errc::MalformedRecord,
                    "non-positive price at index " + std::to_string(i));
            require(std::isfinite(e.volume) && e.volume >= 0.0, Errc::MalformedRecord,
                    "negative volume at index " + std::to_string(i));
            if (i > 0)
                require(events_[i - 1].timestamp <= e.timestamp, Errc::UnsortedInput,
                        "timestamps decrease at index " + std::to_string(i));
        }
        prices_.reserve(events_.size());
        for (const auto& e : events_) prices_.push_back(e.price_after);
    }

    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    /// Index of the last price (H).
    std::size_t last_index() const noexcept { return events_.size() - 1; }

    const SwapEvent& operator[](std::size_t i) const { return events_[i]; }
    const std::vector<SwapEvent>& events() const noexcept { return events_; }
    std::span<const double> prices() const noexcept { return prices_; }
    double price(std::size_t i) const { return prices_[i]; }
    Timestamp timestamp(std::size_t i) const { return events_[i].timestamp; }

    friend bool operator==(const PricePath& a, const PricePath& b) {
        return std::equal(a.events_.begin(), a.events_.end(), b.events_.begin(), b.events_.end(),
                          [](const SwapEvent& x, const SwapEvent& y) {
                              return x.timestamp == y.timestamp && x.price_after == y.price_after &&
                                     x.volume == y.volume;
                          });
    }

private:
    std::vector<SwapEvent> events_;
    std::vector<double> prices_;
};

struct OhlcvBar {
    Timestamp timestamp = 0;  // bar open
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

struct LoadOptions {
    bool auto_sort = false;
};

/// Parses the `timestamp,price,volume` swap schema. Ties keep file order.
inline PricePath read_swaps(std::istream& in, const PoolSpec& spec, LoadOptions opts = {}) {
    spec.validate();
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<SwapEvent> events;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        if (!have_header) {
            require(csv::header_matches(line, {"timestamp", "price", "volume"}), Errc::MalformedRecord,
                    "line " + std::to_string(line_no) + ": expected header 'timestamp,price,volume'");
            have_header = true;
            continue;
        }
        auto cols = csv::split(line);
        SwapEvent ev;
        bool ok = cols.size() == 3 && csv::parse(cols[0], ev.timestamp) && csv::parse(cols[1], ev.price_after) &&
                  csv::parse(cols[2], ev.volume);
        require(ok, Errc::MalformedRecord, "line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
        require(std::isfinite(ev.price_after) && ev.price_after > 0.0, Errc::MalformedRecord,
                "line " + std::to_string(line_no) + ": price must be positive");
        require(std::isfinite(ev.volume) && ev.volume >= 0.0, Errc::MalformedRecord,
                "line " + std::to_string(line_no) + ": volume must be non-negative");
        if (!events.empty() && ev.timestamp < events.back().timestamp && !opts.auto_sort)
            fail(Errc::UnsortedInput, "line " + std::to_string(line_no) + ": timestamp goes backwards");
        events.push_back(ev);
    }
    require(!events.empty(), Errc::EmptyFile, "no swap records");
    if (opts.auto_sort)
        std::stable_sort(events.begin(), events.end(),
                         [](const SwapEvent& a, const SwapEvent& b) { return a.timestamp < b.timestamp; });
    return PricePath(std::move(events));
}

inline PricePath load_swaps(const std::string& path, const PoolSpec& spec, LoadOptions opts = {}) {
    auto in = csv::open_in(path);
    return read_swaps(in, spec, opts);
}

inline void write_swaps(std::ostream& out, const PricePath& path) {
    out << "timestamp,price,volume\n";
    for (const auto& e : path.events())
        out << e.timestamp << ',' << csv::fmt(e.price_after) << ',' << csv::fmt(e.volume) << '\n';
}

inline std::string serialize_swaps(const PricePath& path) {
    std::ostringstream os;
    write_swaps(os, path);
    return os.str();
}

inline std::vector<OhlcvBar> read_bars(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<OhlcvBar> bars;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        if (!have_header) {
            require(csv::header_matches(line, {"timestamp", "open", "high", "low", "close", "volume"}),
                    Errc::MalformedRecord,
                    "line " + std::to_string(line_no) + ": expected header 'timestamp,open,high,low,close,volume'");
            have_header = true;
            continue;
        }
        auto cols = csv::split(line);
        OhlcvBar b;
        bool ok = cols.size() == 6 && csv::parse(cols[0], b.timestamp) && csv::parse(cols[1], b.open) &&
                  csv::parse(cols[2], b.high) && csv::parse(cols[3], b.low) && csv::parse(cols[4], b.close) &&
                  csv::parse(cols[5], b.volume);
        require(ok, Errc::MalformedRecord, "line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
        const double lo = std::min(b.open, b.close), hi = std::max(b.open, b.close);
        require(b.low <= lo && hi <= b.high && b.volume >= 0.0, Errc::MalformedRecord,
                "line " + std::to_string(line_no) + ": inconsistent OHLCV values");
        require(bars.empty() || bars.back().timestamp < b.timestamp, Errc::UnsortedInput,
                "line " + std::to_string(line_no) + ": bar timestamps must strictly increase");
        bars.push_back(b);
    }
    require(!bars.empty(), Errc::EmptyFile, "no OHLCV records");
    return bars;
}

inline std::vector<OhlcvBar> load_bars(const std::string& path) {
    auto in = csv::open_in(path);
    return read_bars(in);
}

inline void write_bars(std::ostream& out, std::span<const OhlcvBar> bars) {
    out << "timestamp,open,high,low,close,volume\n";
    for (const auto& b : bars)
        out << b.timestamp << ',' << csv::fmt(b.open) << ',' << csv::fmt(b.high) << ',' << csv::fmt(b.low) << ','
            << csv::fmt(b.close) << ',' << csv::fmt(b.volume) << '\n';
}

/// Index of the bar nearest to t; equidistant ties go to the earlier bar.
inline std::size_t nearest_bar_index(std::span<const OhlcvBar> bars, Timestamp t) {
    require(!bars.empty(), Errc::EmptySeries, "bar series is empty");
    const Timestamp interval = bars.size() > 1 ? bars[1].timestamp - bars[0].timestamp : 60;
    require(t >= bars.front().timestamp - interval, Errc::LookbackUnderflow,
            "timestamp " + std::to_string(t) + " predates the bar series");
    auto it = std::lower_bound(bars.begin(), bars.end(), t,
                               [](const OhlcvBar& b, Timestamp v) { return b.timestamp < v; });
    if (it == bars.begin()) return 0;
    if (it == bars.end()) return bars.size() - 1;
    const auto hi = static_cast<std::size_t>(it - bars.begin());
    const auto lo = hi - 1;
    return (bars[hi].timestamp - t) < (t - bars[lo].timestamp) ? hi : lo;
}

inline const OhlcvBar& nearest_bar(std::span<const OhlcvBar> bars, Timestamp t) {
    return bars[nearest_bar_index(bars, t)];
}

}  // namespace lpopt
