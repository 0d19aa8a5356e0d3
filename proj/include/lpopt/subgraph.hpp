#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lpopt/error.hpp"
#include "lpopt/market_data.hpp"

namespace lpopt::subgraph {

/// Posts a JSON body and returns the response body. Throws Error(NetworkError) on transport failure.
using Transport = std::function<std::string(const std::string& body)>;

struct Config {
    int page_size = 1000;
    std::string cursor_field = "id";  // "id" or "timestamp"
    int token0_decimals = 6;
    int token1_decimals = 18;
    bool numeraire_is_token0 = true;
    int max_attempts = 4;
    int backoff_ms = 500;
};

struct SwapRecord {
    std::string id;
    Timestamp timestamp = 0;
    double amount0 = 0.0;
    double amount1 = 0.0;
    std::string sqrt_price_x96;  // empty when absent
    long log_index = 0;
};

inline std::string build_query(const std::string& pool_id, Timestamp from, Timestamp to, const std::string& cursor,
                               const Config& cfg) {
    const bool by_id = cfg.cursor_field == "id";
    std::string where = "pool: $pool, timestamp_gte: $from, timestamp_lt: $to";
    if (by_id) where += ", id_gt: $cursor";
    std::string q = "query($pool: String!, $from: BigInt!, $to: BigInt!";
    if (by_id) q += ", $cursor: String!";
    q += ") { swaps(first: " + std::to_string(cfg.page_size) + ", where: {" + where + "}, orderBy: " +
         (by_id ? "id" : "timestamp") +
         ", orderDirection: asc) { id timestamp amount0 amount1 sqrtPriceX96 logIndex } }";
    nlohmann::json body;
    body["query"] = q;
    body["variables"]["pool"] = pool_id;
    body["variables"]["from"] = std::to_string(from);
    body["variables"]["to"] = std::to_string(to);
    if (by_id) body["variables"]["cursor"] = cursor;
    return body.dump();
}

namespace detail {

inline double as_number(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return std::stod(v.get<std::string>());
    fail(Errc::MalformedRecord, "expected numeric field in subgraph record");
}

}  // namespace detail

inline std::vector<SwapRecord> parse_page(const std::string& response) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(response);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedRecord, std::string("subgraph response is not JSON: ") + e.what());
    }
    if (doc.contains("errors")) fail(Errc::NetworkError, "subgraph returned errors: " + doc["errors"].dump());
    require(doc.contains("data") && doc["data"].contains("swaps") && doc["data"]["swaps"].is_array(),
            Errc::MalformedRecord, "subgraph response lacks data.swaps");
    std::vector<SwapRecord> out;
    try {
        for (const auto& s : doc["data"]["swaps"]) {
            SwapRecord r;
            r.id = s.at("id").get<std::string>();
            r.timestamp = static_cast<Timestamp>(detail::as_number(s.at("timestamp")));
            r.amount0 = detail::as_number(s.at("amount0"));
            r.amount1 = detail::as_number(s.at("amount1"));
            if (s.contains("sqrtPriceX96") && !s["sqrtPriceX96"].is_null())
                r.sqrt_price_x96 = s["sqrtPriceX96"].is_string() ? s["sqrtPriceX96"].get<std::string>()
                                                                  : s["sqrtPriceX96"].dump();
            if (s.contains("logIndex") && !s["logIndex"].is_null())
                r.log_index = static_cast<long>(detail::as_number(s["logIndex"]));
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedRecord, std::string("bad subgraph record: ") + e.what());
    }
    return out;
}

/// Post-swap price from sqrtPriceX96 when present, otherwise |amount_numeraire / amount_risky|.
inline SwapEvent to_swap_event(const SwapRecord& r, const Config& cfg) {
    const double amt_num = cfg.numeraire_is_token0 ? r.amount0 : r.amount1;
    const double amt_risky = cfg.numeraire_is_token0 ? r.amount1 : r.amount0;
    double price = 0.0;
    if (!r.sqrt_price_x96.empty()) {
        const long double s = std::strtold(r.sqrt_price_x96.c_str(), nullptr) / std::ldexp(1.0L, 96);
        // token1 per token0 in whole-token units
        const long double p10 = s * s * std::pow(10.0L, cfg.token0_decimals - cfg.token1_decimals);
        price = static_cast<double>(cfg.numeraire_is_token0 ? 1.0L / p10 : p10);
    } else {
        require(amt_risky != 0.0, Errc::MalformedRecord, "swap " + r.id + " has zero risky amount and no price");
        price = std::abs(amt_num / amt_risky);
    }
    require(std::isfinite(price) && price > 0.0, Errc::MalformedRecord, "swap " + r.id + " yields invalid price");
    return SwapEvent{r.timestamp, price, std::abs(amt_num)};
}

inline std::string post_with_retry(const Transport& transport, const std::string& body, const Config& cfg) {
    for (int attempt = 1;; ++attempt) {
        try {
            return transport(body);
        } catch (const Error& e) {
            if (e.code() != Errc::NetworkError || attempt >= cfg.max_attempts) throw;
        }
        if (cfg.backoff_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
    }
}

/// Paginated fetch of all swaps of a pool in [from, to).
inline PricePath fetch_swaps(const Transport& transport, const std::string& pool_id, Timestamp from, Timestamp to,
                             const Config& cfg = {}) {
    require(from < to, Errc::EmptyRange, "time range is empty");
    require(cfg.page_size > 0, Errc::InvalidArgument, "page size must be positive");
    require(cfg.cursor_field == "id" || cfg.cursor_field == "timestamp", Errc::InvalidArgument,
            "cursor field must be 'id' or 'timestamp'");
    const bool by_id = cfg.cursor_field == "id";

    std::vector<SwapRecord> all;
    std::set<std::string> seen;
    std::string cursor;
    Timestamp ts_cursor = from;
    while (true) {
        const auto body = build_query(pool_id, by_id ? from : ts_cursor, to, cursor, cfg);
        auto page = parse_page(post_with_retry(transport, body, cfg));
        std::size_t fresh = 0;
        for (auto& r : page) {
            if (by_id) {
                require(cursor.empty() || r.id > cursor, Errc::PaginationGap,
                        "page is not ordered after cursor '" + cursor + "'");
                cursor = r.id;
            } else {
                require(r.timestamp >= ts_cursor, Errc::PaginationGap, "page timestamp precedes cursor");
                ts_cursor = r.timestamp;
            }
            if (seen.insert(r.id).second) {
                all.push_back(std::move(r));
                ++fresh;
            }
        }
        if (static_cast<int>(page.size()) < cfg.page_size) break;
        // a full page of one timestamp cannot advance a timestamp cursor
        require(by_id || fresh > 0, Errc::PaginationGap, "timestamp cursor stalled; use the id cursor");
    }
    require(!all.empty(), Errc::EmptyRange, "no swaps in the requested range");
    std::stable_sort(all.begin(), all.end(), [](const SwapRecord& a, const SwapRecord& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.log_index < b.log_index;
    });
    std::vector<SwapEvent> events;
    events.reserve(all.size());
    for (const auto& r : all) events.push_back(to_swap_event(r, cfg));
    return PricePath(std::move(events));
}

}  // namespace lpopt::subgraph
