#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "lpopt/calibrate.hpp"
#include "lpopt/clmm.hpp"
#include "lpopt/epochs.hpp"
#include "lpopt/error.hpp"
#include "lpopt/lp_model.hpp"
#include "lpopt/market_data.hpp"
#include "lpopt/predictor.hpp"

namespace lpopt {

enum class CapitalMode { Reinvest, NoReinvest, Fixed };

inline std::string_view to_string(CapitalMode m) noexcept {
    switch (m) {
        case CapitalMode::Reinvest: return "reinvest";
        case CapitalMode::NoReinvest: return "no-reinvest";
        case CapitalMode::Fixed: return "fixed";
    }
    return "unknown";
}

inline CapitalMode parse_capital_mode(std::string_view s) {
    if (s == "reinvest") return CapitalMode::Reinvest;
    if (s == "no-reinvest") return CapitalMode::NoReinvest;
    if (s == "fixed") return CapitalMode::Fixed;
    fail(Errc::InvalidArgument, "unknown capital mode '" + std::string(s) + "'");
}

struct PartitionParams {
    double lower_bound = 0.0;  // p_a1
    double width = 10.0;       // d
    std::size_t count = 650;   // N

    BucketPartition build(double tick_size = 0.0) const { return {lower_bound, width, count, tick_size}; }
};

struct BacktestConfig {
    PoolSpec pool;
    PartitionParams partition;
    StrategyShape shape = StrategyShape::plain(5);
    double tvl_in_sample = 80e6;
    double tvl_oot = 40e6;
    double lp_capital = 1e6;
    CalibrationConfig calibration;      // shared grid, tolerance, profile shape
    std::size_t oot_window_n = 2;       // sub-epoch window length out of sample
    bool oot_lrf = true;
    CapitalMode capital_mode = CapitalMode::NoReinvest;
    CostModel cost;
    bool charge_final_burn = false;
    RewardApproach approach = RewardApproach::ShareOfHistorical;
    std::uint64_t seed = 42;
    std::size_t n_candidates = 1000;
    MlpConfig mlp;
    double ensemble_l2 = 0.001;
    double bh_risky_fraction = 1.0;
    std::size_t lookback_bars = 10080;

    BucketPartition build_partition() const { return partition.build(pool.tick_size); }

    CalibrationConfig training_calibration() const {
        auto c = calibration;
        c.tvl = tvl_in_sample;
        c.fee_tier = pool.fee_tier;
        c.lrf_enabled = false;
        return c;
    }

    CalibrationConfig oot_calibration() const {
        auto c = calibration;
        c.tvl = tvl_oot;
        c.fee_tier = pool.fee_tier;
        c.window_n = oot_window_n;
        c.lrf_enabled = oot_lrf;
        return c;
    }

    void validate() const {
        pool.validate();
        build_partition();
        training_calibration().validate();
        oot_calibration().validate();
        require(tvl_in_sample > 0.0 && tvl_oot > 0.0, Errc::InvalidArgument, "TVL must be positive");
        require(lp_capital > 0.0 && std::isfinite(lp_capital), Errc::InvalidArgument, "LP capital must be positive");
        require(cost.gas_mint >= 0.0 && cost.gas_burn >= 0.0 && cost.gas_price_gwei >= 0.0, Errc::InvalidArgument,
                "gas parameters must be non-negative");
        require(n_candidates >= 1, Errc::InvalidArgument, "need at least one candidate strategy");
        require(bh_risky_fraction >= 0.0 && bh_risky_fraction <= 1.0, Errc::InvalidArgument,
                "buy-and-hold risky fraction must lie in [0, 1]");
        require(ensemble_l2 >= 0.0, Errc::InvalidArgument, "ensemble L2 must be non-negative");
        require(mlp.max_epochs >= 1 && mlp.folds >= 1 && mlp.batch_size >= 1 && mlp.learning_rate > 0.0,
                Errc::InvalidArgument, "network training settings are out of range");
        require(lookback_bars >= 1560, Errc::InvalidArgument, "look-back must cover at least 26 hours of minute bars");
    }
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void read_grid(const nlohmann::json& j, Grid& g) {
    read_opt(j, "min", g.min);
    read_opt(j, "max", g.max);
    read_opt(j, "steps", g.steps);
    read_opt(j, "geometric", g.geometric);
}

inline nlohmann::json grid_json(const Grid& g) {
    return {{"min", g.min}, {"max", g.max}, {"steps", g.steps}, {"geometric", g.geometric}};
}

}  // namespace detail

inline BacktestConfig config_from_json(const nlohmann::json& j) {
    using detail::read_opt;
    require(j.is_object(), Errc::InvalidArgument, "config must be a JSON object");
    BacktestConfig c;
    try {
        if (j.contains("pool")) {
            const auto& p = j.at("pool");
            read_opt(p, "fee_tier", c.pool.fee_tier);
            read_opt(p, "tick_size", c.pool.tick_size);
            read_opt(p, "token_a", c.pool.token_a);
            read_opt(p, "token_b", c.pool.token_b);
            read_opt(p, "numeraire", c.pool.numeraire);
        }
        if (j.contains("partition")) {
            const auto& p = j.at("partition");
            read_opt(p, "lower_bound", c.partition.lower_bound);
            read_opt(p, "width", c.partition.width);
            read_opt(p, "count", c.partition.count);
        }
        if (j.contains("shape")) {
            const auto& s = j.at("shape");
            read_opt(s, "tau", c.shape.tau);
            read_opt(s, "eta_up", c.shape.eta_up);
            read_opt(s, "eta_down", c.shape.eta_down);
        }
        read_opt(j, "tvl_in_sample", c.tvl_in_sample);
        read_opt(j, "tvl_oot", c.tvl_oot);
        read_opt(j, "lp_capital", c.lp_capital);
        if (j.contains("calibration")) {
            const auto& k = j.at("calibration");
            read_opt(k, "tolerance", c.calibration.tolerance);
            if (k.contains("mu_grid")) detail::read_grid(k.at("mu_grid"), c.calibration.mu_grid);
            if (k.contains("sigma_grid")) detail::read_grid(k.at("sigma_grid"), c.calibration.sigma_grid);
            if (k.contains("profile_shape")) {
                const auto s = k.at("profile_shape").get<std::string>();
                require(s == "density" || s == "mass", Errc::InvalidArgument, "profile_shape must be density or mass");
                c.calibration.shape = s == "mass" ? ProfileShape::IntegratedMass : ProfileShape::Density;
            }
            read_opt(k, "oot_window_n", c.oot_window_n);
            read_opt(k, "oot_lrf", c.oot_lrf);
        }
        if (j.contains("capital_mode")) c.capital_mode = parse_capital_mode(j.at("capital_mode").get<std::string>());
        if (j.contains("cost")) {
            const auto& k = j.at("cost");
            read_opt(k, "gas_mint", c.cost.gas_mint);
            read_opt(k, "gas_burn", c.cost.gas_burn);
            read_opt(k, "gas_price_gwei", c.cost.gas_price_gwei);
            read_opt(k, "charge_final_burn", c.charge_final_burn);
        }
        if (j.contains("approach")) c.approach = parse_approach(j.at("approach").get<std::string>());
        read_opt(j, "seed", c.seed);
        read_opt(j, "n_candidates", c.n_candidates);
        if (j.contains("mlp")) {
            const auto& m = j.at("mlp");
            read_opt(m, "hidden", c.mlp.hidden);
            read_opt(m, "max_epochs", c.mlp.max_epochs);
            read_opt(m, "patience", c.mlp.patience);
            read_opt(m, "folds", c.mlp.folds);
            read_opt(m, "batch_size", c.mlp.batch_size);
            read_opt(m, "learning_rate", c.mlp.learning_rate);
        }
        read_opt(j, "ensemble_l2", c.ensemble_l2);
        read_opt(j, "bh_risky_fraction", c.bh_risky_fraction);
        read_opt(j, "lookback_bars", c.lookback_bars);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::InvalidArgument, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const BacktestConfig& c) {
    return {
        {"pool",
         {{"fee_tier", c.pool.fee_tier},
          {"tick_size", c.pool.tick_size},
          {"token_a", c.pool.token_a},
          {"token_b", c.pool.token_b},
          {"numeraire", c.pool.numeraire}}},
        {"partition", {{"lower_bound", c.partition.lower_bound}, {"width", c.partition.width}, {"count", c.partition.count}}},
        {"shape", {{"tau", c.shape.tau}, {"eta_up", c.shape.eta_up}, {"eta_down", c.shape.eta_down}}},
        {"tvl_in_sample", c.tvl_in_sample},
        {"tvl_oot", c.tvl_oot},
        {"lp_capital", c.lp_capital},
        {"calibration",
         {{"tolerance", c.calibration.tolerance},
          {"mu_grid", detail::grid_json(c.calibration.mu_grid)},
          {"sigma_grid", detail::grid_json(c.calibration.sigma_grid)},
          {"profile_shape", c.calibration.shape == ProfileShape::IntegratedMass ? "mass" : "density"},
          {"oot_window_n", c.oot_window_n},
          {"oot_lrf", c.oot_lrf}}},
        {"capital_mode", std::string(to_string(c.capital_mode))},
        {"cost",
         {{"gas_mint", c.cost.gas_mint},
          {"gas_burn", c.cost.gas_burn},
          {"gas_price_gwei", c.cost.gas_price_gwei},
          {"charge_final_burn", c.charge_final_burn}}},
        {"approach", std::string(to_string(c.approach))},
        {"seed", c.seed},
        {"n_candidates", c.n_candidates},
        {"mlp",
         {{"hidden", c.mlp.hidden},
          {"max_epochs", c.mlp.max_epochs},
          {"patience", c.mlp.patience},
          {"folds", c.mlp.folds},
          {"batch_size", c.mlp.batch_size},
          {"learning_rate", c.mlp.learning_rate}}},
        {"ensemble_l2", c.ensemble_l2},
        {"bh_risky_fraction", c.bh_risky_fraction},
        {"lookback_bars", c.lookback_bars},
    };
}

inline BacktestConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::IoError, "cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::InvalidArgument, "config '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

}  // namespace lpopt
