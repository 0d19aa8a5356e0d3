#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpopt/calibrate.hpp"
#include "lpopt/config.hpp"
#include "lpopt/csv.hpp"
#include "lpopt/epochs.hpp"
#include "lpopt/error.hpp"
#include "lpopt/features.hpp"
#include "lpopt/lp_model.hpp"
#include "lpopt/market_data.hpp"
#include "lpopt/metrics.hpp"
#include "lpopt/predictor.hpp"
#include "lpopt/strategy.hpp"

namespace lpopt {

/// Re-throws an Error with the pipeline stage prefixed to its message.
template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        fail(e.code(), std::string(stage) + ": " + e.what());
    }
}

// ---- training -------------------------------------------------------------------------------------

struct CalibrationSummary {
    double model_fee = 0.0;
    double hist_fee = 0.0;
    std::size_t best_effort = 0;

    double rel_error() const noexcept { return hist_fee > 0.0 ? std::abs(model_fee - hist_fee) / hist_fee : 0.0; }
};

inline CalibrationSummary summarize(const std::vector<std::vector<CalibrationResult>>& cals) {
    CalibrationSummary s;
    for (const auto& per_epoch : cals)
        for (const auto& c : per_epoch) {
            s.model_fee += c.model_fee;
            s.hist_fee += c.hist_fee;
            s.best_effort += c.best_effort ? 1 : 0;
        }
    return s;
}

/// Whole-epoch calibration of every epoch (one result per epoch).
inline std::vector<std::vector<CalibrationResult>> calibrate_epochs(const PricePath& path, const EpochSet& epochs,
                                                                    const CalibrationConfig& cfg,
                                                                    const BucketPartition& part) {
    std::vector<std::vector<CalibrationResult>> out;
    out.reserve(epochs.count());
    for (const auto& e : epochs) out.push_back({calibrate_epoch(path, e, cfg, part)});
    return out;
}

/// Sub-epoch calibration of every epoch with window length cfg.window_n.
inline std::vector<std::vector<CalibrationResult>> calibrate_epochs_windowed(const PricePath& path,
                                                                             const EpochSet& epochs,
                                                                             const CalibrationConfig& cfg,
                                                                             const BucketPartition& part) {
    std::vector<std::vector<CalibrationResult>> out;
    out.reserve(epochs.count());
    for (const auto& e : epochs) out.push_back(calibrate_subepochs(path, e, cfg, part));
    return out;
}

/// Optimal reduced allocation per epoch; candidates are drawn per epoch from seed + epoch id.
inline std::vector<OptimalRecord> optimize_epochs(const PricePath& path, const EpochSet& epochs,
                                                  const std::vector<std::vector<CalibrationResult>>& cals,
                                                  const BacktestConfig& cfg) {
    require(cals.size() == epochs.count(), Errc::MissingEpoch, "one calibration set per epoch is required");
    const auto part = cfg.build_partition();
    std::vector<OptimalRecord> out;
    out.reserve(epochs.count());
    for (const auto& e : epochs) {
        const EpochRewardModel model(path, e, cals[e.id], part, cfg.pool.fee_tier);
        const auto cands = sample_strategies({cfg.n_candidates, cfg.seed + e.id, cfg.shape.tau});
        out.push_back(find_optimal(e, model, cands, cfg.shape, cfg.lp_capital, cfg.approach));
    }
    return out;
}

inline Matrix to_matrix(const FeatureMatrix& fm) {
    Matrix x(static_cast<Eigen::Index>(fm.size()), static_cast<Eigen::Index>(kFeatureDim));
    for (std::size_t i = 0; i < fm.size(); ++i)
        for (std::size_t k = 0; k < kFeatureDim; ++k)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = fm.rows[i][k];
    return x;
}

inline Matrix to_matrix(const std::vector<ReducedWeights>& rows) {
    require(!rows.empty(), Errc::EmptySeries, "no rows");
    Matrix y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == rows[0].size(), Errc::ShapeMismatch, "ragged target rows");
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return y;
}

struct TrainingArtifacts {
    EpochSet epochs;
    std::vector<std::vector<CalibrationResult>> calibrations;
    CalibrationSummary calibration_summary;
    std::vector<OptimalRecord> records;
    FeatureMatrix features;
    DatasetSplit split;
    Model model;
    double test_mse = 0.0;
    double uniform_test_mse = 0.0;
};

inline TrainingArtifacts run_training_pipeline(const BacktestConfig& cfg, const PricePath& path,
                                               std::span<const OhlcvBar> bars_a, std::span<const OhlcvBar> bars_b) {
    cfg.validate();
    const auto part = cfg.build_partition();
    TrainingArtifacts a;
    a.epochs = run_stage("epochs", [&] { return partition_epochs(path, part, cfg.shape); });
    a.calibrations = run_stage("calibrate", [&] { return calibrate_epochs(path, a.epochs, cfg.training_calibration(), part); });
    a.calibration_summary = summarize(a.calibrations);
    a.records = run_stage("optimize", [&] { return optimize_epochs(path, a.epochs, a.calibrations, cfg); });
    a.features = run_stage("features", [&] { return build_feature_matrix(a.epochs, path, bars_a, bars_b, cfg.lookback_bars); });
    run_stage("train", [&] {
        const Matrix x = to_matrix(a.features);
        const Matrix y = to_matrix(build_targets(a.records, a.epochs.count()));
        a.split = split_dataset(x, y);
        a.model = train_mlp(a.split, cfg.mlp, cfg.seed);
        a.model.tau = cfg.shape.tau;
        a.test_mse = Mlp::mse(predict(a.model, a.split.x_test), a.split.y_test);
        const auto uni = uniform_reduced(cfg.shape.tau);
        const RowVector u = Eigen::Map<const RowVector>(uni.data(), static_cast<Eigen::Index>(uni.size()));
        a.uniform_test_mse = Mlp::mse(u.replicate(a.split.y_test.rows(), 1), a.split.y_test);
        return 0;
    });
    return a;
}

// ---- out-of-sample replay ---------------------------------------------------------------------------

struct EpochLedgerEntry {
    std::size_t epoch_id = 0;
    Timestamp start_ts = 0;
    Timestamp end_ts = 0;
    double open_price = 0.0;
    double close_price = 0.0;
    std::size_t ref_bucket = 0;
    ReducedWeights rho;
    double lp_fee = 0.0;
    double gas = 0.0;
    double w_begin = 0.0;
    double w_deployed = 0.0;
    double position_end = 0.0;  // deployed liquidity marked at the closing price
    double w_end = 0.0;
    std::size_t lrf_zeroed = 0;
    std::size_t windows = 0;
};

struct StrategyRun {
    std::string name;
    double w0 = 0.0;
    std::vector<EpochLedgerEntry> ledger;
    std::vector<CapitalPoint> capital;  // total wealth: deployed position, accrued and banked fees
    Metrics metrics;
    double total_fees = 0.0;
    double total_costs = 0.0;
    bool depleted = false;
};

/// Allocation chosen for an epoch.
using AllocationRule = std::function<ReducedWeights(const Epoch&)>;

/// Calibrated reward models for every epoch of an out-of-sample path; shared by all strategies.
inline std::vector<EpochRewardModel> oot_reward_models(const PricePath& path, const EpochSet& epochs,
                                                       const BacktestConfig& cfg) {
    const auto part = cfg.build_partition();
    const auto cal_cfg = cfg.oot_calibration();
    std::vector<EpochRewardModel> out;
    out.reserve(epochs.count());
    for (const auto& e : epochs)
        out.emplace_back(path, e, calibrate_subepochs(path, e, cal_cfg, part), part, cfg.pool.fee_tier);
    return out;
}

/// Sequential replay of one strategy. Wealth splits into the deployed position and cash held outside it
/// (banked fees in no-reinvest mode, running profit in fixed mode).
inline StrategyRun run_strategy(const std::string& name, const PricePath& path, const EpochSet& epochs,
                                const std::vector<EpochRewardModel>& models, const BacktestConfig& cfg,
                                const AllocationRule& rule) {
    require(models.size() == epochs.count(), Errc::MissingEpoch, "one reward model per epoch is required");
    const auto part = cfg.build_partition();
    StrategyRun run;
    run.name = name;
    run.w0 = cfg.lp_capital;
    double wealth = cfg.lp_capital;
    double prev_w_end = cfg.lp_capital;
    std::optional<LiquidityProfile> prev_profile;
    run.capital.push_back({path.timestamp(0), wealth});

    for (const auto& e : epochs) {
        const auto& model = models[e.id];
        EpochLedgerEntry row;
        row.epoch_id = e.id;
        row.start_ts = path.timestamp(e.start_idx);
        row.end_ts = path.timestamp(e.end_idx);
        row.open_price = model.open_price();
        row.close_price = model.close_price();
        row.ref_bucket = e.ref_bucket;
        row.rho = rule(e);
        row.windows = model.window_count();
        row.lrf_zeroed = model.lrf_zeroed();

        switch (cfg.capital_mode) {
            case CapitalMode::Reinvest:
            case CapitalMode::NoReinvest: row.w_begin = prev_w_end; break;
            case CapitalMode::Fixed: row.w_begin = cfg.lp_capital; break;
        }
        const double outside = wealth - row.w_begin;

        const auto sizing = make_allocation(std::max(row.w_begin, 0.0), row.rho, cfg.shape, e.ref_bucket, part.size());
        const auto ops = count_gas_ops(prev_profile ? &*prev_profile : nullptr, lp_profile(sizing, row.open_price, part));
        row.gas = gas_cost(ops, cfg.cost, row.open_price);
        row.w_deployed = row.w_begin - row.gas;
        run.total_costs += row.gas;
        if (row.w_deployed <= 0.0) {
            run.depleted = true;
            row.w_deployed = 0.0;
            row.w_end = 0.0;
            wealth = std::max(outside, 0.0);
            run.ledger.push_back(row);
            run.capital.push_back({row.start_ts, wealth});
            break;
        }

        const auto alloc = make_allocation(row.w_deployed, row.rho, cfg.shape, e.ref_bucket, part.size());
        const auto lp = lp_profile(alloc, row.open_price, part);
        run.capital.push_back({row.start_ts, outside + position_value(lp, row.open_price, part)});

        ReserveState accrued;
        for (std::size_t j = 0; j < model.window_count(); ++j) {
            accrued += model.window_fee_tokens(j, lp, cfg.approach);
            const std::size_t k = model.calibrations()[j].end_idx;
            const double p = path.price(k);
            run.capital.push_back({path.timestamp(k), outside + position_value(lp, p, part) + mark(accrued, p)});
        }
        row.lp_fee = mark(accrued, row.close_price);
        row.position_end = position_value(lp, row.close_price, part);
        run.total_fees += row.lp_fee;

        const bool reinvest = cfg.capital_mode == CapitalMode::Reinvest;
        row.w_end = row.position_end + (reinvest ? row.lp_fee : 0.0);
        wealth = outside + row.position_end + row.lp_fee;
        prev_w_end = row.w_end;
        prev_profile = lp;
        run.ledger.push_back(row);
    }

    if (cfg.charge_final_burn && prev_profile && !run.depleted) {
        const auto ops = count_gas_ops(&*prev_profile, LiquidityProfile(part.size()));
        const double g = gas_cost(ops, cfg.cost, path.prices().back());
        run.total_costs += g;
        wealth -= g;
        run.ledger.back().w_end -= g;
        run.capital.push_back({path.timestamp(path.last_index()), wealth});
    }
    run.metrics = compute_metrics(run.capital, run.w0);
    return run;
}

/// Converts W0 at the first price into a risky fraction f and marks it at every swap.
inline StrategyRun run_buy_and_hold(const PricePath& path, double w0, double risky_fraction) {
    require(risky_fraction >= 0.0 && risky_fraction <= 1.0, Errc::InvalidArgument, "risky fraction must lie in [0, 1]");
    StrategyRun run;
    run.name = "buy-and-hold";
    run.w0 = w0;
    const double x = risky_fraction * w0 / path.price(0);
    const double y = (1.0 - risky_fraction) * w0;
    run.capital.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) run.capital.push_back({path.timestamp(i), y + x * path.price(i)});
    run.metrics = compute_metrics(run.capital, w0);
    return run;
}

struct OotResult {
    EpochSet epochs;
    StrategyRun ml;
    StrategyRun uniform;
    StrategyRun buy_and_hold;
    CalibrationSummary calibration_summary;
};

/// Replays ML allocations (one row of `predictions` per epoch) against the uniform benchmark and buy-and-hold.
inline OotResult run_oot_backtest(const BacktestConfig& cfg, const PricePath& path, const Matrix& predictions) {
    cfg.validate();
    const auto part = cfg.build_partition();
    OotResult r;
    r.epochs = run_stage("epochs", [&] { return partition_epochs(path, part, cfg.shape); });
    require(static_cast<std::size_t>(predictions.rows()) == r.epochs.count(), Errc::EpochMismatch,
            "prediction rows (" + std::to_string(predictions.rows()) + ") differ from epoch count (" +
                std::to_string(r.epochs.count()) + ")");
    require(static_cast<std::size_t>(predictions.cols()) == cfg.shape.tau + 1, Errc::ShapeMismatch,
            "prediction width differs from tau+1");
    const auto models = run_stage("calibrate", [&] { return oot_reward_models(path, r.epochs, cfg); });
    {
        std::vector<std::vector<CalibrationResult>> cals;
        for (const auto& m : models) cals.push_back(m.calibrations());
        r.calibration_summary = summarize(cals);
    }
    const auto uniform = uniform_reduced(cfg.shape.tau);
    r.ml = run_stage("backtest", [&] {
        return run_strategy("ml", path, r.epochs, models, cfg, [&](const Epoch& e) {
            ReducedWeights rho(cfg.shape.tau + 1);
            double sum = 0.0;
            for (std::size_t k = 0; k <= cfg.shape.tau; ++k) {
                rho[k] = std::max(predictions(static_cast<Eigen::Index>(e.id), static_cast<Eigen::Index>(k)), 0.0);
                sum += rho[k];
            }
            require(sum > 0.0 && std::isfinite(sum), Errc::NonfiniteResult, "prediction row is not a distribution");
            for (auto& v : rho) v /= sum;
            return rho;
        });
    });
    r.uniform = run_stage("backtest", [&] {
        return run_strategy("uniform", path, r.epochs, models, cfg, [&](const Epoch&) { return uniform; });
    });
    r.buy_and_hold = run_buy_and_hold(path, cfg.lp_capital, cfg.bh_risky_fraction);
    return r;
}

/// Predictions for OOT epochs from a trained model and minute bars.
inline Matrix model_predictions(const Model& model, const BacktestConfig& cfg, const PricePath& path,
                                const EpochSet& epochs, std::span<const OhlcvBar> bars_a,
                                std::span<const OhlcvBar> bars_b) {
    require(model.tau == cfg.shape.tau, Errc::ShapeMismatch, "model tau differs from the configured tau");
    const auto fm = run_stage("features", [&] { return build_feature_matrix(epochs, path, bars_a, bars_b, cfg.lookback_bars); });
    return predict(model, to_matrix(fm));
}

// ---- stage artifacts --------------------------------------------------------------------------------

inline void write_epochs(std::ostream& os, const EpochSet& epochs, const PricePath& path) {
    os << "epoch_id,start_idx,end_idx,start_ts,end_ts,ref_bucket,duration,degenerate\n";
    for (const auto& e : epochs)
        os << e.id << ',' << e.start_idx << ',' << e.end_idx << ',' << path.timestamp(e.start_idx) << ','
           << path.timestamp(e.end_idx) << ',' << e.ref_bucket << ',' << e.duration << ',' << (e.degenerate ? 1 : 0)
           << '\n';
}

/// One row per calibrated window; profiles are rebuilt from (mu, sigma) on load.
inline void write_calibrations(std::ostream& os, const std::vector<std::vector<CalibrationResult>>& cals) {
    os << "epoch_id,window,start_idx,end_idx,mu,sigma,model_fee,hist_fee,rel_error,best_effort,lrf\n";
    for (std::size_t e = 0; e < cals.size(); ++e)
        for (std::size_t j = 0; j < cals[e].size(); ++j) {
            const auto& c = cals[e][j];
            os << e << ',' << j << ',' << c.start_idx << ',' << c.end_idx << ',' << csv::fmt(c.params.mu) << ','
               << csv::fmt(c.params.sigma) << ',' << csv::fmt(c.model_fee) << ',' << csv::fmt(c.hist_fee) << ','
               << csv::fmt(c.rel_error) << ',' << (c.best_effort ? 1 : 0) << ',' << (c.lrf_flag ? 1 : 0) << '\n';
        }
}

inline std::vector<std::vector<CalibrationResult>> read_calibrations(std::istream& is, const PricePath& path,
                                                                     const EpochSet& epochs,
                                                                     const CalibrationConfig& cfg,
                                                                     const BucketPartition& part) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && csv::split(line).size() == 11, Errc::MalformedRecord,
            "calibration header must be epoch_id,window,start_idx,end_idx,mu,sigma,model_fee,hist_fee,rel_error,"
            "best_effort,lrf");
    std::vector<std::vector<CalibrationResult>> out(epochs.count());
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto c = csv::split(line);
        const std::string where = "calibration line " + std::to_string(lineno);
        require(c.size() == 11, Errc::MalformedRecord, where + ": expected 11 fields");
        std::int64_t id = 0, start = 0, end = 0, best = 0;
        GaussianParams g;
        double hist = 0.0;
        require(csv::parse(c[0], id) && csv::parse(c[2], start) && csv::parse(c[3], end) && csv::parse(c[4], g.mu) &&
                    csv::parse(c[5], g.sigma) && csv::parse(c[7], hist) && csv::parse(c[9], best),
                Errc::MalformedRecord, where + ": malformed field");
        require(id >= 0 && static_cast<std::size_t>(id) < epochs.count(), Errc::EpochMismatch,
                where + ": unknown epoch " + std::to_string(id));
        const auto& e = epochs[static_cast<std::size_t>(id)];
        require(start >= static_cast<std::int64_t>(e.start_idx) && end <= static_cast<std::int64_t>(e.end_idx) &&
                    start <= end,
                Errc::EpochMismatch, where + ": window lies outside its epoch");
        std::vector<double> prices;
        if (e.degenerate) {
            prices = epoch_prices(path, e);
        } else {
            const auto all = path.prices();
            prices.assign(all.begin() + start, all.begin() + end + 1);
        }
        auto r = finish_calibration(prices, g, hist, best != 0, cfg, part);
        r.start_idx = static_cast<std::size_t>(start);
        r.end_idx = static_cast<std::size_t>(end);
        out[static_cast<std::size_t>(id)].push_back(std::move(r));
    }
    for (std::size_t e = 0; e < out.size(); ++e)
        require(!out[e].empty(), Errc::MissingEpoch, "no calibration for epoch " + std::to_string(e));
    return out;
}

// ---- comparison and reports ------------------------------------------------------------------------

struct ComparisonRow {
    std::size_t tau = 0;
    std::size_t epochs = 0;
    double fees_ml = 0.0;
    double fees_uniform = 0.0;
    std::optional<double> efficiency_pct;  // absent when the uniform fee is zero and the ML fee is not
    double costs_ml = 0.0;
    double costs_uniform = 0.0;
    Metrics ml, uniform, buy_and_hold;
};

inline ComparisonRow compare_strategies(const StrategyRun& ml, const StrategyRun& uniform, const StrategyRun& bh,
                                        std::size_t tau, std::size_t epochs) {
    auto same_period = [](const StrategyRun& a, const StrategyRun& b) {
        return a.w0 == b.w0 && !a.capital.empty() && !b.capital.empty() &&
               a.capital.front().timestamp == b.capital.front().timestamp &&
               (a.depleted || b.depleted || a.capital.back().timestamp == b.capital.back().timestamp);
    };
    require(same_period(ml, uniform) && same_period(ml, bh), Errc::PeriodMismatch,
            "strategies cover different periods or initial capital");
    ComparisonRow c;
    c.tau = tau;
    c.epochs = epochs;
    c.fees_ml = ml.total_fees;
    c.fees_uniform = uniform.total_fees;
    if (uniform.total_fees > 0.0)
        c.efficiency_pct = 100.0 * (ml.total_fees - uniform.total_fees) / uniform.total_fees;
    else if (ml.total_fees == uniform.total_fees)
        c.efficiency_pct = 0.0;
    c.costs_ml = ml.total_costs;
    c.costs_uniform = uniform.total_costs;
    c.ml = ml.metrics;
    c.uniform = uniform.metrics;
    c.buy_and_hold = bh.metrics;
    return c;
}

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline std::string opt_csv(const std::optional<double>& v) { return v ? csv::fmt(*v) : std::string(); }

inline nlohmann::json metrics_json(const Metrics& m) {
    return {{"final_capital", m.final_capital},
            {"cagr", m.cagr},
            {"max_drawdown", m.max_drawdown},
            {"sharpe", opt_json(m.sharpe)},
            {"days", m.days_resampled}};
}

inline nlohmann::json run_json(const StrategyRun& r) {
    return {{"name", r.name},
            {"initial_capital", r.w0},
            {"total_fees", r.total_fees},
            {"total_costs", r.total_costs},
            {"depleted", r.depleted},
            {"epochs", r.ledger.size()},
            {"metrics", metrics_json(r.metrics)}};
}

}  // namespace detail

inline void write_ledger(std::ostream& os, const StrategyRun& run) {
    os << "epoch_id,start_ts,end_ts,open_price,close_price,ref_bucket,rho,lp_fee,gas,w_begin,w_deployed,"
          "position_end,w_end,lrf_zeroed,windows\n";
    for (const auto& e : run.ledger) {
        std::string rho;
        for (std::size_t k = 0; k < e.rho.size(); ++k) rho += (k ? ";" : "") + csv::fmt(e.rho[k]);
        os << e.epoch_id << ',' << e.start_ts << ',' << e.end_ts << ',' << csv::fmt(e.open_price) << ','
           << csv::fmt(e.close_price) << ',' << e.ref_bucket << ',' << rho << ',' << csv::fmt(e.lp_fee) << ','
           << csv::fmt(e.gas) << ',' << csv::fmt(e.w_begin) << ',' << csv::fmt(e.w_deployed) << ','
           << csv::fmt(e.position_end) << ',' << csv::fmt(e.w_end) << ',' << e.lrf_zeroed << ',' << e.windows << '\n';
    }
}

inline void write_capital(std::ostream& os, const StrategyRun& run) {
    os << "timestamp,capital\n";
    for (const auto& p : run.capital) os << p.timestamp << ',' << csv::fmt(p.capital) << '\n';
}

inline std::vector<CapitalPoint> read_capital(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && csv::header_matches(line, {"timestamp", "capital"}),
            Errc::MalformedRecord, "capital file header must be timestamp,capital");
    std::vector<CapitalPoint> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        CapitalPoint p;
        require(cells.size() == 2 && csv::parse(cells[0], p.timestamp) && csv::parse(cells[1], p.capital),
                Errc::MalformedRecord, "capital line " + std::to_string(lineno) + " is malformed");
        out.push_back(p);
    }
    return out;
}

inline void write_comparison(std::ostream& os, const std::vector<ComparisonRow>& rows) {
    os << "tau,epochs,fees_ml,fees_uniform,efficiency_pct,costs_ml,costs_uniform,final_ml,final_uniform,final_bh,"
          "cagr_ml,cagr_uniform,cagr_bh,mdd_ml,mdd_uniform,mdd_bh,sharpe_ml,sharpe_uniform,sharpe_bh\n";
    for (const auto& r : rows) {
        os << r.tau << ',' << r.epochs << ',' << csv::fmt(r.fees_ml) << ',' << csv::fmt(r.fees_uniform) << ','
           << detail::opt_csv(r.efficiency_pct) << ',' << csv::fmt(r.costs_ml) << ',' << csv::fmt(r.costs_uniform)
           << ',' << csv::fmt(r.ml.final_capital) << ',' << csv::fmt(r.uniform.final_capital) << ','
           << csv::fmt(r.buy_and_hold.final_capital) << ',' << csv::fmt(r.ml.cagr) << ',' << csv::fmt(r.uniform.cagr)
           << ',' << csv::fmt(r.buy_and_hold.cagr) << ',' << csv::fmt(r.ml.max_drawdown) << ','
           << csv::fmt(r.uniform.max_drawdown) << ',' << csv::fmt(r.buy_and_hold.max_drawdown) << ','
           << detail::opt_csv(r.ml.sharpe) << ',' << detail::opt_csv(r.uniform.sharpe) << ','
           << detail::opt_csv(r.buy_and_hold.sharpe) << '\n';
    }
}

/// summary.json, ledger_<run>.csv, capital_<run>.csv and comparison.csv under `out_dir`.
inline void emit_reports(const std::filesystem::path& out_dir, const std::vector<const StrategyRun*>& runs,
                         const std::vector<ComparisonRow>& comparison, const nlohmann::json& extra = {}) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    require(!ec, Errc::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
    nlohmann::json summary;
    summary["runs"] = nlohmann::json::array();
    for (const auto* r : runs) {
        summary["runs"].push_back(detail::run_json(*r));
        {
            auto os = csv::open_out((out_dir / ("ledger_" + r->name + ".csv")).string());
            write_ledger(os, *r);
        }
        auto os = csv::open_out((out_dir / ("capital_" + r->name + ".csv")).string());
        write_capital(os, *r);
    }
    summary["comparison"] = nlohmann::json::array();
    for (const auto& c : comparison)
        summary["comparison"].push_back({{"tau", c.tau},
                                         {"epochs", c.epochs},
                                         {"fees_ml", c.fees_ml},
                                         {"fees_uniform", c.fees_uniform},
                                         {"efficiency_pct", detail::opt_json(c.efficiency_pct)},
                                         {"costs_ml", c.costs_ml},
                                         {"costs_uniform", c.costs_uniform}});
    if (!extra.is_null()) summary["details"] = extra;
    {
        auto os = csv::open_out((out_dir / "comparison.csv").string());
        write_comparison(os, comparison);
    }
    auto os = csv::open_out((out_dir / "summary.json").string());
    os << summary.dump(2) << '\n';
    require(os.good(), Errc::IoError, "failed writing reports to '" + out_dir.string() + "'");
}

}  // namespace lpopt
