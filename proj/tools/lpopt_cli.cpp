// lpopt: pipeline stages for liquidity-allocation research on CLMM pools.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

// Eigen must come before httplib: <resolv.h> defines a _res macro that collides with Eigen internals.
#include "lpopt/backtest.hpp"
#include "lpopt/subgraph.hpp"

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace lpopt;
using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "lpopt_out";

    BacktestConfig config() const {
        BacktestConfig c = config_path.empty() ? BacktestConfig{} : load_config(config_path);
        if (seed) c.seed = *seed;
        c.validate();
        return c;
    }

    std::string out(const std::string& name) const {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        require(!ec, Errc::IoError, "cannot create '" + out_dir + "': " + ec.message());
        return (fs::path(out_dir) / name).string();
    }

    std::string in_or_out(const std::string& given, const std::string& name) const {
        return given.empty() ? (fs::path(out_dir) / name).string() : given;
    }
};

void write_json(const std::string& path, const json& j) {
    auto os = csv::open_out(path);
    os << j.dump(2) << '\n';
    require(os.good(), Errc::IoError, "failed writing '" + path + "'");
}

json read_json(const std::string& path) {
    auto is = csv::open_in(path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        fail(Errc::MalformedRecord, path + ": " + e.what());
    }
}

PricePath load_path(const std::string& file, const BacktestConfig& cfg, bool sort) {
    return load_swaps(file, cfg.pool, {sort});
}

std::map<std::string, std::string> parse_members(const std::vector<std::string>& specs) {
    std::map<std::string, std::string> out;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        require(eq != std::string::npos && eq > 0 && eq + 1 < s.size(), Errc::InvalidArgument,
                "member must be given as name=file, got '" + s + "'");
        const auto name = s.substr(0, eq);
        require(name != "mlp", Errc::InvalidArgument, "member name 'mlp' is reserved for the reference network");
        out[name] = s.substr(eq + 1);
    }
    return out;
}

// ---- stages -----------------------------------------------------------------------------------------

struct IngestArgs {
    std::string pool;
    Timestamp from = 0, to = 0;
    std::string endpoint;
    int page_size = 1000;
    std::string cursor = "id";
};

int cmd_ingest(const Globals& g, const IngestArgs& a) {
    std::string endpoint = a.endpoint;
    if (endpoint.empty())
        if (const char* e = std::getenv("LPOPT_SUBGRAPH_URL")) endpoint = e;
    require(!endpoint.empty(), Errc::InvalidArgument, "no endpoint: pass --endpoint or set LPOPT_SUBGRAPH_URL");
    const auto scheme_end = endpoint.find("://");
    require(scheme_end != std::string::npos, Errc::InvalidArgument, "endpoint must be an http(s) URL");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    const std::string host = endpoint.substr(0, path_start);
    const std::string route = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(host);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv("LPOPT_SUBGRAPH_TOKEN")) headers.emplace("Authorization", std::string("Bearer ") + token);
    subgraph::Transport transport = [&](const std::string& body) {
        auto res = client.Post(route, headers, body, "application/json");
        if (!res) fail(Errc::NetworkError, "request failed: " + httplib::to_string(res.error()));
        if (res->status >= 500 || res->status == 429) fail(Errc::NetworkError, "HTTP " + std::to_string(res->status));
        require(res->status == 200, Errc::MalformedRecord, "HTTP " + std::to_string(res->status) + ": " + res->body);
        return res->body;
    };
    subgraph::Config sc;
    sc.page_size = a.page_size;
    sc.cursor_field = a.cursor;
    const auto path = subgraph::fetch_swaps(transport, a.pool, a.from, a.to, sc);
    const auto file = g.out("swaps.csv");
    auto os = csv::open_out(file);
    write_swaps(os, path);
    std::cout << "ingested " << path.size() << " swaps -> " << file << '\n';
    return 0;
}

struct DataArgs {
    std::string swaps;
    std::string bars_a, bars_b;
    bool sort = false;
};

int cmd_epochs(const Globals& g, const DataArgs& d) {
    const auto cfg = g.config();
    const auto path = load_path(d.swaps, cfg, d.sort);
    const auto epochs = partition_epochs(path, cfg.build_partition(), cfg.shape);
    auto os = csv::open_out(g.out("epochs.csv"));
    write_epochs(os, epochs, path);
    std::cout << "K = " << epochs.count() << " epochs\n";
    return 0;
}

int cmd_calibrate(const Globals& g, const DataArgs& d, bool oot) {
    const auto cfg = g.config();
    const auto path = load_path(d.swaps, cfg, d.sort);
    const auto part = cfg.build_partition();
    const auto epochs = run_stage("epochs", [&] { return partition_epochs(path, part, cfg.shape); });
    const auto cals = run_stage("calibrate", [&] {
        return oot ? calibrate_epochs_windowed(path, epochs, cfg.oot_calibration(), part)
                   : calibrate_epochs(path, epochs, cfg.training_calibration(), part);
    });
    {
        auto os = csv::open_out(g.out("calibration.csv"));
        write_calibrations(os, cals);
    }
    const auto s = summarize(cals);
    write_json(g.out("calibration_summary.json"), {{"format_version", 1},
                                                   {"mode", oot ? "oot" : "in-sample"},
                                                   {"epochs", epochs.count()},
                                                   {"model_fee", s.model_fee},
                                                   {"hist_fee", s.hist_fee},
                                                   {"rel_error", s.rel_error()},
                                                   {"best_effort_windows", s.best_effort}});
    std::printf("K = %zu, model fee %.2f vs historical %.2f (error %.2f%%), best-effort windows %zu\n", epochs.count(),
                s.model_fee, s.hist_fee, 100.0 * s.rel_error(), s.best_effort);
    return 0;
}

int cmd_optimize(const Globals& g, const DataArgs& d, const std::string& cal_file) {
    const auto cfg = g.config();
    const auto path = load_path(d.swaps, cfg, d.sort);
    const auto part = cfg.build_partition();
    const auto epochs = run_stage("epochs", [&] { return partition_epochs(path, part, cfg.shape); });
    auto is = csv::open_in(g.in_or_out(cal_file, "calibration.csv"));
    const auto cals = run_stage("calibrate", [&] { return read_calibrations(is, path, epochs, cfg.training_calibration(), part); });
    const auto records = run_stage("optimize", [&] { return optimize_epochs(path, epochs, cals, cfg); });
    auto os = csv::open_out(g.out("targets.csv"));
    write_targets(os, records, cfg.shape.tau);
    std::size_t improved = 0;
    for (const auto& r : records) improved += r.fee_star > r.uniform_fee ? 1 : 0;
    std::cout << "optimal allocations for " << records.size() << " epochs (" << improved << " beat uniform)\n";
    return 0;
}

int cmd_features(const Globals& g, const DataArgs& d) {
    const auto cfg = g.config();
    const auto path = load_path(d.swaps, cfg, d.sort);
    const auto epochs = run_stage("epochs", [&] { return partition_epochs(path, cfg.build_partition(), cfg.shape); });
    const auto a = load_bars(d.bars_a), b = load_bars(d.bars_b);
    const auto fm = run_stage("features", [&] { return build_feature_matrix(epochs, path, a, b, cfg.lookback_bars); });
    auto os = csv::open_out(g.out("features.csv"));
    write_features(os, fm);
    std::cout << "feature matrix " << fm.size() << " x " << kFeatureDim << '\n';
    return 0;
}

int cmd_train(const Globals& g, const std::string& feat_file, const std::string& target_file,
              const std::vector<std::string>& member_specs) {
    const auto cfg = g.config();
    auto fis = csv::open_in(g.in_or_out(feat_file, "features.csv"));
    const auto fm = read_features(fis);
    auto tis = csv::open_in(g.in_or_out(target_file, "targets.csv"));
    const auto records = read_targets(tis);
    for (std::size_t i = 0; i < fm.size(); ++i)
        require(fm.epoch_ids[i] == i, Errc::EpochMismatch, "feature rows must list epochs 0..K-1 in order");
    const auto y = to_matrix(build_targets(records, fm.size()));
    require(static_cast<std::size_t>(y.cols()) == cfg.shape.tau + 1, Errc::ShapeMismatch,
            "target width differs from the configured tau");
    const auto split = run_stage("train", [&] { return split_dataset(to_matrix(fm), y); });
    auto model = run_stage("train", [&] { return train_mlp(split, cfg.mlp, cfg.seed); });
    model.tau = cfg.shape.tau;
    const double mse = Mlp::mse(predict(model, split.x_test), split.y_test);
    const auto uni = uniform_reduced(cfg.shape.tau);
    const RowVector u = Eigen::Map<const RowVector>(uni.data(), static_cast<Eigen::Index>(uni.size()));
    const double uni_mse = Mlp::mse(u.replicate(split.y_test.rows(), 1), split.y_test);
    write_json(g.out("model.json"), model_to_json(model));

    json ens = {{"format_version", 1}, {"l2", cfg.ensemble_l2}, {"members", json::array()}};
    const auto members = parse_members(member_specs);
    if (members.empty()) {
        ens["members"].push_back({{"name", "mlp"}, {"weight", 1.0}});
    } else {
        const auto n_train = static_cast<std::size_t>(split.x_train.rows());
        std::vector<std::size_t> train_ids(fm.epoch_ids.begin(), fm.epoch_ids.begin() + static_cast<long>(n_train));
        std::vector<Matrix> preds{predict(model, split.x_train)};
        std::vector<std::string> names{"mlp"};
        for (const auto& [name, file] : members) {
            auto is = csv::open_in(file);
            preds.push_back(run_stage("ensemble", [&] { return external_predictions(is, train_ids, cfg.shape.tau); }));
            names.push_back(name);
        }
        const auto fit = run_stage("ensemble", [&] { return fit_ensemble(preds, split.y_train, cfg.ensemble_l2); });
        for (std::size_t j = 0; j < names.size(); ++j) ens["members"].push_back({{"name", names[j]}, {"weight", fit.weights[j]}});
        ens["train_objective"] = fit.objective;
    }
    write_json(g.out("ensemble.json"), ens);

    json folds = json::array();
    for (const auto& f : model.folds)
        folds.push_back({{"fold", f.fold}, {"epochs_run", f.epochs_run}, {"best_val_loss", f.best_val_loss}});
    write_json(g.out("train_summary.json"), {{"format_version", 1},
                                             {"rows_train", split.x_train.rows()},
                                             {"rows_test", split.x_test.rows()},
                                             {"test_mse", mse},
                                             {"uniform_test_mse", uni_mse},
                                             {"chosen_fold", model.chosen_fold},
                                             {"folds", folds}});
    std::printf("trained on %ld rows; test MSE %.4g (uniform %.4g)\n", static_cast<long>(split.x_train.rows()), mse, uni_mse);
    return 0;
}

/// ML allocations for OOT epochs: a predictions file, or the trained model blended with any members.
Matrix oot_predictions(const BacktestConfig& cfg, const PricePath& path, const EpochSet& epochs, const DataArgs& d,
                       const std::string& model_file, const std::string& pred_file,
                       const std::vector<std::string>& member_specs) {
    std::vector<std::size_t> ids;
    for (const auto& e : epochs) ids.push_back(e.id);
    if (!pred_file.empty()) {
        auto is = csv::open_in(pred_file);
        return external_predictions(is, ids, cfg.shape.tau);
    }
    require(!d.bars_a.empty() && !d.bars_b.empty(), Errc::InvalidArgument,
            "model predictions need --bars-a and --bars-b (or pass --predictions)");
    const auto model = model_from_json(read_json(model_file));
    const auto a = load_bars(d.bars_a), b = load_bars(d.bars_b);
    Matrix mlp = model_predictions(model, cfg, path, epochs, a, b);
    const auto members = parse_members(member_specs);
    if (members.empty()) return mlp;
    const auto ens_file = (fs::path(model_file).parent_path() / "ensemble.json").string();
    const auto ens = read_json(ens_file);
    std::map<std::string, double> weight;
    for (const auto& m : ens.at("members")) weight[m.at("name").get<std::string>()] = m.at("weight").get<double>();
    require(weight.size() == members.size() + 1, Errc::InvalidArgument,
            "members differ from those the ensemble was fitted with in " + ens_file);
    std::vector<Matrix> preds{mlp};
    std::vector<double> w{weight.at("mlp")};
    for (const auto& [name, file] : members) {
        require(weight.count(name) == 1, Errc::InvalidArgument, "member '" + name + "' has no fitted weight");
        auto is = csv::open_in(file);
        preds.push_back(external_predictions(is, ids, cfg.shape.tau));
        w.push_back(weight.at(name));
    }
    return blend(preds, w);
}

void emit_oot(const std::string& dir, const OotResult& r, const BacktestConfig& cfg, std::vector<ComparisonRow>& rows) {
    rows.push_back(compare_strategies(r.ml, r.uniform, r.buy_and_hold, cfg.shape.tau, r.epochs.count()));
    const json extra = {{"format_version", 1},
                        {"config", config_to_json(cfg)},
                        {"calibration", {{"model_fee", r.calibration_summary.model_fee},
                                         {"hist_fee", r.calibration_summary.hist_fee},
                                         {"rel_error", r.calibration_summary.rel_error()},
                                         {"best_effort_windows", r.calibration_summary.best_effort}}}};
    emit_reports(dir, {&r.ml, &r.uniform, &r.buy_and_hold}, {rows.back()}, extra);
}

void print_row(const ComparisonRow& c) {
    char eff[32] = "n/a";
    if (c.efficiency_pct) std::snprintf(eff, sizeof eff, "%.2f%%", *c.efficiency_pct);
    std::printf("tau=%zu K=%zu  fees ml %.2f uniform %.2f  efficiency %s  final ml %.2f uniform %.2f b&h %.2f\n", c.tau,
                c.epochs, c.fees_ml, c.fees_uniform, eff, c.ml.final_capital, c.uniform.final_capital,
                c.buy_and_hold.final_capital);
}

int cmd_backtest(const Globals& g, const DataArgs& d, const std::string& model_file, const std::string& pred_file,
                 const std::vector<std::string>& members) {
    const auto cfg = g.config();
    const auto path = load_path(d.swaps, cfg, d.sort);
    const auto epochs = run_stage("epochs", [&] { return partition_epochs(path, cfg.build_partition(), cfg.shape); });
    const auto preds = oot_predictions(cfg, path, epochs, d, g.in_or_out(model_file, "model.json"), pred_file, members);
    const auto r = run_oot_backtest(cfg, path, preds);
    std::vector<ComparisonRow> rows;
    emit_oot(g.out_dir, r, cfg, rows);
    print_row(rows.back());
    return 0;
}

int cmd_report(const Globals& g) {
    const auto summary = read_json((fs::path(g.out_dir) / "summary.json").string());
    std::ostringstream out;
    out << "run            final capital        fees       costs         CAGR       MDD    Sharpe\n";
    for (const auto& r : summary.at("runs")) {
        const auto& m = r.at("metrics");
        char line[256];
        char sharpe[32] = "-";
        if (!m.at("sharpe").is_null()) std::snprintf(sharpe, sizeof sharpe, "%.3f", m.at("sharpe").get<double>());
        std::snprintf(line, sizeof line, "%-14s %13.2f %11.2f %11.2f %12.4g %9.4f  %s\n",
                      r.at("name").get<std::string>().c_str(), m.at("final_capital").get<double>(),
                      r.at("total_fees").get<double>(), r.at("total_costs").get<double>(), m.at("cagr").get<double>(),
                      m.at("max_drawdown").get<double>(), sharpe);
        out << line;
    }
    out << "\ntau   epochs      fees ml   fees uniform   efficiency %\n";
    for (const auto& c : summary.at("comparison")) {
        char line[256];
        char eff[32] = "-";
        if (!c.at("efficiency_pct").is_null()) std::snprintf(eff, sizeof eff, "%.2f", c.at("efficiency_pct").get<double>());
        std::snprintf(line, sizeof line, "%-5zu %6zu %12.2f %14.2f   %s\n", c.at("tau").get<std::size_t>(),
                      c.at("epochs").get<std::size_t>(), c.at("fees_ml").get<double>(),
                      c.at("fees_uniform").get<double>(), eff);
        out << line;
    }
    std::cout << out.str();
    auto os = csv::open_out(g.out("report.txt"));
    os << out.str();
    return 0;
}

struct SweepArgs {
    std::string train_swaps, oot_swaps, bars_a, bars_b;
    std::vector<std::size_t> taus{0, 1, 2, 5, 10};
    bool sort = false;
};

int cmd_sweep(const Globals& g, const SweepArgs& s) {
    const auto base = g.config();
    const auto train_path = load_path(s.train_swaps, base, s.sort);
    const auto oot_path = load_path(s.oot_swaps, base, s.sort);
    const auto a = load_bars(s.bars_a), b = load_bars(s.bars_b);
    std::vector<ComparisonRow> rows;
    std::vector<StrategyRun> keep;
    for (std::size_t tau : s.taus) {
        auto cfg = base;
        cfg.shape.tau = tau;
        cfg.validate();
        const auto trained = run_training_pipeline(cfg, train_path, a, b);
        const auto epochs = run_stage("epochs", [&] { return partition_epochs(oot_path, cfg.build_partition(), cfg.shape); });
        const auto preds = model_predictions(trained.model, cfg, oot_path, epochs, a, b);
        const auto r = run_oot_backtest(cfg, oot_path, preds);
        std::vector<ComparisonRow> one;
        emit_oot((fs::path(g.out_dir) / ("tau_" + std::to_string(tau))).string(), r, cfg, one);
        rows.push_back(one.back());
        print_row(rows.back());
    }
    auto os = csv::open_out(g.out("comparison.csv"));
    write_comparison(os, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Liquidity allocation pipeline for concentrated-liquidity pools"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--out-dir", g.out_dir, "directory for stage artifacts")->capture_default_str();

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "fetch swaps of a pool from a subgraph endpoint");
    c_ingest->add_option("--pool-address", ingest.pool)->required();
    c_ingest->add_option("--from", ingest.from, "start, unix seconds (inclusive)")->required();
    c_ingest->add_option("--to", ingest.to, "end, unix seconds (exclusive)")->required();
    c_ingest->add_option("--endpoint", ingest.endpoint, "GraphQL URL (default: $LPOPT_SUBGRAPH_URL)");
    c_ingest->add_option("--page-size", ingest.page_size)->capture_default_str();
    c_ingest->add_option("--cursor", ingest.cursor, "pagination cursor field")->check(CLI::IsMember({"id", "timestamp"}));

    DataArgs data;
    auto add_swaps = [&](CLI::App* c) {
        c->add_option("--swaps", data.swaps, "swap file timestamp,price,volume")->required()->check(CLI::ExistingFile);
        c->add_flag("--sort", data.sort, "sort swaps by timestamp instead of rejecting unsorted input");
    };
    auto add_bars = [&](CLI::App* c, bool required) {
        auto* oa = c->add_option("--bars-a", data.bars_a, "minute bars of the first pair")->check(CLI::ExistingFile);
        auto* ob = c->add_option("--bars-b", data.bars_b, "minute bars of the second pair")->check(CLI::ExistingFile);
        if (required) {
            oa->required();
            ob->required();
        }
    };

    auto* c_epochs = app.add_subcommand("epochs", "partition a swap path into reset epochs");
    add_swaps(c_epochs);

    bool oot = false;
    auto* c_cal = app.add_subcommand("calibrate", "fit the pool liquidity profile of every epoch");
    add_swaps(c_cal);
    c_cal->add_flag("--oot", oot, "use out-of-sample settings (sub-epoch windows, LRF)");

    std::string cal_file;
    auto* c_opt = app.add_subcommand("optimize", "search the best reduced allocation per epoch");
    add_swaps(c_opt);
    c_opt->add_option("--calibration", cal_file, "calibration.csv (default: in --out-dir)");

    auto* c_feat = app.add_subcommand("features", "build the per-epoch feature matrix");
    add_swaps(c_feat);
    add_bars(c_feat, true);

    std::string feat_file, target_file;
    std::vector<std::string> members;
    auto* c_train = app.add_subcommand("train", "train the allocation network");
    c_train->add_option("--features", feat_file, "features.csv (default: in --out-dir)");
    c_train->add_option("--targets", target_file, "targets.csv (default: in --out-dir)");
    c_train->add_option("--member", members, "extra ensemble member name=file with training-row predictions");

    std::string model_file, pred_file;
    auto* c_bt = app.add_subcommand("backtest", "replay ML, uniform and buy-and-hold out of sample");
    add_swaps(c_bt);
    add_bars(c_bt, false);
    c_bt->add_option("--model", model_file, "model.json (default: in --out-dir)");
    c_bt->add_option("--predictions", pred_file, "use these per-epoch allocations instead of the model")
        ->check(CLI::ExistingFile);
    c_bt->add_option("--member", members, "ensemble member name=file with out-of-sample predictions");

    auto* c_report = app.add_subcommand("report", "print the summary of a backtest in --out-dir");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "train and backtest for several tau values");
    c_sweep->add_option("--train-swaps", sweep.train_swaps)->required()->check(CLI::ExistingFile);
    c_sweep->add_option("--oot-swaps", sweep.oot_swaps)->required()->check(CLI::ExistingFile);
    c_sweep->add_option("--bars-a", sweep.bars_a)->required()->check(CLI::ExistingFile);
    c_sweep->add_option("--bars-b", sweep.bars_b)->required()->check(CLI::ExistingFile);
    c_sweep->add_option("--tau", sweep.taus, "comma-separated tau values")->delimiter(',')->capture_default_str();
    c_sweep->add_flag("--sort", sweep.sort);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (seed_opt->count() > 0) g.seed = seed;

    try {
        if (c_ingest->parsed()) return cmd_ingest(g, ingest);
        if (c_epochs->parsed()) return cmd_epochs(g, data);
        if (c_cal->parsed()) return cmd_calibrate(g, data, oot);
        if (c_opt->parsed()) return cmd_optimize(g, data, cal_file);
        if (c_feat->parsed()) return cmd_features(g, data);
        if (c_train->parsed()) return cmd_train(g, feat_file, target_file, members);
        if (c_bt->parsed()) return cmd_backtest(g, data, model_file, pred_file, members);
        if (c_report->parsed()) return cmd_report(g);
        if (c_sweep->parsed()) return cmd_sweep(g, sweep);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
