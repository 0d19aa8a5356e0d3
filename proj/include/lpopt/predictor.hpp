#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpopt/csv.hpp"
#include "lpopt/error.hpp"

namespace lpopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct DatasetSplit {
    Matrix x_train, y_train;
    Matrix x_test, y_test;
};

/// Chronological split: the first floor(4K/5) rows train, the rest test.
inline DatasetSplit split_dataset(const Matrix& x, const Matrix& y) {
    require(x.rows() == y.rows(), Errc::ShapeMismatch, "X and Y row counts differ");
    const auto k = static_cast<std::size_t>(x.rows());
    require(k >= 5, Errc::TooFewRows, "need at least 5 epochs to split, got " + std::to_string(k));
    const auto n = static_cast<Eigen::Index>(k * 4 / 5);
    DatasetSplit s;
    s.x_train = x.topRows(n);
    s.y_train = y.topRows(n);
    s.x_test = x.bottomRows(x.rows() - n);
    s.y_test = y.bottomRows(y.rows() - n);
    return s;
}

/// Column z-scores fitted on training rows; constant columns keep scale 1.
struct Standardizer {
    RowVector mean;
    RowVector scale;

    static Standardizer fit(const Matrix& x) {
        require(x.rows() >= 1, Errc::TooFewRows, "cannot standardize an empty matrix");
        Standardizer s;
        s.mean = x.colwise().mean();
        const Matrix centered = x.rowwise() - s.mean;
        s.scale = (centered.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
        for (Eigen::Index j = 0; j < s.scale.size(); ++j)
            if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
        return s;
    }

    Matrix transform(const Matrix& x) const {
        require(x.cols() == mean.size(), Errc::ShapeMismatch, "feature width differs from standardizer");
        return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
    }
};

struct MlpConfig {
    std::vector<std::size_t> hidden{128, 64, 32, 16};
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::size_t folds = 5;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

struct DenseLayer {
    Matrix w;  // out × in
    Vector b;
};

/// ReLU hidden layers, softmax output, mean squared error.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, std::uint64_t seed) {
        require(inputs >= 1 && outputs >= 1, Errc::InvalidArgument, "network needs inputs and outputs");
        std::mt19937_64 rng(seed);
        std::size_t prev = inputs;
        auto add = [&](std::size_t out) {
            const double limit = std::sqrt(6.0 / static_cast<double>(prev + out));
            std::uniform_real_distribution<double> u(-limit, limit);
            DenseLayer l;
            l.w.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(prev));
            for (Eigen::Index i = 0; i < l.w.rows(); ++i)
                for (Eigen::Index j = 0; j < l.w.cols(); ++j) l.w(i, j) = u(rng);
            l.b = Vector::Zero(static_cast<Eigen::Index>(out));
            layers_.push_back(std::move(l));
            prev = out;
        };
        for (std::size_t h : hidden) add(h);
        add(outputs);
    }

    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::size_t inputs() const { return static_cast<std::size_t>(layers_.front().w.cols()); }
    std::size_t outputs() const { return static_cast<std::size_t>(layers_.back().w.rows()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.w.size() + l.b.size());
        return n;
    }

    /// Rows of x in, rows of probabilities out.
    Matrix forward(const Matrix& x) const {
        Matrix a = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            Matrix z = (a * layers_[i].w.transpose()).rowwise() + layers_[i].b.transpose();
            if (i + 1 < layers_.size())
                a = z.cwiseMax(0.0);
            else
                a = softmax(z);
        }
        return a;
    }

    static Matrix softmax(const Matrix& z) {
        Matrix out(z.rows(), z.cols());
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            const double m = z.row(r).maxCoeff();
            const RowVector e = (z.row(r).array() - m).exp().matrix();
            out.row(r) = e / e.sum();
        }
        return out;
    }

    static double mse(const Matrix& p, const Matrix& y) {
        return (p - y).array().square().sum() / static_cast<double>(p.size());
    }

    /// Loss on (x, y) and its gradient with respect to every layer's weights and biases.
    double loss_and_gradient(const Matrix& x, const Matrix& y, std::vector<DenseLayer>& grad) const {
        const std::size_t nl = layers_.size();
        std::vector<Matrix> acts;  // acts[i] is the input of layer i
        acts.reserve(nl + 1);
        acts.push_back(x);
        std::vector<Matrix> pre(nl);
        for (std::size_t i = 0; i < nl; ++i) {
            pre[i] = (acts[i] * layers_[i].w.transpose()).rowwise() + layers_[i].b.transpose();
            acts.push_back(i + 1 < nl ? Matrix(pre[i].cwiseMax(0.0)) : softmax(pre[i]));
        }
        const Matrix& p = acts.back();
        const double loss = mse(p, y);

        grad.resize(nl);
        Matrix g = 2.0 * (p - y) / static_cast<double>(p.size());
        // softmax backward: dz = p ⊙ (g − Σ_k g_k p_k)
        const Vector dot = (g.array() * p.array()).rowwise().sum();
        Matrix dz = (p.array() * (g.colwise() - dot).array()).matrix();
        for (std::size_t i = nl; i-- > 0;) {
            grad[i].w = dz.transpose() * acts[i];
            grad[i].b = dz.colwise().sum().transpose();
            if (i == 0) break;
            Matrix da = dz * layers_[i].w;
            dz = (da.array() * (pre[i - 1].array() > 0.0).cast<double>()).matrix();
        }
        return loss;
    }

private:
    std::vector<DenseLayer> layers_;
};

class Adam {
public:
    Adam(const Mlp& net, const MlpConfig& cfg) : cfg_(cfg) {
        for (const auto& l : net.layers()) {
            m_.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
            v_.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
        }
    }

    void step(Mlp& net, const std::vector<DenseLayer>& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        const double lr = cfg_.learning_rate * std::sqrt(c2) / c1;
        auto& layers = net.layers();
        for (std::size_t i = 0; i < layers.size(); ++i) {
            m_[i].w = cfg_.beta1 * m_[i].w + (1.0 - cfg_.beta1) * grad[i].w;
            v_[i].w = cfg_.beta2 * v_[i].w + (1.0 - cfg_.beta2) * grad[i].w.cwiseAbs2();
            layers[i].w.array() -= lr * m_[i].w.array() / (v_[i].w.array().sqrt() + cfg_.epsilon);
            m_[i].b = cfg_.beta1 * m_[i].b + (1.0 - cfg_.beta1) * grad[i].b;
            v_[i].b = cfg_.beta2 * v_[i].b + (1.0 - cfg_.beta2) * grad[i].b.cwiseAbs2();
            layers[i].b.array() -= lr * m_[i].b.array() / (v_[i].b.array().sqrt() + cfg_.epsilon);
        }
    }

private:
    MlpConfig cfg_;
    std::vector<DenseLayer> m_, v_;
    std::size_t t_ = 0;
};

struct FoldReport {
    std::size_t fold = 0;
    std::size_t epochs_run = 0;
    double best_val_loss = 0.0;
};

struct Model {
    Mlp net;
    Standardizer standardizer;
    std::uint64_t seed = 0;
    std::size_t tau = 0;
    std::size_t chosen_fold = 0;
    std::vector<FoldReport> folds;
};

namespace detail {

inline Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

/// Mini-batch Adam on (x, y); with validation rows, keeps the weights of the best validation epoch and stops
/// after `patience` epochs without improvement.
inline FoldReport fit_network(Mlp& net, const Matrix& x, const Matrix& y, const Matrix* xv, const Matrix* yv,
                              const MlpConfig& cfg, std::uint64_t seed, std::size_t fold) {
    std::mt19937_64 rng(seed);
    Adam opt(net, cfg);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::vector<DenseLayer> grad;
    FoldReport rep;
    rep.fold = fold;
    rep.best_val_loss = std::numeric_limits<double>::infinity();
    Mlp best = net;
    std::size_t since_best = 0;
    const std::size_t bs = std::max<std::size_t>(cfg.batch_size, 1);
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t s = 0; s < order.size(); s += bs) {
            const std::vector<Eigen::Index> batch(order.begin() + static_cast<std::ptrdiff_t>(s),
                                                  order.begin() + static_cast<std::ptrdiff_t>(std::min(s + bs, order.size())));
            const double loss = net.loss_and_gradient(take_rows(x, batch), take_rows(y, batch), grad);
            require(std::isfinite(loss), Errc::NonfiniteLoss,
                    "non-finite training loss at fold " + std::to_string(fold) + ", epoch " + std::to_string(epoch));
            opt.step(net, grad);
        }
        rep.epochs_run = epoch + 1;
        const double val = (xv != nullptr) ? Mlp::mse(net.forward(*xv), *yv) : Mlp::mse(net.forward(x), y);
        require(std::isfinite(val), Errc::NonfiniteLoss,
                "non-finite validation loss at fold " + std::to_string(fold) + ", epoch " + std::to_string(epoch));
        if (val < rep.best_val_loss) {
            rep.best_val_loss = val;
            best = net;
            since_best = 0;
        } else if (xv != nullptr && ++since_best >= cfg.patience) {
            break;
        }
    }
    net = std::move(best);
    return rep;
}

}  // namespace detail

/// K-fold cross-validation over contiguous blocks of the training rows; the fold model with the lowest
/// validation loss is retained. A single training row is fitted directly.
inline Model train_mlp(const DatasetSplit& split, const MlpConfig& cfg, std::uint64_t seed) {
    require(split.x_train.rows() >= 1 && split.x_train.rows() == split.y_train.rows(), Errc::ShapeMismatch,
            "training rows missing or misaligned");
    require(split.y_train.cols() >= 1, Errc::ShapeMismatch, "targets need at least one column");
    Model model;
    model.seed = seed;
    model.tau = static_cast<std::size_t>(split.y_train.cols()) - 1;
    model.standardizer = Standardizer::fit(split.x_train);
    const Matrix x = model.standardizer.transform(split.x_train);
    const Matrix& y = split.y_train;
    const auto in = static_cast<std::size_t>(x.cols());
    const auto out = static_cast<std::size_t>(y.cols());
    const auto rows = static_cast<std::size_t>(x.rows());

    const std::size_t k = std::min(cfg.folds, rows);
    if (k < 2) {
        model.net = Mlp(in, cfg.hidden, out, seed);
        model.folds.push_back(detail::fit_network(model.net, x, y, nullptr, nullptr, cfg, seed ^ 0x9e3779b97f4a7c15ULL, 0));
        return model;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t lo = f * rows / k, hi = (f + 1) * rows / k;
        std::vector<Eigen::Index> tr, va;
        for (std::size_t r = 0; r < rows; ++r) (r >= lo && r < hi ? va : tr).push_back(static_cast<Eigen::Index>(r));
        const Matrix xt = detail::take_rows(x, tr), yt = detail::take_rows(y, tr);
        const Matrix xv = detail::take_rows(x, va), yv = detail::take_rows(y, va);
        Mlp net(in, cfg.hidden, out, seed + f);
        const auto rep = detail::fit_network(net, xt, yt, &xv, &yv, cfg, (seed + f) ^ 0x9e3779b97f4a7c15ULL, f);
        model.folds.push_back(rep);
        if (rep.best_val_loss < best) {
            best = rep.best_val_loss;
            model.net = std::move(net);
            model.chosen_fold = f;
        }
    }
    return model;
}

/// Raw feature rows in, reduced allocations out.
inline Matrix predict(const Model& model, const Matrix& features) {
    return model.net.forward(model.standardizer.transform(features));
}

inline RowVector predict_row(const Model& model, const RowVector& psi) {
    for (Eigen::Index j = 0; j < psi.size(); ++j)
        require(std::isfinite(psi(j)), Errc::NonfiniteResult, "feature vector is not finite");
    return predict(model, Matrix(psi)).row(0);
}

// ---- ensemble ---------------------------------------------------------------------------------------

struct EnsembleFit {
    std::vector<double> weights;
    double objective = 0.0;
};

/// mean((Σ w_j P_j − Y)²) + l2·‖w‖².
inline double ensemble_objective(const std::vector<Matrix>& preds, const Matrix& y, std::span<const double> w,
                                 double l2) {
    Matrix blend = Matrix::Zero(y.rows(), y.cols());
    double pen = 0.0;
    for (std::size_t j = 0; j < preds.size(); ++j) {
        blend += w[j] * preds[j];
        pen += w[j] * w[j];
    }
    return Mlp::mse(blend, y) + l2 * pen;
}

namespace detail {

inline std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    for (auto& x : v) x = std::max(x - theta, 0.0);
    return v;
}

}  // namespace detail

/// Simplex-constrained blend weights. Up to three members: exhaustive grid at `resolution`; beyond that,
/// projected gradient descent on the (convex) quadratic. Zero weights are lifted to 1e-9 so every member
/// keeps a strictly positive weight.
inline EnsembleFit fit_ensemble(const std::vector<Matrix>& preds, const Matrix& y, double l2 = 0.001,
                                double resolution = 0.001) {
    require(!preds.empty(), Errc::InvalidArgument, "ensemble needs at least one member");
    for (const auto& p : preds)
        require(p.rows() == y.rows() && p.cols() == y.cols(), Errc::ShapeMismatch,
                "member prediction shape differs from Y");
    const std::size_t m = preds.size();
    const double n = static_cast<double>(y.size());
    Matrix g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Vector b(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        b(static_cast<Eigen::Index>(i)) = (preds[i].array() * y.array()).sum() / n;
        for (std::size_t j = 0; j < m; ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (preds[i].array() * preds[j].array()).sum() / n;
    }
    const double c = y.array().square().sum() / n;
    auto quad = [&](const Vector& w) { return w.dot(g * w) - 2.0 * b.dot(w) + c + l2 * w.squaredNorm(); };

    Vector w = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
    if (m == 1) {
        w(0) = 1.0;
    } else if (m <= 3) {
        const auto steps = static_cast<long>(std::llround(1.0 / resolution));
        double best = std::numeric_limits<double>::infinity();
        Vector cand(static_cast<Eigen::Index>(m));
        for (long i = 0; i <= steps; ++i) {
            const long rest = steps - i;
            for (long j = (m == 2 ? rest : 0); j <= rest; ++j) {
                cand(0) = static_cast<double>(i) / static_cast<double>(steps);
                cand(1) = static_cast<double>(j) / static_cast<double>(steps);
                if (m == 3) cand(2) = static_cast<double>(rest - j) / static_cast<double>(steps);
                const double v = quad(cand);
                if (v < best - 1e-15) {
                    best = v;
                    w = cand;
                }
            }
        }
    } else {
        const Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        const double lip = 2.0 * (es.eigenvalues().maxCoeff() + l2);
        const double step = lip > 0.0 ? 1.0 / lip : 1.0;
        for (int it = 0; it < 20000; ++it) {
            const Vector grad = 2.0 * (g * w - b) + 2.0 * l2 * w;
            std::vector<double> raw(m);
            for (std::size_t j = 0; j < m; ++j) raw[j] = w(static_cast<Eigen::Index>(j)) - step * grad(static_cast<Eigen::Index>(j));
            const auto p = detail::project_simplex(raw);
            Vector next = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(m));
            const double moved = (next - w).lpNorm<Eigen::Infinity>();
            w = next;
            if (moved < 1e-13) break;
        }
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w(j) < 1e-9) w(j) = 1e-9;
        total += w(j);
    }
    w /= total;
    EnsembleFit fit;
    fit.weights.assign(w.data(), w.data() + w.size());
    fit.objective = ensemble_objective(preds, y, fit.weights, l2);
    return fit;
}

inline Matrix blend(const std::vector<Matrix>& preds, std::span<const double> w) {
    require(!preds.empty() && preds.size() == w.size(), Errc::ShapeMismatch, "one weight per member required");
    Matrix out = Matrix::Zero(preds[0].rows(), preds[0].cols());
    for (std::size_t j = 0; j < preds.size(); ++j) out += w[j] * preds[j];
    return out;
}

/// Member predictions from a file `epoch_id,rho_0..rho_tau`, aligned to `epoch_ids`.
inline Matrix external_predictions(std::istream& is, const std::vector<std::size_t>& epoch_ids, std::size_t tau) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), Errc::EmptyFile, "prediction file is empty");
    require(csv::split(line).size() == tau + 2, Errc::MalformedRecord,
            "prediction header must be epoch_id,rho_0..rho_" + std::to_string(tau));
    Matrix out(static_cast<Eigen::Index>(epoch_ids.size()), static_cast<Eigen::Index>(tau + 1));
    std::size_t row = 0, lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        require(cells.size() == tau + 2, Errc::MalformedRecord,
                "prediction line " + std::to_string(lineno) + ": wrong number of fields");
        std::int64_t id = 0;
        require(csv::parse(cells[0], id), Errc::MalformedRecord,
                "prediction line " + std::to_string(lineno) + ": bad epoch_id");
        require(row < epoch_ids.size() && id >= 0 && static_cast<std::size_t>(id) == epoch_ids[row],
                Errc::EpochMismatch, "prediction line " + std::to_string(lineno) + ": epoch " + std::to_string(id) +
                                         " does not match the expected sequence");
        double sum = 0.0;
        for (std::size_t k = 0; k <= tau; ++k) {
            double v = 0.0;
            require(csv::parse(cells[k + 1], v) && std::isfinite(v), Errc::MalformedRecord,
                    "prediction line " + std::to_string(lineno) + ": bad weight");
            require(v >= 0.0, Errc::RowSumViolation, "prediction line " + std::to_string(lineno) + ": negative weight");
            out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) = v;
            sum += v;
        }
        require(std::abs(sum - 1.0) <= 1e-6, Errc::RowSumViolation,
                "prediction line " + std::to_string(lineno) + " sums to " + csv::fmt(sum));
        ++row;
    }
    require(row == epoch_ids.size(), Errc::EpochMismatch,
            "prediction file has " + std::to_string(row) + " rows, expected " + std::to_string(epoch_ids.size()));
    return out;
}

// ---- model artifact ---------------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const Model& model) {
    using nlohmann::json;
    json j;
    j["version"] = kModelFormatVersion;
    j["seed"] = model.seed;
    j["tau"] = model.tau;
    j["chosen_fold"] = model.chosen_fold;
    json layers = json::array();
    for (const auto& l : model.net.layers()) {
        std::vector<double> w(static_cast<std::size_t>(l.w.size()));
        for (Eigen::Index r = 0; r < l.w.rows(); ++r)
            for (Eigen::Index c = 0; c < l.w.cols(); ++c) w[static_cast<std::size_t>(r * l.w.cols() + c)] = l.w(r, c);
        layers.push_back({{"in", l.w.cols()},
                          {"out", l.w.rows()},
                          {"w", w},
                          {"b", std::vector<double>(l.b.data(), l.b.data() + l.b.size())}});
    }
    j["layers"] = layers;
    const auto& s = model.standardizer;
    j["standardizer"] = {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                         {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
    json folds = json::array();
    for (const auto& f : model.folds)
        folds.push_back({{"fold", f.fold}, {"epochs", f.epochs_run}, {"best_val_loss", f.best_val_loss}});
    j["folds"] = folds;
    return j;
}

inline Model model_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.value("version", 0) == kModelFormatVersion, Errc::MalformedRecord,
            "unsupported model artifact version");
    try {
        Model m;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.tau = j.at("tau").get<std::size_t>();
        m.chosen_fold = j.value("chosen_fold", std::size_t{0});
        auto& layers = m.net.layers();
        std::size_t prev = 0;
        for (const auto& lj : j.at("layers")) {
            const auto in = lj.at("in").get<Eigen::Index>(), out = lj.at("out").get<Eigen::Index>();
            const auto w = lj.at("w").get<std::vector<double>>();
            const auto b = lj.at("b").get<std::vector<double>>();
            require(in > 0 && out > 0 && w.size() == static_cast<std::size_t>(in * out) &&
                        b.size() == static_cast<std::size_t>(out) && (prev == 0 || prev == static_cast<std::size_t>(in)),
                    Errc::ShapeMismatch, "layer shapes in model artifact are inconsistent");
            DenseLayer l;
            l.w.resize(out, in);
            for (Eigen::Index r = 0; r < out; ++r)
                for (Eigen::Index c = 0; c < in; ++c) l.w(r, c) = w[static_cast<std::size_t>(r * in + c)];
            l.b = Eigen::Map<const Vector>(b.data(), out);
            layers.push_back(std::move(l));
            prev = static_cast<std::size_t>(out);
        }
        require(!layers.empty() && m.net.outputs() == m.tau + 1, Errc::ShapeMismatch,
                "model output width differs from tau+1");
        const auto mean = j.at("standardizer").at("mean").get<std::vector<double>>();
        const auto scale = j.at("standardizer").at("scale").get<std::vector<double>>();
        require(mean.size() == m.net.inputs() && scale.size() == mean.size(), Errc::ShapeMismatch,
                "standardizer width differs from the network input");
        m.standardizer.mean = Eigen::Map<const RowVector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        m.standardizer.scale = Eigen::Map<const RowVector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
        if (j.contains("folds"))
            for (const auto& f : j.at("folds"))
                m.folds.push_back({f.at("fold").get<std::size_t>(), f.at("epochs").get<std::size_t>(),
                                   f.at("best_val_loss").get<double>()});
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedRecord, std::string("model artifact: ") + e.what());
    }
}

}  // namespace lpopt
