#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "lpopt/csv.hpp"
#include "lpopt/epochs.hpp"
#include "lpopt/error.hpp"
#include "lpopt/lp_model.hpp"

namespace lpopt {

struct StrategyFamily {
    std::size_t n_candidates = 1000;
    std::uint64_t seed = 0;
    std::size_t tau = 5;

    void validate() const { require(n_candidates >= 1, Errc::InvalidArgument, "strategy family needs N_S >= 1"); }
};

/// N_S flat-simplex draws (normalized unit exponentials) followed by the uniform strategy.
inline std::vector<ReducedWeights> sample_strategies(const StrategyFamily& family) {
    family.validate();
    std::mt19937_64 rng(family.seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<ReducedWeights> out;
    out.reserve(family.n_candidates + 1);
    const std::size_t k = family.tau + 1;
    for (std::size_t c = 0; c < family.n_candidates; ++c) {
        ReducedWeights r(k);
        double sum = 0.0;
        for (auto& v : r) {
            v = expo(rng);
            sum += v;
        }
        if (sum <= 0.0) {
            out.push_back(uniform_reduced(family.tau));
            continue;
        }
        for (auto& v : r) v /= sum;
        out.push_back(std::move(r));
    }
    out.push_back(uniform_reduced(family.tau));
    return out;
}

struct OptimalRecord {
    std::size_t epoch_id = 0;
    ReducedWeights rho_star;
    double fee_star = 0.0;
    double uniform_fee = 0.0;
    std::size_t candidate = 0;  // index into the candidate list; the last entry is uniform
};

/// Modeled LP fee of one reduced allocation on an epoch.
inline double candidate_fee(const EpochRewardModel& model, std::span<const double> rho, const StrategyShape& shape,
                            std::size_t ref_bucket, double capital, RewardApproach approach) {
    const auto alloc = make_allocation(capital, rho, shape, ref_bucket, model.partition().size());
    return model.lp_fee(lp_profile(alloc, model.open_price(), model.partition()), approach).value;
}

/// Argmax of the modeled fee over the candidates; the uniform candidate (last) is the incumbent and is
/// only displaced by a strictly larger fee, then the lowest index wins among equals.
inline OptimalRecord find_optimal(const Epoch& epoch, const EpochRewardModel& model,
                                  const std::vector<ReducedWeights>& candidates, const StrategyShape& shape,
                                  double capital, RewardApproach approach) {
    require(!candidates.empty(), Errc::InvalidArgument, "no candidate strategies");
    const std::size_t u = candidates.size() - 1;
    OptimalRecord rec;
    rec.epoch_id = epoch.id;
    rec.candidate = u;
    rec.uniform_fee = candidate_fee(model, candidates[u], shape, epoch.ref_bucket, capital, approach);
    rec.fee_star = rec.uniform_fee;
    for (std::size_t c = 0; c < u; ++c) {
        const double f = candidate_fee(model, candidates[c], shape, epoch.ref_bucket, capital, approach);
        if (f > rec.fee_star) {
            rec.fee_star = f;
            rec.candidate = c;
        }
    }
    rec.rho_star = candidates[rec.candidate];
    return rec;
}

/// Target matrix: row i is ρ̂* of epoch i. Records must cover epochs 0..K-1 exactly once.
inline std::vector<ReducedWeights> build_targets(const std::vector<OptimalRecord>& records, std::size_t epoch_count) {
    std::vector<const OptimalRecord*> by_id(epoch_count, nullptr);
    for (const auto& r : records) {
        require(r.epoch_id < epoch_count, Errc::MissingEpoch, "record for unknown epoch " + std::to_string(r.epoch_id));
        by_id[r.epoch_id] = &r;
    }
    std::vector<ReducedWeights> y;
    y.reserve(epoch_count);
    for (std::size_t i = 0; i < epoch_count; ++i) {
        require(by_id[i] != nullptr, Errc::MissingEpoch, "no optimal record for epoch " + std::to_string(i));
        y.push_back(by_id[i]->rho_star);
    }
    return y;
}

inline void write_targets(std::ostream& os, const std::vector<OptimalRecord>& records, std::size_t tau) {
    os << "epoch_id";
    for (std::size_t k = 0; k <= tau; ++k) os << ",rho_" << k;
    os << ",fee_star\n";
    for (const auto& r : records) {
        require(r.rho_star.size() == tau + 1, Errc::ShapeMismatch, "record width differs from tau+1");
        os << r.epoch_id;
        for (double v : r.rho_star) os << ',' << csv::fmt(v);
        os << ',' << csv::fmt(r.fee_star) << '\n';
    }
}

inline std::vector<OptimalRecord> read_targets(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), Errc::EmptyFile, "targets file is empty");
    const auto header = csv::split(line);
    require(header.size() >= 3 && csv::trim(header.front()) == "epoch_id" && csv::trim(header.back()) == "fee_star",
            Errc::MalformedRecord, "targets header must be epoch_id,rho_0..rho_tau,fee_star");
    const std::size_t width = header.size() - 2;
    std::vector<OptimalRecord> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        require(cells.size() == header.size(), Errc::MalformedRecord,
                "targets line " + std::to_string(lineno) + ": wrong number of fields");
        OptimalRecord r;
        std::int64_t id = 0;
        require(csv::parse(cells[0], id) && id >= 0, Errc::MalformedRecord,
                "targets line " + std::to_string(lineno) + ": bad epoch_id");
        r.epoch_id = static_cast<std::size_t>(id);
        r.rho_star.resize(width);
        for (std::size_t k = 0; k < width; ++k)
            require(csv::parse(cells[k + 1], r.rho_star[k]), Errc::MalformedRecord,
                    "targets line " + std::to_string(lineno) + ": bad weight");
        require(csv::parse(cells.back(), r.fee_star), Errc::MalformedRecord,
                "targets line " + std::to_string(lineno) + ": bad fee");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lpopt
