#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scsl/data.hpp"
#include "scsl/model.hpp"
#include "scsl/search.hpp"

namespace scsl {

struct DiscoveryConfig {
    TrainConfig train;
    SearchConfig search;
    double fdr_q = 0.05;
    // Absent: every (j, k) pair is tested. Present: exactly these pairs.
    std::optional<std::vector<std::pair<std::size_t, std::size_t>>> edge_filter;
    std::size_t parallelism = 1;
    std::uint64_t seed = 0;
};

struct EdgeKey {
    std::size_t j = 0, k = 0;
    bool operator==(const EdgeKey&) const = default;
};

struct EdgeOutcome {
    EdgeKey edge;
    EdgeResult result;  // meaningful when error is empty
    std::string error;  // failure leaves the edge untested, run continues
};

struct PhaseTimings {
    double train_seconds = 0.0;
    double search_seconds = 0.0;
};

struct DiscoveryReport {
    Grid<double> p_matrix;  // p rows, m cols; NaN marks untested or failed edges
    std::vector<EdgeOutcome> edges;
    std::vector<EdgeKey> rejections;  // BH at fdr_q over the successful tests
    std::size_t model_trainings = 0;  // always p + m
    PhaseTimings timing;              // excluded from deterministic outputs
    std::string rng_family;
    std::vector<AmortizedModel> y_models;
    std::vector<AmortizedModel> x_models;
};

// Trains one model per column (the amortization), then bounds each requested
// edge's p-value by searching over conditioning subsets. Every model and
// every edge draws from a stream derived from (seed, fixed tag, index), so
// results do not depend on worker count or scheduling.
DiscoveryReport discover(const DataMatrix& data, const DiscoveryConfig& cfg);

// Same pipeline with the training phase replaced by cached models, which
// must match the data's shape and domain. model_trainings stays 0.
DiscoveryReport discover_with_models(const DataMatrix& data, const DiscoveryConfig& cfg,
                                     std::vector<AmortizedModel> y_models,
                                     std::vector<AmortizedModel> x_models);

// Step-up false-discovery-rate control; returns rejected indices, ascending.
std::vector<std::size_t> bh_procedure(const std::vector<double>& pvals, double q);

// Runs body(0..n_tasks-1) on up to `workers` threads. Tasks must write to
// disjoint slots; the first thrown exception is rethrown after all join.
void parallel_for(std::size_t n_tasks, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

// Unconditional chi-square screen (continuity-corrected) for binary data.
Grid<double> marginal_pvalues(const DataMatrix& data);

}  // namespace scsl
