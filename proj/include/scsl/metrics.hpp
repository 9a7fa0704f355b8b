#pragma once

#include <cstdint>
#include <vector>

#include "scsl/grid.hpp"

namespace scsl {

struct BenchMetrics {
    std::vector<double> thresholds;
    std::vector<double> tpr;        // recall at each threshold
    std::vector<double> fpr;
    std::vector<double> fpr_ratio;  // fpr / threshold
    double precision_at = 0.0;      // at the edge-drawing threshold
    double recall_at = 0.0;
    double f1 = 0.0;
    double wall_seconds = 0.0;      // filled by the caller, not part of the metric
};

// Edges are drawn at p <= threshold.
constexpr double kEdgeDrawThreshold = 0.1;

// 50 log-spaced thresholds covering [1e-4, 0.5].
std::vector<double> default_threshold_grid();

// Compares a p-value matrix against the generating adjacency. Every entry
// must be a real p-value (no untested markers).
BenchMetrics compute_metrics(const Grid<double>& p_matrix, const Grid<std::uint8_t>& truth,
                             const std::vector<double>& thresholds);

}  // namespace scsl
