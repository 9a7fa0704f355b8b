#include "scsl/metrics.hpp"

#include <cmath>

#include "scsl/errors.hpp"

namespace scsl {

std::vector<double> default_threshold_grid() {
    constexpr std::size_t kPoints = 50;
    const double lo = std::log(1e-4), hi = std::log(0.5);
    std::vector<double> grid(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i) {
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(kPoints - 1));
    }
    grid.front() = 1e-4;
    grid.back() = 0.5;
    return grid;
}

BenchMetrics compute_metrics(const Grid<double>& p_matrix, const Grid<std::uint8_t>& truth,
                             const std::vector<double>& thresholds) {
    if (p_matrix.rows() != truth.rows() || p_matrix.cols() != truth.cols()) {
        throw ShapeMismatch("p-value matrix and truth matrix differ in shape");
    }
    if (thresholds.empty()) throw ConfigError("threshold grid is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw ConfigError("thresholds must be positive");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw ConfigError("thresholds must be strictly increasing");
        }
    }
    for (double v : p_matrix.data()) {
        if (std::isnan(v)) throw DomainViolation("p-value matrix contains untested entries");
        if (!(v >= 0.0 && v <= 1.0)) throw DomainViolation("p-values must lie in [0, 1]");
    }

    std::size_t n_true = 0, n_false = 0;
    for (std::uint8_t t : truth.data()) (t ? n_true : n_false) += 1;

    BenchMetrics out;
    out.thresholds = thresholds;
    out.tpr.resize(thresholds.size());
    out.fpr.resize(thresholds.size());
    out.fpr_ratio.resize(thresholds.size());
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const double t = thresholds[i];
        std::size_t tp = 0, fp = 0;
        for (std::size_t r = 0; r < truth.rows(); ++r) {
            for (std::size_t c = 0; c < truth.cols(); ++c) {
                if (p_matrix.at(r, c) <= t) {
                    (truth.at(r, c) ? tp : fp) += 1;
                }
            }
        }
        out.tpr[i] = n_true ? static_cast<double>(tp) / static_cast<double>(n_true) : 0.0;
        out.fpr[i] = n_false ? static_cast<double>(fp) / static_cast<double>(n_false) : 0.0;
        out.fpr_ratio[i] = out.fpr[i] / t;
    }

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < truth.rows(); ++r) {
        for (std::size_t c = 0; c < truth.cols(); ++c) {
            const bool drawn = p_matrix.at(r, c) <= kEdgeDrawThreshold;
            if (truth.at(r, c)) {
                (drawn ? tp : fn) += 1;
            } else if (drawn) {
                ++fp;
            }
        }
    }
    out.precision_at = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    out.recall_at = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    out.f1 = (out.precision_at + out.recall_at > 0.0)
                 ? 2.0 * out.precision_at * out.recall_at / (out.precision_at + out.recall_at)
                 : 0.0;
    return out;
}

}  // namespace scsl
