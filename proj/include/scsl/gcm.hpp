#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scsl/data.hpp"
#include "scsl/model.hpp"

namespace scsl {

struct GcmResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_used = 0;
    double a_f = 0.0;  // mean squared residual of the X-side model
    double a_g = 0.0;  // mean squared residual of the Y-side model
};

// Per-row products of the two regression residuals.
std::vector<double> residual_products(std::span<const double> x, std::span<const double> x_hat,
                                      std::span<const double> y, std::span<const double> y_hat);

struct StatParts {
    double mean = 0.0;
    double var = 0.0;  // population variance, two-pass
    double t = 0.0;
    bool all_zero = false;
};

// Normalized mean of R; throws DegenerateVariance when R is a nonzero
// constant, flags the identically-zero case instead of computing t.
StatParts statistic_parts(std::span<const double> r);

// sqrt(n) * mean(R) / sd(R); any constant R is an error here.
double gcm_statistic(std::span<const double> r);

// Two-sided tail under the standard normal limit.
double gcm_pvalue(double t);

// Tests X_j against Y_k conditioning on X_{-j} plus the given subset of
// Y_{-k} (one bit per Y column except k, in column order). Binary data must be
// in the {-1,+1} coding used for training; residuals are formed on the {0,1}
// scale. An identically-zero residual product maps to t = 0, p = 1.
GcmResult gcm_test(const DataMatrix& data, std::size_t j, std::size_t k,
                   const std::vector<std::uint8_t>& subset, const AmortizedModel& y_model,
                   const AmortizedModel& x_model);

// Shared validation for every per-edge evaluation path.
void check_edge_models(const DataMatrix& data, std::size_t j, std::size_t k,
                       std::size_t subset_size, const AmortizedModel& y_model,
                       const AmortizedModel& x_model);

}  // namespace scsl
