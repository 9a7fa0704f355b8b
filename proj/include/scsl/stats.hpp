#pragma once

#include <cstdint>

namespace scsl {

// Numerically stable 1 / (1 + exp(-z)).
double sigmoid(double z);

// Numerically stable log(1 + exp(z)).
double softplus(double z);

// Standard normal CDF via erfc; absolute error well below 1e-12.
double normal_cdf(double x);

// 2 * (1 - Phi(|t|)).
double two_sided_normal_pvalue(double t);

// 2x2 chi-square test with continuity correction; counts are
// (x=0,y=0), (x=0,y=1), (x=1,y=0), (x=1,y=1). Any zero margin gives p = 1.
double chi2_yates_pvalue_2x2(std::uint64_t n00, std::uint64_t n01, std::uint64_t n10,
                             std::uint64_t n11);

}  // namespace scsl
