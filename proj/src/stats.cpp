#include "scsl/stats.hpp"

#include <cmath>

namespace scsl {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    if (z > 40.0) return z;
    return std::log1p(std::exp(z));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_sided_normal_pvalue(double t) { return std::erfc(std::fabs(t) / std::sqrt(2.0)); }

double chi2_yates_pvalue_2x2(std::uint64_t n00, std::uint64_t n01, std::uint64_t n10,
                             std::uint64_t n11) {
    const double a = static_cast<double>(n00);
    const double b = static_cast<double>(n01);
    const double c = static_cast<double>(n10);
    const double d = static_cast<double>(n11);
    const double n = a + b + c + d;
    const double r0 = a + b, r1 = c + d, c0 = a + c, c1 = b + d;
    if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) return 1.0;
    double dev = std::fabs(a * d - b * c) - n / 2.0;
    if (dev < 0.0) dev = 0.0;
    const double stat = n * dev * dev / (r0 * r1 * c0 * c1);
    // Survival function of chi-square with 1 dof.
    return std::erfc(std::sqrt(stat / 2.0));
}

}  // namespace scsl
