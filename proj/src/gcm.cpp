#include "scsl/gcm.hpp"

#include <cmath>
#include <string>

#include "scsl/errors.hpp"
#include "scsl/stats.hpp"

namespace scsl {

std::vector<double> residual_products(std::span<const double> x, std::span<const double> x_hat,
                                      std::span<const double> y, std::span<const double> y_hat) {
    const std::size_t n = x.size();
    if (x_hat.size() != n || y.size() != n || y_hat.size() != n) {
        throw LengthMismatch("residual inputs must have equal length");
    }
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = (x[i] - x_hat[i]) * (y[i] - y_hat[i]);
    }
    return r;
}

StatParts statistic_parts(std::span<const double> r) {
    const std::size_t n = r.size();
    if (n == 0) throw LengthMismatch("empty residual product vector");
    double lo = r[0], hi = r[0];
    double sum = 0.0;
    for (double v : r) {
        sum += v;
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    StatParts parts;
    if (lo == hi) {
        if (lo == 0.0) {
            parts.all_zero = true;
            return parts;
        }
        throw DegenerateVariance("residual products are constant (" + std::to_string(lo) + ")");
    }
    parts.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : r) {
        const double d = v - parts.mean;
        ss += d * d;
    }
    parts.var = ss / static_cast<double>(n);
    parts.t = std::sqrt(static_cast<double>(n)) * parts.mean / std::sqrt(parts.var);
    return parts;
}

double gcm_statistic(std::span<const double> r) {
    StatParts parts = statistic_parts(r);
    if (parts.all_zero) {
        throw DegenerateVariance("residual products are constant (0)");
    }
    return parts.t;
}

double gcm_pvalue(double t) { return two_sided_normal_pvalue(t); }

void check_edge_models(const DataMatrix& data, std::size_t j, std::size_t k,
                       std::size_t subset_size, const AmortizedModel& y_model,
                       const AmortizedModel& x_model) {
    if (j >= data.p() || k >= data.m()) {
        throw ConfigError("edge (" + std::to_string(j) + ", " + std::to_string(k) +
                          ") out of range");
    }
    if (data.m() == 0) throw ConfigError("no Y columns");
    if (subset_size != data.m() - 1) {
        throw MaskShapeError("conditioning subset length " + std::to_string(subset_size) +
                             ", expected " + std::to_string(data.m() - 1));
    }
    if (data.domain == ValueDomain::Binary && data.coding != Coding::PlusMinus) {
        throw DomainViolation("binary data must be recoded to {-1,+1} for model evaluation");
    }
    auto check = [&](const AmortizedModel& mdl, TargetKind kind, std::size_t tgt,
                     const char* name) {
        if (mdl.kind() != kind || mdl.target() != tgt || mdl.p() != data.p() ||
            mdl.m() != data.m() || mdl.domain() != data.domain) {
            throw ConfigError(std::string(name) + " model does not match the requested edge");
        }
    };
    check(y_model, TargetKind::YTarget, k, "Y");
    check(x_model, TargetKind::XTarget, j, "X");
}

GcmResult gcm_test(const DataMatrix& data, std::size_t j, std::size_t k,
                   const std::vector<std::uint8_t>& subset, const AmortizedModel& y_model,
                   const AmortizedModel& x_model) {
    check_edge_models(data, j, k, subset.size(), y_model, x_model);
    const std::size_t n = data.n();
    const std::size_t m = data.m();
    const bool binary = data.domain == ValueDomain::Binary;

    // Y-model conditions on the subset with X_j hidden; the X-model masks the
    // same Y columns and always hides Y_k.
    std::vector<double> y_soft(m - 1);
    for (std::size_t c = 0; c + 1 < m; ++c) y_soft[c] = subset[c] ? 1.0 : 0.0;
    std::vector<double> x_soft(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        if (c == k) continue;
        const std::size_t pos = c < k ? c : c - 1;
        x_soft[c] = subset[pos] ? 1.0 : 0.0;
    }

    std::vector<double> r(n);
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto x_row = data.x.row(i);
        auto y_row = data.y.row(i);
        const double y_hat = y_model.linear_response(x_row, y_row, y_soft, j);
        const double x_hat = x_model.linear_response(x_row, y_row, x_soft, j);
        const double y_pred = binary ? sigmoid(y_hat) : y_hat;
        const double x_pred = binary ? sigmoid(x_hat) : x_hat;
        const double xv = binary ? (x_row[j] + 1.0) / 2.0 : x_row[j];
        const double yv = binary ? (y_row[k] + 1.0) / 2.0 : y_row[k];
        const double rx = xv - x_pred;
        const double ry = yv - y_pred;
        r[i] = rx * ry;
        sx += rx * rx;
        sy += ry * ry;
    }

    GcmResult out;
    out.n_used = n;
    out.a_f = sx / static_cast<double>(n);
    out.a_g = sy / static_cast<double>(n);
    StatParts parts = statistic_parts(r);
    if (parts.all_zero) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        return out;
    }
    out.statistic = parts.t;
    out.p_value = gcm_pvalue(parts.t);
    return out;
}

}  // namespace scsl
