#include "scsl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "scsl/errors.hpp"
#include "scsl/stats.hpp"

namespace scsl {

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(p_mask >= 0.0 && p_mask <= 1.0)) throw ConfigError("p_mask must lie in [0, 1]");
    if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be nonnegative");
}

AmortizedModel::AmortizedModel(TargetKind kind, std::size_t target, std::size_t p, std::size_t m,
                               ValueDomain domain)
    : kind_(kind), target_(target), p_(p), m_(m), domain_(domain) {
    w_.assign(feature_count(), 0.0);
}

std::size_t AmortizedModel::check_mask(std::size_t x_size, std::size_t y_size,
                                       std::size_t mask_size,
                                       std::optional<std::size_t> x_excluded) const {
    if (x_size != p_ || y_size != m_) {
        throw MaskShapeError("row lengths (" + std::to_string(x_size) + ", " +
                             std::to_string(y_size) + ") do not match model dims (" +
                             std::to_string(p_) + ", " + std::to_string(m_) + ")");
    }
    if (mask_size != maskable_count()) {
        throw MaskShapeError("mask length " + std::to_string(mask_size) + ", expected " +
                             std::to_string(maskable_count()));
    }
    if (kind_ == TargetKind::YTarget) {
        if (!x_excluded.has_value()) {
            throw MaskShapeError("Y-target models require x_excluded");
        }
        if (*x_excluded >= p_) {
            throw MaskShapeError("x_excluded out of range");
        }
        return *x_excluded;
    }
    if (x_excluded.has_value()) {
        throw MaskShapeError("X-target models exclude their own column implicitly");
    }
    return target_;
}

double AmortizedModel::linear_response(std::span<const double> x_row,
                                       std::span<const double> y_row, std::span<const double> s,
                                       std::size_t x_skip) const {
    const std::size_t mc = maskable_count();
    const double* wx = w_.data();
    const double* wy = w_.data() + p_;
    double z = bias_;
    for (std::size_t i = 0; i < p_; ++i) {
        if (i != x_skip) z += wx[i] * x_row[i];
    }
    for (std::size_t c = 0; c < mc; ++c) {
        z += wy[c] * y_row[y_column(c)] * s[c];
    }
    if (domain_ == ValueDomain::Continuous) {
        const double* wxi = w_.data() + p_ + mc;
        const double* wyi = wxi + p_;
        for (std::size_t i = 0; i < p_; ++i) {
            if (i != x_skip) z += wxi[i];
        }
        for (std::size_t c = 0; c < mc; ++c) {
            z += wyi[c] * s[c];
        }
    }
    return z;
}

double AmortizedModel::predict(std::span<const double> x_row, std::span<const double> y_row,
                               const MaskState& mask) const {
    std::vector<double> s(mask.y_mask.size());
    for (std::size_t c = 0; c < s.size(); ++c) s[c] = mask.y_mask[c] ? 1.0 : 0.0;
    return predict_soft(x_row, y_row, s, mask.x_excluded).value;
}

SoftPrediction AmortizedModel::predict_soft(std::span<const double> x_row,
                                            std::span<const double> y_row,
                                            std::span<const double> soft_y_mask,
                                            std::optional<std::size_t> x_excluded) const {
    const std::size_t x_skip = check_mask(x_row.size(), y_row.size(), soft_y_mask.size(),
                                          x_excluded);
    for (double v : soft_y_mask) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainViolation("soft mask entries must lie in [0, 1]");
    }
    const std::size_t mc = maskable_count();
    const double z = linear_response(x_row, y_row, soft_y_mask, x_skip);

    SoftPrediction out;
    double dvalue_dz;
    if (domain_ == ValueDomain::Binary) {
        out.value = sigmoid(z);
        dvalue_dz = out.value * (1.0 - out.value);
    } else {
        out.value = z;
        dvalue_dz = 1.0;
    }
    const double* wy = w_.data() + p_;
    const double* wyi =
        domain_ == ValueDomain::Continuous ? w_.data() + 2 * p_ + mc : nullptr;
    out.grad.resize(mc);
    for (std::size_t c = 0; c < mc; ++c) {
        double dz_ds = wy[c] * y_row[y_column(c)];
        if (wyi) dz_ds += wyi[c];
        out.grad[c] = dvalue_dz * dz_ds;
    }
    return out;
}

namespace {

AmortizedModel train_model(const DataMatrix& data, TargetKind kind, std::size_t target,
                           const TrainConfig& cfg, RngHandle& rng) {
    cfg.validate();
    const std::size_t n = data.n(), p = data.p(), m = data.m();
    if (n == 0 || p == 0 || m == 0) throw ConfigError("training data must be non-empty");
    if (kind == TargetKind::YTarget && target >= m) {
        throw ConfigError("target index " + std::to_string(target) + " out of range for " +
                          std::to_string(m) + " Y columns");
    }
    if (kind == TargetKind::XTarget && target >= p) {
        throw ConfigError("target index " + std::to_string(target) + " out of range for " +
                          std::to_string(p) + " X columns");
    }
    if (data.domain == ValueDomain::Binary && data.coding != Coding::PlusMinus) {
        throw DomainViolation("binary training data must be recoded to {-1,+1} first");
    }

    AmortizedModel model(kind, target, p, m, data.domain);
    model.meta.n_epochs = cfg.n_epochs;
    model.meta.batch_size = cfg.batch_size;
    model.meta.learning_rate = cfg.learning_rate;
    model.meta.p_mask = cfg.p_mask;
    model.meta.l2_lambda = cfg.l2_lambda;
    model.meta.seed = rng.seed();
    model.meta.n_rows = n;
    model.meta.first_epoch_loss = std::numeric_limits<double>::quiet_NaN();
    model.meta.final_epoch_loss = std::numeric_limits<double>::quiet_NaN();

    const std::size_t mc = model.maskable_count();
    const std::size_t batch = std::min(cfg.batch_size, n);
    const std::size_t n_batches = n / batch;
    const bool binary = data.domain == ValueDomain::Binary;
    const bool cont = !binary;

    std::vector<double>& w = model.weights();
    std::vector<double> grad(w.size());
    std::vector<double> ybits(mc);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    const Grid<double>& xs = data.x;
    const Grid<double>& ys = data.y;

    for (std::size_t epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
        const double eta = cfg.learning_rate / std::sqrt(static_cast<double>(epoch));
        rng.shuffle(perm);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            for (std::size_t c = 0; c < mc; ++c) {
                ybits[c] = rng.bernoulli(cfg.p_mask) ? 1.0 : 0.0;
            }
            const std::size_t x_skip =
                kind == TargetKind::YTarget ? rng.uniform_below(p) : target;

            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0, loss = 0.0;
            for (std::size_t r = 0; r < batch; ++r) {
                const std::size_t row = perm[b * batch + r];
                auto x_row = xs.row(row);
                auto y_row = ys.row(row);
                const double z = model.linear_response(x_row, y_row, ybits, x_skip);
                const double tt =
                    kind == TargetKind::YTarget ? ys.at(row, target) : xs.at(row, target);
                double gz;
                if (binary) {
                    loss += softplus(-tt * z);
                    gz = -tt * sigmoid(-tt * z);
                } else {
                    const double res = z - tt;
                    loss += 0.5 * res * res;
                    gz = res;
                }
                grad_b += gz;
                double* gx = grad.data();
                double* gy = grad.data() + p;
                for (std::size_t i = 0; i < p; ++i) {
                    if (i != x_skip) gx[i] += gz * x_row[i];
                }
                for (std::size_t c = 0; c < mc; ++c) {
                    gy[c] += gz * y_row[model.y_column(c)] * ybits[c];
                }
                if (cont) {
                    double* gxi = grad.data() + p + mc;
                    double* gyi = gxi + p;
                    for (std::size_t i = 0; i < p; ++i) {
                        if (i != x_skip) gxi[i] += gz;
                    }
                    for (std::size_t c = 0; c < mc; ++c) {
                        gyi[c] += gz * ybits[c];
                    }
                }
            }
            const double bsz = static_cast<double>(batch);
            loss /= bsz;
            if (!std::isfinite(loss)) {
                throw NonFiniteLoss("training loss diverged at epoch " + std::to_string(epoch));
            }
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] -= eta * (grad[i] / bsz + cfg.l2_lambda * w[i]);
            }
            model.bias() -= eta * grad_b / bsz;
            epoch_loss += loss;
        }
        epoch_loss /= static_cast<double>(n_batches);
        if (epoch == 1) model.meta.first_epoch_loss = epoch_loss;
        model.meta.final_epoch_loss = epoch_loss;
    }
    for (double v : w) {
        if (!std::isfinite(v)) throw NonFiniteLoss("weights diverged during training");
    }
    if (!std::isfinite(model.bias())) throw NonFiniteLoss("bias diverged during training");
    return model;
}

}  // namespace

AmortizedModel train_y_model(const DataMatrix& data, std::size_t k, const TrainConfig& cfg,
                             RngHandle& rng) {
    return train_model(data, TargetKind::YTarget, k, cfg, rng);
}

AmortizedModel train_x_model(const DataMatrix& data, std::size_t j, const TrainConfig& cfg,
                             RngHandle& rng) {
    return train_model(data, TargetKind::XTarget, j, cfg, rng);
}

}  // namespace scsl
