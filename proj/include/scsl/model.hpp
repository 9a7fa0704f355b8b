#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scsl/data.hpp"
#include "scsl/rng.hpp"

namespace scsl {

enum class TargetKind { YTarget, XTarget };

struct TrainConfig {
    std::size_t n_epochs = 50;
    std::size_t batch_size = 128;
    double learning_rate = 0.1;  // decays as 1/sqrt(epoch)
    double p_mask = 0.5;         // per-coordinate keep probability for Y inputs
    double l2_lambda = 1e-3;     // weights only, bias unpenalized
    void validate() const;
};

// Conditioning state for one evaluation. y_mask has one bit per maskable Y
// input: all Y columns except the target for a Y-model, all Y columns for an
// X-model. x_excluded names the X column hidden from a Y-model; X-models hide
// their own column implicitly and must not set it.
struct MaskState {
    std::vector<std::uint8_t> y_mask;
    std::optional<std::size_t> x_excluded;
};

struct SoftPrediction {
    double value;
    std::vector<double> grad;  // d value / d soft_y_mask, one entry per maskable slot
};

struct TrainingMeta {
    std::size_t n_epochs = 0;
    std::size_t batch_size = 0;
    double learning_rate = 0.0;
    double p_mask = 0.0;
    double l2_lambda = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_rows = 0;
    double first_epoch_loss = 0.0;
    double final_epoch_loss = 0.0;
};

// Single linear predictor shared across all mask patterns. Binary models are
// trained on {-1,+1} inputs/targets with logistic loss and report predictions
// as probabilities on the {0,1} scale; continuous models are least-squares
// with mask-indicator inputs appended.
class AmortizedModel {
public:
    AmortizedModel() = default;
    AmortizedModel(TargetKind kind, std::size_t target, std::size_t p, std::size_t m,
                   ValueDomain domain);

    TargetKind kind() const { return kind_; }
    std::size_t target() const { return target_; }
    std::size_t p() const { return p_; }
    std::size_t m() const { return m_; }
    ValueDomain domain() const { return domain_; }

    std::size_t maskable_count() const { return kind_ == TargetKind::YTarget ? m_ - 1 : m_; }
    std::size_t feature_count() const {
        std::size_t base = p_ + maskable_count();
        return domain_ == ValueDomain::Continuous ? 2 * base : base;
    }
    // Data column behind maskable slot c.
    std::size_t y_column(std::size_t c) const {
        return (kind_ == TargetKind::YTarget && c >= target_) ? c + 1 : c;
    }

    // Rows are given in the model's training coding: {-1,+1} for binary data,
    // raw values for continuous.
    double predict(std::span<const double> x_row, std::span<const double> y_row,
                   const MaskState& mask) const;

    // Fractional y mask in [0,1]; exactly equals predict at integral masks.
    SoftPrediction predict_soft(std::span<const double> x_row, std::span<const double> y_row,
                                std::span<const double> soft_y_mask,
                                std::optional<std::size_t> x_excluded) const;

    std::vector<double>& weights() { return w_; }
    const std::vector<double>& weights() const { return w_; }
    double& bias() { return bias_; }
    double bias() const { return bias_; }

    // Unchecked linear response; callers must pass well-formed sizes.
    double linear_response(std::span<const double> x_row, std::span<const double> y_row,
                           std::span<const double> soft_y_mask, std::size_t x_skip) const;

    TrainingMeta meta;

private:
    std::size_t check_mask(std::size_t x_size, std::size_t y_size, std::size_t mask_size,
                           std::optional<std::size_t> x_excluded) const;

    TargetKind kind_ = TargetKind::YTarget;
    std::size_t target_ = 0;
    std::size_t p_ = 0, m_ = 0;
    ValueDomain domain_ = ValueDomain::Binary;
    std::vector<double> w_;
    double bias_ = 0.0;
};

// Mini-batch SGD with fresh mask draws per batch: one keep/drop bit per
// maskable Y column and, for Y-models, one uniformly chosen hidden X column.
AmortizedModel train_y_model(const DataMatrix& data, std::size_t k, const TrainConfig& cfg,
                             RngHandle& rng);
AmortizedModel train_x_model(const DataMatrix& data, std::size_t j, const TrainConfig& cfg,
                             RngHandle& rng);

}  // namespace scsl
