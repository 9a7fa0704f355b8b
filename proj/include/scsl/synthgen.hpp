#pragma once

#include <span>
#include <vector>

#include "scsl/data.hpp"
#include "scsl/rng.hpp"

namespace scsl {

struct GenConfig {
    std::size_t k_parents = 2;   // X parents per target column
    double conf_p = 0.0;         // probability of including each earlier Y as a parent
    double coef_mean = 2.0;      // coefficient distribution
    double coef_sd = 1.0;
    std::size_t m_targets = 1;   // generated Y columns
    double noise_sd = 1.0;       // continuous variants only
    void validate(std::size_t p) const;
};

// Explicit per-target parameters; the public generators sample these,
// the *_with_params entry points take them as given.
struct EdgeParams {
    std::vector<std::vector<std::size_t>> x_parents;  // ascending, distinct
    std::vector<std::vector<double>> beta;            // aligned with x_parents
    std::vector<std::vector<std::size_t>> y_parents;  // earlier targets only
    std::vector<std::vector<double>> gamma;           // aligned with y_parents
};

struct SemiSynthOutput {
    DataMatrix data;
    GroundTruthGraph truth;                // p x m
    Grid<std::uint8_t> y_internal_edges;   // m x m, strictly lower-triangular
    EdgeParams params;
};

// sigmoid(beta . x); sizes must agree.
double logistic_likelihood(std::span<const double> beta, std::span<const double> x);

// Row-resampling generator: X and Y rows are shuffled independently, then for
// each output row a Y row index is drawn with probability proportional to the
// likelihood of that row's Y values under the sampled per-target models
// evaluated at the output row's X values. Output Y rows are exact copies of
// input Y rows.
SemiSynthOutput gen_real_confounding(const DataMatrix& input, const GenConfig& cfg, RngHandle& rng);

// Sequential generator: each Y_k is drawn from a logistic model of its sampled
// X parents plus earlier Y columns included independently with prob conf_p.
SemiSynthOutput gen_synth_confounding(const DataMatrix& x_input, const GenConfig& cfg,
                                      RngHandle& rng);

// Continuous counterparts: Gaussian likelihood / additive Gaussian noise.
SemiSynthOutput gen_real_confounding_continuous(const DataMatrix& input, const GenConfig& cfg,
                                                RngHandle& rng);
SemiSynthOutput gen_synth_confounding_continuous(const DataMatrix& x_input, const GenConfig& cfg,
                                                 RngHandle& rng);

SemiSynthOutput real_confounding_with_params(const DataMatrix& input, const GenConfig& cfg,
                                             const EdgeParams& params, RngHandle& rng,
                                             ValueDomain out_domain);
SemiSynthOutput synth_confounding_with_params(const DataMatrix& x_input, const GenConfig& cfg,
                                              const EdgeParams& params, RngHandle& rng,
                                              ValueDomain out_domain);

}  // namespace scsl
