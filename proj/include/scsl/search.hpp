#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scsl/data.hpp"
#include "scsl/gcm.hpp"
#include "scsl/model.hpp"
#include "scsl/rng.hpp"

namespace scsl {

enum class SearchMode { GSO, Hybrid, NaiveRandom, Exhaustive };

struct SearchConfig {
    SearchMode mode = SearchMode::Hybrid;
    std::size_t q = 400;    // gradient iterations (GSO)
    std::size_t q1 = 200;   // gradient iterations before switching (Hybrid)
    std::size_t q2 = 200;   // sampled subsets after switching (Hybrid, NaiveRandom)
    double tau0 = 1.0;      // temperature after iteration t: max(tau_min, tau0 * tau_decay^t)
    double tau_min = 0.1;
    double tau_decay = 0.99;
    double theta_lr = 0.05;
    double alpha_stop = 0.3;  // any evaluated p above this ends the search; 1 disables
    bool record_trace = false;
    void validate() const;
};

struct TraceRecord {
    std::size_t iter = 0;
    std::vector<std::uint8_t> subset;
    double statistic = 0.0;
    double p_value = 1.0;
};

struct EdgeResult {
    double p_value = 1.0;  // max over all exact evaluations, or 1 when stopped early
    std::optional<std::vector<std::uint8_t>> best_subset;
    bool early_stopped = false;
    std::size_t n_evaluations = 0;
    std::vector<TraceRecord> trace;
};

// Relaxed Bernoulli sample: sigmoid((logit(theta) + g1 - g2) / tau), with the
// temperature applied to both competing logits. Thresholding the result at
// 0.5 recovers an exact Bernoulli(theta) draw.
std::vector<double> gumbel_relax(std::span<const double> theta, std::span<const double> g1,
                                 std::span<const double> g2, double tau);

// prod_i theta_i^{s_i} (1-theta_i)^{1-s_i}, accumulated in log space.
double subset_weight(std::span<const double> theta, std::span<const std::uint8_t> subset);

double anneal_tau(const SearchConfig& cfg, std::size_t t);

// Gradient step on the inclusion probabilities, clamped away from {0,1}.
void theta_step(std::vector<double>& theta, std::span<const double> grad, double lr);

struct RelaxedStat {
    double statistic = 0.0;           // signed t at the soft subset
    std::vector<double> grad;         // d|t| / d soft_subset
};

// Evaluates the statistic with fractional conditioning weights and returns
// the exact derivative of its magnitude, for gradient descent toward the
// least-dependent-looking subset.
RelaxedStat relaxed_statistic_grad(const DataMatrix& data, std::size_t j, std::size_t k,
                                   std::span<const double> soft_subset,
                                   const AmortizedModel& y_model, const AmortizedModel& x_model);

// Upper-bounds the edge p-value by the maximum over the evaluated
// conditioning subsets. No subset is evaluated twice in one call.
EdgeResult search_edge(const DataMatrix& data, std::size_t j, std::size_t k,
                       const AmortizedModel& y_model, const AmortizedModel& x_model,
                       const SearchConfig& cfg, RngHandle& rng);

}  // namespace scsl
