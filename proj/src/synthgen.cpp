#include "scsl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scsl/errors.hpp"
#include "scsl/stats.hpp"

namespace scsl {

namespace {

void require_binary_input(const DataMatrix& d) {
    if (d.domain != ValueDomain::Binary || d.coding != Coding::ZeroOne) {
        throw DomainViolation("generator requires binary {0,1} input data");
    }
}

Grid<double> permuted_rows(const Grid<double>& g, const std::vector<std::size_t>& perm) {
    Grid<double> out(g.rows(), g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r) {
        auto src = g.row(perm[r]);
        auto dst = out.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, RngHandle& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    return idx;
}

std::vector<std::size_t> sample_parents(std::size_t p, std::size_t k, RngHandle& rng) {
    std::vector<std::size_t> idx = shuffled_indices(p, rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

double dot_at(const Grid<double>& x, std::size_t row, const std::vector<std::size_t>& cols,
              const std::vector<double>& coef) {
    double z = 0.0;
    for (std::size_t a = 0; a < cols.size(); ++a) z += coef[a] * x.at(row, cols[a]);
    return z;
}

void validate_params(const EdgeParams& params, std::size_t p, std::size_t m, bool allow_y_parents) {
    if (params.x_parents.size() != m || params.beta.size() != m) {
        throw ConfigError("parameter lists must have one entry per target");
    }
    for (std::size_t k = 0; k < m; ++k) {
        const auto& par = params.x_parents[k];
        if (par.size() != params.beta[k].size()) {
            throw ConfigError("beta size must match parent count");
        }
        for (std::size_t a = 0; a < par.size(); ++a) {
            if (par[a] >= p) throw ConfigError("parent index out of range");
            if (a > 0 && par[a] <= par[a - 1]) throw ConfigError("parents must be ascending");
        }
    }
    if (!allow_y_parents) {
        if (!params.y_parents.empty() || !params.gamma.empty()) {
            throw ConfigError("row-resampling generator takes no Y->Y parents");
        }
        return;
    }
    if (params.y_parents.size() != m || params.gamma.size() != m) {
        throw ConfigError("parameter lists must have one entry per target");
    }
    for (std::size_t k = 0; k < m; ++k) {
        const auto& par = params.y_parents[k];
        if (par.size() != params.gamma[k].size()) {
            throw ConfigError("gamma size must match Y parent count");
        }
        for (std::size_t a = 0; a < par.size(); ++a) {
            if (par[a] >= k) throw ConfigError("Y parents must be earlier targets");
            if (a > 0 && par[a] <= par[a - 1]) throw ConfigError("Y parents must be ascending");
        }
    }
}

EdgeParams sample_real_params(std::size_t p, const GenConfig& cfg, RngHandle& rng) {
    EdgeParams params;
    params.x_parents.resize(cfg.m_targets);
    params.beta.resize(cfg.m_targets);
    for (std::size_t k = 0; k < cfg.m_targets; ++k) {
        params.x_parents[k] = sample_parents(p, cfg.k_parents, rng);
        params.beta[k].resize(cfg.k_parents);
        for (double& b : params.beta[k]) b = rng.normal(cfg.coef_mean, cfg.coef_sd);
    }
    return params;
}

GroundTruthGraph truth_from_params(std::size_t p, const EdgeParams& params) {
    GroundTruthGraph g;
    g.adjacency = Grid<std::uint8_t>(p, params.x_parents.size(), 0);
    for (std::size_t k = 0; k < params.x_parents.size(); ++k) {
        for (std::size_t j : params.x_parents[k]) g.adjacency.at(j, k) = 1;
    }
    return g;
}

}  // namespace

void GenConfig::validate(std::size_t p) const {
    if (m_targets == 0) throw ConfigError("m_targets must be at least 1");
    if (k_parents == 0) throw ConfigError("k_parents must be at least 1");
    if (k_parents > p) {
        throw ConfigError("k_parents = " + std::to_string(k_parents) + " exceeds available X columns (" +
                          std::to_string(p) + ")");
    }
    if (!(conf_p >= 0.0 && conf_p <= 1.0)) throw ConfigError("conf_p must lie in [0, 1]");
    if (!(coef_sd > 0.0)) throw ConfigError("coef_sd must be positive");
    if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be nonnegative");
}

double logistic_likelihood(std::span<const double> beta, std::span<const double> x) {
    if (beta.size() != x.size()) {
        throw LengthMismatch("coefficient length " + std::to_string(beta.size()) +
                             " does not match input length " + std::to_string(x.size()));
    }
    double z = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) z += beta[i] * x[i];
    return sigmoid(z);
}

SemiSynthOutput real_confounding_with_params(const DataMatrix& input, const GenConfig& cfg,
                                             const EdgeParams& params, RngHandle& rng,
                                             ValueDomain out_domain) {
    cfg.validate(input.p());
    if (cfg.m_targets > input.m()) {
        throw ConfigError("m_targets exceeds available Y columns");
    }
    if (out_domain == ValueDomain::Binary) {
        require_binary_input(input);
    } else if (input.domain != ValueDomain::Continuous) {
        throw DomainViolation("continuous generator requires continuous input data");
    }
    if (out_domain == ValueDomain::Continuous && !(cfg.noise_sd > 0.0)) {
        throw ConfigError("continuous row resampling needs noise_sd > 0");
    }
    validate_params(params, input.p(), cfg.m_targets, false);

    const std::size_t n = input.n();
    const std::size_t m = cfg.m_targets;

    Grid<double> x_out = permuted_rows(input.x, shuffled_indices(n, rng));
    Grid<double> y_shuf = permuted_rows(input.y, shuffled_indices(n, rng));

    // Per (row, target) model mean on the output X.
    Grid<double> z(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            z.at(i, k) = dot_at(x_out, i, params.x_parents[k], params.beta[k]);
        }
    }
    // Log-likelihood pieces per (row, target).
    Grid<double> lp1, lp0;
    const double inv2var = (out_domain == ValueDomain::Continuous)
                               ? 1.0 / (2.0 * cfg.noise_sd * cfg.noise_sd)
                               : 0.0;
    if (out_domain == ValueDomain::Binary) {
        lp1 = Grid<double>(n, m);
        lp0 = Grid<double>(n, m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < m; ++k) {
                lp1.at(i, k) = -softplus(-z.at(i, k));
                lp0.at(i, k) = -softplus(z.at(i, k));
            }
        }
    }

    Grid<double> y_out(n, m);
    std::vector<double> logw(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < n; ++t) {
            double s = 0.0;
            if (out_domain == ValueDomain::Binary) {
                for (std::size_t k = 0; k < m; ++k) {
                    s += (y_shuf.at(t, k) == 1.0) ? lp1.at(i, k) : lp0.at(i, k);
                }
            } else {
                for (std::size_t k = 0; k < m; ++k) {
                    const double r = y_shuf.at(t, k) - z.at(i, k);
                    s -= r * r * inv2var;
                }
            }
            logw[t] = s;
        }
        const double mx = *std::max_element(logw.begin(), logw.end());
        double total = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            w[t] = std::exp(logw[t] - mx);
            total += w[t];
        }
        if (!std::isfinite(total) || total <= 0.0) {
            throw DegenerateLikelihood("row likelihoods vanished after stabilization");
        }
        double u = rng.uniform01() * total;
        std::size_t pick = n - 1;
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += w[t];
            if (u < acc) {
                pick = t;
                break;
            }
        }
        for (std::size_t k = 0; k < m; ++k) y_out.at(i, k) = y_shuf.at(pick, k);
    }

    SemiSynthOutput out;
    out.data.x = std::move(x_out);
    out.data.y = std::move(y_out);
    out.data.domain = out_domain;
    out.data.coding = Coding::ZeroOne;
    out.data.x_names = input.x_names;
    out.data.y_names.assign(input.y_names.begin(), input.y_names.begin() + m);
    out.truth = truth_from_params(input.p(), params);
    out.y_internal_edges = Grid<std::uint8_t>(m, m, 0);
    out.params = params;
    return out;
}

SemiSynthOutput synth_confounding_with_params(const DataMatrix& x_input, const GenConfig& cfg,
                                              const EdgeParams& params, RngHandle& rng,
                                              ValueDomain out_domain) {
    cfg.validate(x_input.p());
    if (out_domain == ValueDomain::Binary) {
        require_binary_input(x_input);
    } else if (x_input.domain != ValueDomain::Continuous) {
        throw DomainViolation("continuous generator requires continuous input data");
    }
    validate_params(params, x_input.p(), cfg.m_targets, true);

    const std::size_t n = x_input.n();
    const std::size_t m = cfg.m_targets;

    Grid<double> x_out = permuted_rows(x_input.x, shuffled_indices(n, rng));
    Grid<double> y_out(n, m);

    for (std::size_t k = 0; k < m; ++k) {
        const auto& ypar = params.y_parents[k];
        const auto& gam = params.gamma[k];
        for (std::size_t i = 0; i < n; ++i) {
            double z = dot_at(x_out, i, params.x_parents[k], params.beta[k]);
            for (std::size_t a = 0; a < ypar.size(); ++a) z += gam[a] * y_out.at(i, ypar[a]);
            if (out_domain == ValueDomain::Binary) {
                y_out.at(i, k) = rng.bernoulli(sigmoid(z)) ? 1.0 : 0.0;
            } else {
                y_out.at(i, k) = z + cfg.noise_sd * rng.normal();
            }
        }
    }

    SemiSynthOutput out;
    out.data.x = std::move(x_out);
    out.data.y = std::move(y_out);
    out.data.domain = out_domain;
    out.data.coding = Coding::ZeroOne;
    out.data.x_names = x_input.x_names;
    out.data.y_names.resize(m);
    for (std::size_t k = 0; k < m; ++k) out.data.y_names[k] = "Y" + std::to_string(k + 1);
    out.truth = truth_from_params(x_input.p(), params);
    out.y_internal_edges = Grid<std::uint8_t>(m, m, 0);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l : params.y_parents[k]) out.y_internal_edges.at(k, l) = 1;
    }
    out.params = params;
    return out;
}

SemiSynthOutput gen_real_confounding(const DataMatrix& input, const GenConfig& cfg, RngHandle& rng) {
    cfg.validate(input.p());
    if (cfg.m_targets > input.m()) throw ConfigError("m_targets exceeds available Y columns");
    // Shuffles happen inside the core; parameters are drawn afterwards from
    // the same stream, in target order.
    require_binary_input(input);
    RngHandle param_rng = rng.child(1);
    RngHandle row_rng = rng.child(2);
    EdgeParams params = sample_real_params(input.p(), cfg, param_rng);
    return real_confounding_with_params(input, cfg, params, row_rng, ValueDomain::Binary);
}

SemiSynthOutput gen_real_confounding_continuous(const DataMatrix& input, const GenConfig& cfg,
                                                RngHandle& rng) {
    cfg.validate(input.p());
    if (cfg.m_targets > input.m()) throw ConfigError("m_targets exceeds available Y columns");
    if (input.domain != ValueDomain::Continuous) {
        throw DomainViolation("continuous generator requires continuous input data");
    }
    RngHandle param_rng = rng.child(1);
    RngHandle row_rng = rng.child(2);
    EdgeParams params = sample_real_params(input.p(), cfg, param_rng);
    return real_confounding_with_params(input, cfg, params, row_rng, ValueDomain::Continuous);
}

namespace {

EdgeParams sample_synth_params(std::size_t p, const GenConfig& cfg, RngHandle& rng) {
    EdgeParams params;
    const std::size_t m = cfg.m_targets;
    params.x_parents.resize(m);
    params.beta.resize(m);
    params.y_parents.resize(m);
    params.gamma.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        params.x_parents[k] = sample_parents(p, cfg.k_parents, rng);
        for (std::size_t l = 0; l < k; ++l) {
            if (rng.bernoulli(cfg.conf_p)) params.y_parents[k].push_back(l);
        }
        params.beta[k].resize(cfg.k_parents);
        for (double& b : params.beta[k]) b = rng.normal(cfg.coef_mean, cfg.coef_sd);
        params.gamma[k].resize(params.y_parents[k].size());
        for (double& g : params.gamma[k]) g = rng.normal(cfg.coef_mean, cfg.coef_sd);
    }
    return params;
}

}  // namespace

SemiSynthOutput gen_synth_confounding(const DataMatrix& x_input, const GenConfig& cfg,
                                      RngHandle& rng) {
    cfg.validate(x_input.p());
    require_binary_input(x_input);
    RngHandle param_rng = rng.child(1);
    RngHandle row_rng = rng.child(2);
    EdgeParams params = sample_synth_params(x_input.p(), cfg, param_rng);
    return synth_confounding_with_params(x_input, cfg, params, row_rng, ValueDomain::Binary);
}

SemiSynthOutput gen_synth_confounding_continuous(const DataMatrix& x_input, const GenConfig& cfg,
                                                 RngHandle& rng) {
    cfg.validate(x_input.p());
    if (x_input.domain != ValueDomain::Continuous) {
        throw DomainViolation("continuous generator requires continuous input data");
    }
    RngHandle param_rng = rng.child(1);
    RngHandle row_rng = rng.child(2);
    EdgeParams params = sample_synth_params(x_input.p(), cfg, param_rng);
    return synth_confounding_with_params(x_input, cfg, params, row_rng, ValueDomain::Continuous);
}

}  // namespace scsl
