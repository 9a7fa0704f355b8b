#include "scsl/discovery.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "scsl/errors.hpp"
#include "scsl/stats.hpp"

namespace scsl {

namespace {

constexpr std::uint64_t kYModelStream = 1;
constexpr std::uint64_t kXModelStream = 2;
constexpr std::uint64_t kEdgeStream = 3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// Static task partition is not needed; tasks pull from a shared counter and
// write to disjoint slots, so scheduling cannot affect any output value.
void parallel_for(std::size_t n_tasks, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(workers, n_tasks);
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::size_t> bh_procedure(const std::vector<double>& pvals, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("false discovery rate must lie in (0, 1)");
    for (double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainViolation("p-values must lie in [0, 1]");
        }
    }
    const std::size_t n = pvals.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
    std::size_t reject_count = 0;
    for (std::size_t r = n; r >= 1; --r) {
        if (pvals[order[r - 1]] <= q * static_cast<double>(r) / static_cast<double>(n)) {
            reject_count = r;
            break;
        }
    }
    std::vector<std::size_t> rejected(order.begin(),
                                      order.begin() + static_cast<std::ptrdiff_t>(reject_count));
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

Grid<double> marginal_pvalues(const DataMatrix& data) {
    if (data.domain != ValueDomain::Binary) {
        throw DomainViolation("marginal screen requires binary data");
    }
    const std::size_t n = data.n(), p = data.p(), m = data.m();
    Grid<double> out(p, m, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
            std::uint64_t c[2][2] = {{0, 0}, {0, 0}};
            for (std::size_t i = 0; i < n; ++i) {
                const int xv = data.x.at(i, j) > 0.0 ? 1 : 0;
                const int yv = data.y.at(i, k) > 0.0 ? 1 : 0;
                ++c[xv][yv];
            }
            out.at(j, k) = chi2_yates_pvalue_2x2(c[0][0], c[0][1], c[1][0], c[1][1]);
        }
    }
    return out;
}

namespace {

std::vector<EdgeKey> resolve_edges(const DataMatrix& input, const DiscoveryConfig& cfg) {
    cfg.train.validate();
    cfg.search.validate();
    if (!(cfg.fdr_q > 0.0 && cfg.fdr_q < 1.0)) {
        throw ConfigError("fdr_q must lie in (0, 1)");
    }
    if (cfg.parallelism == 0) throw ConfigError("parallelism must be at least 1");
    const std::size_t p = input.p(), m = input.m();
    if (p == 0 || m == 0 || input.n() == 0) throw ConfigError("empty dataset");

    std::vector<EdgeKey> edges;
    if (cfg.edge_filter.has_value()) {
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (auto [j, k] : *cfg.edge_filter) {
            if (j >= p || k >= m) throw ConfigError("edge_filter entry out of range");
            if (!seen.insert({j, k}).second) throw ConfigError("edge_filter entry repeated");
        }
        for (auto jk : seen) edges.push_back({jk.first, jk.second});
    } else {
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t k = 0; k < m; ++k) edges.push_back({j, k});
        }
    }
    return edges;
}

DataMatrix recoded_copy(const DataMatrix& input) {
    if (input.domain == ValueDomain::Binary && input.coding == Coding::ZeroOne) {
        return recode_binary(input);
    }
    return input;
}

void check_cached_model(const AmortizedModel& model, TargetKind kind, std::size_t target,
                        const DataMatrix& data) {
    if (model.kind() != kind || model.target() != target || model.p() != data.p() ||
        model.m() != data.m() || model.domain() != data.domain ||
        model.weights().size() != model.feature_count()) {
        throw ConfigError("cached model does not match the dataset layout");
    }
}

// Everything after training: per-edge subset search, p-value matrix, FDR.
void run_search_phase(const DataMatrix& data, const DiscoveryConfig& cfg,
                      const std::vector<EdgeKey>& edges, DiscoveryReport& report);

}  // namespace

DiscoveryReport discover(const DataMatrix& input, const DiscoveryConfig& cfg) {
    const std::vector<EdgeKey> edges = resolve_edges(input, cfg);
    const DataMatrix data = recoded_copy(input);
    const std::size_t p = data.p(), m = data.m();

    DiscoveryReport report;
    report.rng_family = RngHandle::kFamily;
    report.p_matrix = Grid<double>(p, m, std::numeric_limits<double>::quiet_NaN());
    RngHandle root(cfg.seed);

    auto t0 = std::chrono::steady_clock::now();
    report.y_models.resize(m);
    report.x_models.resize(p);
    parallel_for(p + m, cfg.parallelism, [&](std::size_t task) {
        if (task < m) {
            RngHandle rng = root.child(kYModelStream, task);
            report.y_models[task] = train_y_model(data, task, cfg.train, rng);
        } else {
            const std::size_t j = task - m;
            RngHandle rng = root.child(kXModelStream, j);
            report.x_models[j] = train_x_model(data, j, cfg.train, rng);
        }
    });
    report.model_trainings = p + m;
    report.timing.train_seconds = seconds_since(t0);

    run_search_phase(data, cfg, edges, report);
    return report;
}

DiscoveryReport discover_with_models(const DataMatrix& input, const DiscoveryConfig& cfg,
                                     std::vector<AmortizedModel> y_models,
                                     std::vector<AmortizedModel> x_models) {
    const std::vector<EdgeKey> edges = resolve_edges(input, cfg);
    const DataMatrix data = recoded_copy(input);
    if (y_models.size() != data.m() || x_models.size() != data.p()) {
        throw ConfigError("cached model count does not match the dataset");
    }
    for (std::size_t k = 0; k < y_models.size(); ++k) {
        check_cached_model(y_models[k], TargetKind::YTarget, k, data);
    }
    for (std::size_t j = 0; j < x_models.size(); ++j) {
        check_cached_model(x_models[j], TargetKind::XTarget, j, data);
    }

    DiscoveryReport report;
    report.rng_family = RngHandle::kFamily;
    report.p_matrix = Grid<double>(data.p(), data.m(), std::numeric_limits<double>::quiet_NaN());
    report.y_models = std::move(y_models);
    report.x_models = std::move(x_models);
    report.model_trainings = 0;

    run_search_phase(data, cfg, edges, report);
    return report;
}

namespace {

void run_search_phase(const DataMatrix& data, const DiscoveryConfig& cfg,
                      const std::vector<EdgeKey>& edges, DiscoveryReport& report) {
    RngHandle root(cfg.seed);
    auto t1 = std::chrono::steady_clock::now();
    report.edges.resize(edges.size());
    parallel_for(edges.size(), cfg.parallelism, [&](std::size_t e) {
        const EdgeKey key = edges[e];
        EdgeOutcome& out = report.edges[e];
        out.edge = key;
        RngHandle rng = root.child(kEdgeStream, key.j, key.k);
        try {
            out.result = search_edge(data, key.j, key.k, report.y_models[key.k],
                                     report.x_models[key.j], cfg.search, rng);
        } catch (const Error& err) {
            out.error = err.what();
        }
    });
    for (const EdgeOutcome& out : report.edges) {
        if (out.error.empty()) {
            report.p_matrix.at(out.edge.j, out.edge.k) = out.result.p_value;
        }
    }
    report.timing.search_seconds = seconds_since(t1);

    std::vector<double> tested_p;
    std::vector<EdgeKey> tested_keys;
    for (const EdgeOutcome& out : report.edges) {
        if (out.error.empty()) {
            tested_p.push_back(out.result.p_value);
            tested_keys.push_back(out.edge);
        }
    }
    if (!tested_p.empty()) {
        for (std::size_t idx : bh_procedure(tested_p, cfg.fdr_q)) {
            report.rejections.push_back(tested_keys[idx]);
        }
        std::sort(report.rejections.begin(), report.rejections.end(),
                  [](const EdgeKey& a, const EdgeKey& b) {
                      return a.j != b.j ? a.j < b.j : a.k < b.k;
                  });
    }
}

}  // namespace

}  // namespace scsl
