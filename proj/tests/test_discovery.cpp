#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "scsl/discovery.hpp"
#include "scsl/errors.hpp"
#include "scsl/rng.hpp"
#include "scsl/stats.hpp"
#include "scsl/synthgen.hpp"

using namespace scsl;

namespace {

// Reference implementation straight from the step-up definition: reject the
// smallest r p-values where r is the largest rank with p_(r) <= q * r / M.
std::vector<std::size_t> bh_by_definition(const std::vector<double>& pvals, double q) {
    const std::size_t m = pvals.size();
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
    std::size_t r = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (pvals[order[i]] <= q * static_cast<double>(i + 1) / static_cast<double>(m)) {
            r = i + 1;
        }
    }
    std::vector<std::size_t> rejected(order.begin(), order.begin() + r);
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

DataMatrix coin_data(std::size_t n, std::size_t p, std::size_t m, RngHandle& rng) {
    DataMatrix d;
    d.domain = ValueDomain::Binary;
    d.x = Grid<double>(n, p);
    d.y = Grid<double>(n, m);
    for (double& v : d.x.data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    for (double& v : d.y.data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    d.x_names.resize(p);
    d.y_names.resize(m);
    for (std::size_t j = 0; j < p; ++j) d.x_names[j] = "X" + std::to_string(j + 1);
    for (std::size_t k = 0; k < m; ++k) d.y_names[k] = "Y" + std::to_string(k + 1);
    return d;
}

DiscoveryConfig small_config() {
    DiscoveryConfig cfg;
    cfg.train.n_epochs = 4;
    cfg.train.batch_size = 32;
    cfg.search.mode = SearchMode::Hybrid;
    cfg.search.q1 = 3;
    cfg.search.q2 = 4;
    cfg.search.alpha_stop = 1.0;
    cfg.seed = 77;
    return cfg;
}

}  // namespace

TEST_SUITE("discovery") {

TEST_CASE("step-up rejection on a reference vector") {
    // Sorted bounds at q = 0.05, M = 4: 0.0125, 0.025, 0.0375, 0.05.
    std::vector<double> pvals = {0.01, 0.02, 0.04, 0.5};
    std::vector<std::size_t> rejected = bh_procedure(pvals, 0.05);
    REQUIRE(rejected.size() == 2);
    CHECK(rejected[0] == 0);
    CHECK(rejected[1] == 1);
}

TEST_CASE("step-up accepts everything or nothing at the extremes") {
    CHECK(bh_procedure({}, 0.05).empty());
    CHECK(bh_procedure({0.9, 0.8}, 0.05).empty());
    std::vector<std::size_t> all = bh_procedure({1e-10, 1e-9, 1e-8}, 0.05);
    CHECK(all == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("step-up input validation") {
    CHECK_THROWS_AS(bh_procedure({0.5}, 0.0), ConfigError);
    CHECK_THROWS_AS(bh_procedure({0.5}, 1.0), ConfigError);
    CHECK_THROWS_AS(bh_procedure({1.5}, 0.05), DomainViolation);
    CHECK_THROWS_AS(bh_procedure({std::nan("")}, 0.05), DomainViolation);
}

TEST_CASE("step-up agrees with the definitional oracle") {
    RngHandle rng(61);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + rng.uniform_below(30);
        std::vector<double> pvals(m);
        for (double& v : pvals) {
            // Mix tiny and moderate values so rejection counts vary.
            v = rng.bernoulli(0.4) ? rng.uniform01() * 0.02 : rng.uniform01();
        }
        const double q = 0.01 + 0.2 * rng.uniform01();
        CHECK(bh_procedure(pvals, q) == bh_by_definition(pvals, q));
    }
}

TEST_CASE("parallel map covers every index exactly once") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 8, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
    parallel_for(0, 4, [&](std::size_t) { FAIL("no tasks expected"); });
}

TEST_CASE("parallel map propagates the first failure") {
    CHECK_THROWS_AS(parallel_for(10, 4,
                                 [&](std::size_t i) {
                                     if (i == 3) throw ConfigError("boom");
                                 }),
                    ConfigError);
}

TEST_CASE("marginal screen flags correlated coin pairs") {
    RngHandle rng(62);
    DataMatrix d = coin_data(500, 2, 2, rng);
    for (std::size_t i = 0; i < 500; ++i) d.y.at(i, 0) = d.x.at(i, 0);  // perfect dependence
    Grid<double> p = marginal_pvalues(d);
    REQUIRE(p.rows() == 2);
    REQUIRE(p.cols() == 2);
    CHECK(p.at(0, 0) < 1e-12);
    CHECK(p.at(1, 1) > 0.01);

    DataMatrix cont = d;
    cont.domain = ValueDomain::Continuous;
    CHECK_THROWS_AS(marginal_pvalues(cont), DomainViolation);
}

TEST_CASE("marginal screen returns one for constant columns") {
    RngHandle rng(63);
    DataMatrix d = coin_data(100, 1, 1, rng);
    for (std::size_t i = 0; i < 100; ++i) d.y.at(i, 0) = 1.0;
    Grid<double> p = marginal_pvalues(d);
    CHECK(p.at(0, 0) == 1.0);
}

TEST_CASE("full run fills the matrix and reports consistently") {
    RngHandle rng(64);
    DataMatrix d = coin_data(200, 2, 3, rng);
    DiscoveryConfig cfg = small_config();
    DiscoveryReport rep = discover(d, cfg);

    CHECK(rep.model_trainings == 5);
    CHECK(rep.rng_family == RngHandle::kFamily);
    CHECK(rep.edges.size() == 6);
    CHECK(rep.y_models.size() == 3);
    CHECK(rep.x_models.size() == 2);
    REQUIRE(rep.p_matrix.rows() == 2);
    REQUIRE(rep.p_matrix.cols() == 3);
    for (const auto& e : rep.edges) {
        CHECK(e.error.empty());
        const double p = rep.p_matrix.at(e.edge.j, e.edge.k);
        CHECK(p == e.result.p_value);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    for (const auto& r : rep.rejections) {
        CHECK(rep.p_matrix.at(r.j, r.k) <= 1.0);
    }
}

TEST_CASE("rejections follow the step-up rule over tested edges") {
    RngHandle rng(65);
    GenConfig gen;
    gen.k_parents = 2;
    gen.m_targets = 4;
    DataMatrix input = coin_data(600, 4, 4, rng);
    RngHandle gen_rng(8);
    SemiSynthOutput out = gen_synth_confounding(input, gen, gen_rng);
    DataMatrix d = out.data;

    DiscoveryConfig cfg = small_config();
    cfg.train.n_epochs = 12;
    DiscoveryReport rep = discover(d, cfg);

    std::vector<double> pvals;
    std::vector<EdgeKey> keys;
    for (const auto& e : rep.edges) {
        if (!e.error.empty()) continue;
        pvals.push_back(e.result.p_value);
        keys.push_back(e.edge);
    }
    std::vector<std::size_t> idx = bh_procedure(pvals, cfg.fdr_q);
    std::vector<EdgeKey> expect;
    for (std::size_t i : idx) expect.push_back(keys[i]);
    REQUIRE(rep.rejections.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(rep.rejections[i] == expect[i]);
    }
}

TEST_CASE("edge filter limits testing to the requested pairs") {
    RngHandle rng(66);
    DataMatrix d = coin_data(150, 3, 3, rng);
    DiscoveryConfig cfg = small_config();
    cfg.edge_filter = {{{0, 1}, {2, 2}}};
    DiscoveryReport rep = discover(d, cfg);
    CHECK(rep.edges.size() == 2);
    CHECK(rep.model_trainings == 6);  // amortization still trains every column
    std::size_t tested = 0;
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k < 3; ++k) {
            const bool requested = (j == 0 && k == 1) || (j == 2 && k == 2);
            if (requested) {
                CHECK_FALSE(std::isnan(rep.p_matrix.at(j, k)));
                ++tested;
            } else {
                CHECK(std::isnan(rep.p_matrix.at(j, k)));
            }
        }
    }
    CHECK(tested == 2);

    cfg.edge_filter = {{{5, 0}}};
    CHECK_THROWS_AS(discover(d, cfg), ConfigError);
    cfg.edge_filter = {{{0, 1}, {0, 1}}};
    CHECK_THROWS_AS(discover(d, cfg), ConfigError);
}

TEST_CASE("worker count never changes the answer") {
    RngHandle rng(67);
    DataMatrix d = coin_data(200, 3, 3, rng);
    DiscoveryConfig cfg = small_config();
    cfg.parallelism = 1;
    DiscoveryReport serial = discover(d, cfg);
    cfg.parallelism = 4;
    DiscoveryReport parallel = discover(d, cfg);
    CHECK(serial.p_matrix == parallel.p_matrix);
    REQUIRE(serial.rejections.size() == parallel.rejections.size());
    for (std::size_t i = 0; i < serial.rejections.size(); ++i) {
        CHECK(serial.rejections[i] == parallel.rejections[i]);
    }
}

TEST_CASE("cached models reproduce the training run exactly") {
    RngHandle rng(68);
    DataMatrix d = coin_data(200, 2, 3, rng);
    DiscoveryConfig cfg = small_config();
    DiscoveryReport first = discover(d, cfg);
    DiscoveryReport second = discover_with_models(d, cfg, first.y_models, first.x_models);
    CHECK(second.model_trainings == 0);
    CHECK(first.p_matrix == second.p_matrix);

    std::vector<AmortizedModel> wrong = first.y_models;
    wrong.pop_back();
    CHECK_THROWS_AS(discover_with_models(d, cfg, wrong, first.x_models), ConfigError);
    wrong = first.y_models;
    wrong[0] = AmortizedModel(TargetKind::YTarget, 0, 5, 3, ValueDomain::Binary);
    CHECK_THROWS_AS(discover_with_models(d, cfg, wrong, first.x_models), ConfigError);
}

TEST_CASE("invalid discovery inputs are rejected up front") {
    RngHandle rng(69);
    DataMatrix d = coin_data(50, 2, 2, rng);
    DiscoveryConfig cfg = small_config();
    cfg.fdr_q = 0.0;
    CHECK_THROWS_AS(discover(d, cfg), ConfigError);
    cfg = small_config();
    cfg.fdr_q = 1.5;
    CHECK_THROWS_AS(discover(d, cfg), ConfigError);
    cfg = small_config();
    DataMatrix empty;
    CHECK_THROWS_AS(discover(empty, cfg), ConfigError);
    cfg.parallelism = 0;
    CHECK_THROWS_AS(discover(d, cfg), ConfigError);
}

}  // TEST_SUITE
