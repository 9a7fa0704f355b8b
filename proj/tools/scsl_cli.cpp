// Command-line front end: dataset generation, discovery runs, benchmark
// sweeps, and per-edge search traces. All run parameters come from a JSON
// config file; a few flags override config fields for convenience.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scsl/data.hpp"
#include "scsl/discovery.hpp"
#include "scsl/errors.hpp"
#include "scsl/fs_util.hpp"
#include "scsl/json_io.hpp"
#include "scsl/metrics.hpp"
#include "scsl/rng.hpp"
#include "scsl/search.hpp"
#include "scsl/synthgen.hpp"

namespace fs = std::filesystem;
using scsl::Json;

namespace {

// Configuration problems exit with code 2; runtime failures with 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- logging

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel g_log_level = LogLevel::Warn;

void init_logging() {
    const char* env = std::getenv("SCSL_LOG");
    if (!env) return;
    const std::string v = env;
    if (v == "error") g_log_level = LogLevel::Error;
    else if (v == "warn") g_log_level = LogLevel::Warn;
    else if (v == "info") g_log_level = LogLevel::Info;
    else if (v == "debug") g_log_level = LogLevel::Debug;
    else throw UsageError("SCSL_LOG must be one of error, warn, info, debug (got '" + v + "')");
}

void log_at(LogLevel level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (static_cast<int>(level) > static_cast<int>(g_log_level)) return;
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

void log_error(const std::string& m) { log_at(LogLevel::Error, m); }
void log_warn(const std::string& m) { log_at(LogLevel::Warn, m); }
void log_info(const std::string& m) { log_at(LogLevel::Info, m); }
void log_debug(const std::string& m) { log_at(LogLevel::Debug, m); }

// ------------------------------------------------------- config plumbing

Json parse_json_text(const std::string& text, const std::string& display_name) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // nlohmann's message already carries line and column.
        throw UsageError(display_name + ": " + e.what());
    }
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw UsageError(path + ": expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw UsageError(path + ": unknown field '" + item.key() + "'");
    }
}

const Json* find_field(const Json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const Json& req_field(const Json& obj, const std::string& path, const std::string& key) {
    const Json* f = find_field(obj, key);
    if (!f) throw UsageError(path + ": missing required field '" + key + "'");
    return *f;
}

std::size_t as_usize(const Json& v, const std::string& path) {
    if (!v.is_number_unsigned()) throw UsageError(path + ": expected a nonnegative integer");
    return v.get<std::size_t>();
}

std::uint64_t as_u64(const Json& v, const std::string& path) {
    if (!v.is_number_unsigned()) throw UsageError(path + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

double as_double(const Json& v, const std::string& path) {
    if (!v.is_number()) throw UsageError(path + ": expected a number");
    return v.get<double>();
}

bool as_bool(const Json& v, const std::string& path) {
    if (!v.is_boolean()) throw UsageError(path + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) throw UsageError(path + ": expected a string");
    return v.get<std::string>();
}

std::size_t usize_or(const Json& obj, const std::string& path, const std::string& key,
                     std::size_t def) {
    const Json* f = find_field(obj, key);
    return f ? as_usize(*f, path + "." + key) : def;
}

double double_or(const Json& obj, const std::string& path, const std::string& key, double def) {
    const Json* f = find_field(obj, key);
    return f ? as_double(*f, path + "." + key) : def;
}

bool bool_or(const Json& obj, const std::string& path, const std::string& key, bool def) {
    const Json* f = find_field(obj, key);
    return f ? as_bool(*f, path + "." + key) : def;
}

std::optional<std::string> string_opt(const Json& obj, const std::string& path,
                                      const std::string& key) {
    const Json* f = find_field(obj, key);
    if (!f) return std::nullopt;
    return as_string(*f, path + "." + key);
}

scsl::ValueDomain parse_domain_field(const Json& obj, const std::string& path) {
    const Json* f = find_field(obj, "domain");
    if (!f) return scsl::ValueDomain::Binary;
    const std::string v = as_string(*f, path + ".domain");
    if (v == "binary") return scsl::ValueDomain::Binary;
    if (v == "continuous") return scsl::ValueDomain::Continuous;
    throw UsageError(path + ".domain: expected 'binary' or 'continuous' (got '" + v + "')");
}

scsl::TrainConfig parse_train(const Json& parent, const std::string& parent_path) {
    scsl::TrainConfig cfg;
    const Json* block = find_field(parent, "train");
    if (!block) return cfg;
    const std::string path = parent_path + ".train";
    check_keys(*block, path, {"n_epochs", "batch_size", "learning_rate", "p_mask", "l2_lambda"});
    cfg.n_epochs = usize_or(*block, path, "n_epochs", cfg.n_epochs);
    cfg.batch_size = usize_or(*block, path, "batch_size", cfg.batch_size);
    cfg.learning_rate = double_or(*block, path, "learning_rate", cfg.learning_rate);
    cfg.p_mask = double_or(*block, path, "p_mask", cfg.p_mask);
    cfg.l2_lambda = double_or(*block, path, "l2_lambda", cfg.l2_lambda);
    try {
        cfg.validate();
    } catch (const scsl::ConfigError& e) {
        throw UsageError(path + ": " + e.what());
    }
    return cfg;
}

scsl::SearchMode parse_search_mode(const std::string& v, const std::string& path) {
    if (v == "gso") return scsl::SearchMode::GSO;
    if (v == "hybrid") return scsl::SearchMode::Hybrid;
    if (v == "naive_random") return scsl::SearchMode::NaiveRandom;
    if (v == "exhaustive") return scsl::SearchMode::Exhaustive;
    throw UsageError(path + ": expected one of gso, hybrid, naive_random, exhaustive (got '" + v +
                     "')");
}

const char* search_mode_name(scsl::SearchMode mode) {
    switch (mode) {
        case scsl::SearchMode::GSO: return "gso";
        case scsl::SearchMode::Hybrid: return "hybrid";
        case scsl::SearchMode::NaiveRandom: return "naive_random";
        case scsl::SearchMode::Exhaustive: return "exhaustive";
    }
    return "?";
}

scsl::SearchConfig parse_search(const Json& parent, const std::string& parent_path) {
    scsl::SearchConfig cfg;
    const Json* block = find_field(parent, "search");
    if (!block) return cfg;
    const std::string path = parent_path + ".search";
    check_keys(*block, path,
               {"mode", "q", "q1", "q2", "tau0", "tau_min", "tau_decay", "theta_lr", "alpha_stop"});
    if (const Json* f = find_field(*block, "mode")) {
        cfg.mode = parse_search_mode(as_string(*f, path + ".mode"), path + ".mode");
    }
    cfg.q = usize_or(*block, path, "q", cfg.q);
    cfg.q1 = usize_or(*block, path, "q1", cfg.q1);
    cfg.q2 = usize_or(*block, path, "q2", cfg.q2);
    cfg.tau0 = double_or(*block, path, "tau0", cfg.tau0);
    cfg.tau_min = double_or(*block, path, "tau_min", cfg.tau_min);
    cfg.tau_decay = double_or(*block, path, "tau_decay", cfg.tau_decay);
    cfg.theta_lr = double_or(*block, path, "theta_lr", cfg.theta_lr);
    cfg.alpha_stop = double_or(*block, path, "alpha_stop", cfg.alpha_stop);
    try {
        cfg.validate();
    } catch (const scsl::ConfigError& e) {
        throw UsageError(path + ": " + e.what());
    }
    return cfg;
}

// Generator knobs shared by generate and bench; conf_p and m_targets are
// wired separately because bench sweeps them.
scsl::GenConfig parse_generator_block(const Json& block, const std::string& path) {
    scsl::GenConfig cfg;
    cfg.k_parents = usize_or(block, path, "k_parents", cfg.k_parents);
    cfg.conf_p = double_or(block, path, "conf_p", cfg.conf_p);
    cfg.coef_mean = double_or(block, path, "coef_mean", cfg.coef_mean);
    cfg.coef_sd = double_or(block, path, "coef_sd", cfg.coef_sd);
    cfg.noise_sd = double_or(block, path, "noise_sd", cfg.noise_sd);
    if (!(cfg.conf_p >= 0.0 && cfg.conf_p <= 1.0)) {
        throw UsageError(path + ".conf_p: must lie in [0, 1]");
    }
    if (!(cfg.coef_sd > 0.0)) throw UsageError(path + ".coef_sd: must be positive");
    if (!(cfg.noise_sd >= 0.0)) throw UsageError(path + ".noise_sd: must be nonnegative");
    if (cfg.k_parents == 0) throw UsageError(path + ".k_parents: must be at least 1");
    return cfg;
}

// -------------------------------------------------------------- CLI state

struct CliArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::size_t workers = 0;
    bool has_workers = false;
    std::string out;
    bool has_out = false;
    bool force = false;
};

struct RunContext {
    Json root;
    std::uint64_t seed = 0;
    fs::path out_dir;
    std::optional<std::size_t> workers_override;
    bool force = false;
};

RunContext make_context(const CliArgs& args, const char* verb) {
    RunContext ctx;
    ctx.root = parse_json_text(scsl::read_text(args.config_path), args.config_path);
    check_keys(ctx.root, "config", {"seed", "out", "generate", "discover", "bench", "trace"});
    ctx.seed = args.has_seed ? args.seed : as_u64(req_field(ctx.root, "config", "seed"), "config.seed");
    std::string out = ".";
    if (auto v = string_opt(ctx.root, "config", "out")) out = *v;
    if (args.has_out) out = args.out;
    ctx.out_dir = out;
    if (args.has_workers) {
        if (args.workers == 0) throw UsageError("--workers must be at least 1");
        ctx.workers_override = args.workers;
    }
    ctx.force = args.force;
    if (!find_field(ctx.root, verb)) {
        throw UsageError("config: missing the '" + std::string(verb) + "' block");
    }
    fs::create_directories(ctx.out_dir);
    return ctx;
}

// One evaluation per conditioning subset of the other Y columns.
void check_exhaustive_budget(std::size_t m, bool force) {
    constexpr std::size_t kMaxSubsets = 1024;
    if (m == 0) return;
    const std::size_t d = m - 1;
    if (d >= 63 || (std::size_t{1} << d) > kMaxSubsets) {
        if (force) return;
        std::ostringstream os;
        os << "exhaustive search over " << d << " conditioning columns needs 2^" << d;
        if (d < 63) os << " = " << (std::size_t{1} << d);
        os << " evaluations per edge (limit " << kMaxSubsets << "); pass --force to run anyway";
        throw UsageError(os.str());
    }
}

scsl::DataMatrix make_iid_input(std::size_t n, std::size_t p, std::size_t m,
                                scsl::ValueDomain domain, scsl::RngHandle& rng) {
    scsl::DataMatrix d;
    d.domain = domain;
    d.x = scsl::Grid<double>(n, p);
    d.y = scsl::Grid<double>(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            d.x.at(i, j) = domain == scsl::ValueDomain::Binary ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                                              : rng.normal();
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            d.y.at(i, k) = domain == scsl::ValueDomain::Binary ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                                              : rng.normal();
        }
    }
    for (std::size_t j = 0; j < p; ++j) d.x_names.push_back("X" + std::to_string(j + 1));
    for (std::size_t k = 0; k < m; ++k) d.y_names.push_back("Y" + std::to_string(k + 1));
    return d;
}

// Distinct child tags so generator streams never collide with the
// discovery pipeline's own model and edge streams.
constexpr std::uint64_t kInputStream = 10;
constexpr std::uint64_t kGenStream = 11;
constexpr std::uint64_t kDiscoverSeedStream = 12;
constexpr std::uint64_t kBenchSeedStream = 41;

// --------------------------------------------------------------- generate

int cmd_generate(const CliArgs& args) {
    RunContext ctx = make_context(args, "generate");
    const Json& block = ctx.root.at("generate");
    const std::string path = "generate";
    check_keys(block, path,
               {"mode", "domain", "n", "p", "m", "x_input", "y_input", "k_parents", "conf_p",
                "coef_mean", "coef_sd", "noise_sd"});
    const std::string mode = as_string(req_field(block, path, "mode"), path + ".mode");
    if (mode != "synthetic" && mode != "real_confounding") {
        throw UsageError(path + ".mode: expected 'synthetic' or 'real_confounding' (got '" + mode +
                         "')");
    }
    const scsl::ValueDomain domain = parse_domain_field(block, path);
    scsl::GenConfig cfg = parse_generator_block(block, path);
    const auto x_input = string_opt(block, path, "x_input");
    const auto y_input = string_opt(block, path, "y_input");

    scsl::RngHandle base(ctx.seed);
    scsl::DataMatrix input;
    if (mode == "real_confounding") {
        if (!y_input) {
            throw UsageError(path + ": real_confounding resamples real rows and needs 'y_input'");
        }
        if (!x_input) {
            throw UsageError(path + ": real_confounding needs 'x_input'");
        }
        if (find_field(block, "n") || find_field(block, "p")) {
            throw UsageError(path + ": 'n' and 'p' come from the input files in this mode");
        }
        input = scsl::load_csv(*x_input, *y_input, domain);
        cfg.m_targets = usize_or(block, path, "m", input.m());
        if (cfg.m_targets == 0 || cfg.m_targets > input.m()) {
            throw UsageError(path + ".m: must lie in [1, " + std::to_string(input.m()) + "]");
        }
    } else {
        if (y_input) {
            throw UsageError(path + ": 'y_input' is only used by real_confounding");
        }
        cfg.m_targets = as_usize(req_field(block, path, "m"), path + ".m");
        if (cfg.m_targets == 0) throw UsageError(path + ".m: must be at least 1");
        if (x_input) {
            if (find_field(block, "n") || find_field(block, "p")) {
                throw UsageError(path + ": 'n' and 'p' come from 'x_input' when it is given");
            }
            scsl::NamedColumns cols = scsl::load_single_csv(*x_input, domain);
            input.x = std::move(cols.values);
            input.x_names = std::move(cols.names);
            input.y = scsl::Grid<double>(input.x.rows(), 0);
            input.domain = domain;
        } else {
            const std::size_t n = as_usize(req_field(block, path, "n"), path + ".n");
            const std::size_t p = as_usize(req_field(block, path, "p"), path + ".p");
            if (n == 0 || p == 0) throw UsageError(path + ": 'n' and 'p' must be positive");
            scsl::RngHandle input_rng = base.child(kInputStream);
            input = make_iid_input(n, p, 0, domain, input_rng);
        }
    }
    if (cfg.k_parents > input.p()) {
        throw UsageError(path + ".k_parents: exceeds the " + std::to_string(input.p()) +
                         " available X columns");
    }

    log_info("generating " + mode + " dataset: n=" + std::to_string(input.n()) +
             " p=" + std::to_string(input.p()) + " m=" + std::to_string(cfg.m_targets));
    scsl::RngHandle gen_rng = base.child(kGenStream);
    scsl::SemiSynthOutput out;
    if (mode == "real_confounding") {
        out = domain == scsl::ValueDomain::Binary
                  ? scsl::gen_real_confounding(input, cfg, gen_rng)
                  : scsl::gen_real_confounding_continuous(input, cfg, gen_rng);
    } else {
        out = domain == scsl::ValueDomain::Binary
                  ? scsl::gen_synth_confounding(input, cfg, gen_rng)
                  : scsl::gen_synth_confounding_continuous(input, cfg, gen_rng);
    }

    scsl::write_single_csv(ctx.out_dir / "X.csv", out.data.x_names, out.data.x, domain);
    scsl::write_single_csv(ctx.out_dir / "Y.csv", out.data.y_names, out.data.y, domain);
    Json truth = scsl::truth_to_json(out, cfg, ctx.seed);
    truth["mode"] = mode;
    truth["domain"] = domain == scsl::ValueDomain::Binary ? "binary" : "continuous";
    scsl::write_json_atomic(ctx.out_dir / "truth.json", truth);
    log_info("wrote " + (ctx.out_dir / "X.csv").string() + ", Y.csv, truth.json");
    return 0;
}

// --------------------------------------------------------------- discover

struct DiscoverSpec {
    std::string x_input, y_input;
    scsl::ValueDomain domain = scsl::ValueDomain::Binary;
    scsl::DiscoveryConfig cfg;
    bool record_traces = false;
    std::optional<std::string> models_in, models_out;
};

DiscoverSpec parse_discover_block(const RunContext& ctx) {
    const Json& block = ctx.root.at("discover");
    const std::string path = "discover";
    check_keys(block, path,
               {"x_input", "y_input", "domain", "train", "search", "fdr_q", "record_traces",
                "edges", "workers", "models_in", "models_out"});
    DiscoverSpec spec;
    spec.x_input = as_string(req_field(block, path, "x_input"), path + ".x_input");
    spec.y_input = as_string(req_field(block, path, "y_input"), path + ".y_input");
    spec.domain = parse_domain_field(block, path);
    spec.cfg.train = parse_train(block, path);
    spec.cfg.search = parse_search(block, path);
    spec.cfg.fdr_q = double_or(block, path, "fdr_q", spec.cfg.fdr_q);
    if (!(spec.cfg.fdr_q > 0.0 && spec.cfg.fdr_q < 1.0)) {
        throw UsageError(path + ".fdr_q: must lie in (0, 1)");
    }
    spec.record_traces = bool_or(block, path, "record_traces", false);
    spec.cfg.search.record_trace = spec.record_traces;
    if (const Json* edges = find_field(block, "edges")) {
        if (!edges->is_array()) throw UsageError(path + ".edges: expected an array of [j, k] pairs");
        std::vector<std::pair<std::size_t, std::size_t>> filter;
        for (std::size_t i = 0; i < edges->size(); ++i) {
            const Json& e = (*edges)[i];
            const std::string epath = path + ".edges[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2) throw UsageError(epath + ": expected [j, k]");
            filter.emplace_back(as_usize(e[0], epath), as_usize(e[1], epath));
        }
        spec.cfg.edge_filter = std::move(filter);
    }
    spec.cfg.parallelism = usize_or(block, path, "workers", 1);
    if (ctx.workers_override) spec.cfg.parallelism = *ctx.workers_override;
    if (spec.cfg.parallelism == 0) throw UsageError(path + ".workers: must be at least 1");
    spec.cfg.seed = ctx.seed;
    spec.models_in = string_opt(block, path, "models_in");
    spec.models_out = string_opt(block, path, "models_out");
    return spec;
}

int cmd_discover(const CliArgs& args) {
    RunContext ctx = make_context(args, "discover");
    DiscoverSpec spec = parse_discover_block(ctx);

    const scsl::DataMatrix data = scsl::load_csv(spec.x_input, spec.y_input, spec.domain);
    if (spec.cfg.search.mode == scsl::SearchMode::Exhaustive) {
        check_exhaustive_budget(data.m(), ctx.force);
    }

    log_info("discovering on " + std::to_string(data.n()) + " rows, " + std::to_string(data.p()) +
             " X columns, " + std::to_string(data.m()) + " Y columns, workers=" +
             std::to_string(spec.cfg.parallelism));
    scsl::DiscoveryReport report;
    if (spec.models_in) {
        Json models = parse_json_text(scsl::read_text(*spec.models_in), *spec.models_in);
        std::vector<scsl::AmortizedModel> ym, xm;
        for (const Json& mj : req_field(models, "models", "y_models")) {
            ym.push_back(scsl::model_from_json(mj));
        }
        for (const Json& mj : req_field(models, "models", "x_models")) {
            xm.push_back(scsl::model_from_json(mj));
        }
        log_info("loaded " + std::to_string(ym.size() + xm.size()) + " cached models from " +
                 *spec.models_in);
        report = scsl::discover_with_models(data, spec.cfg, std::move(ym), std::move(xm));
    } else {
        report = scsl::discover(data, spec.cfg);
    }

    scsl::write_json_atomic(ctx.out_dir / "report.json",
                            scsl::report_to_json(report, data.x_names, data.y_names));
    scsl::write_p_matrix_csv(ctx.out_dir / "p_matrix.csv", report.p_matrix, data.x_names,
                             data.y_names);
    scsl::write_json_atomic(ctx.out_dir / "timing.json", scsl::timing_to_json(report.timing));
    if (spec.record_traces) {
        scsl::write_text_atomic(ctx.out_dir / "traces.jsonl",
                                scsl::traces_to_jsonl(report.edges, data.x_names, data.y_names));
    }
    if (spec.models_out) {
        Json models;
        Json ym = Json::array(), xm = Json::array();
        for (const auto& m : report.y_models) ym.push_back(scsl::model_to_json(m));
        for (const auto& m : report.x_models) xm.push_back(scsl::model_to_json(m));
        models["y_models"] = std::move(ym);
        models["x_models"] = std::move(xm);
        scsl::write_json_atomic(*spec.models_out, models);
    }
    log_info("wrote " + (ctx.out_dir / "report.json").string() + ", p_matrix.csv, timing.json");

    int failures = 0;
    for (const auto& e : report.edges) {
        if (!e.error.empty()) {
            ++failures;
            log_error("edge " + data.x_names[e.edge.j] + " -> " + data.y_names[e.edge.k] +
                      " failed: " + e.error);
        }
    }
    return failures ? 1 : 0;
}

// ------------------------------------------------------------------ bench

struct BenchCell {
    std::size_t n = 0, p = 0, m = 0;
    double conf_p = 0.0;
};

struct CellAccum {
    std::size_t ok = 0;
    double f1_sum = 0.0;
    double train_sum = 0.0, search_sum = 0.0, metrics_sum = 0.0;
};

std::string trim_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

int cmd_bench(const CliArgs& args) {
    RunContext ctx = make_context(args, "bench");
    const Json& block = ctx.root.at("bench");
    const std::string path = "bench";
    check_keys(block, path,
               {"mode", "domain", "grid", "seeds", "generator", "train", "search", "fdr_q",
                "thresholds", "workers"});
    const std::string mode = as_string(req_field(block, path, "mode"), path + ".mode");
    if (mode != "synthetic" && mode != "real_confounding") {
        throw UsageError(path + ".mode: expected 'synthetic' or 'real_confounding' (got '" + mode +
                         "')");
    }
    const scsl::ValueDomain domain = parse_domain_field(block, path);

    const Json& grid = req_field(block, path, "grid");
    check_keys(grid, path + ".grid", {"n", "p", "m", "conf_p"});
    auto usize_list = [&](const char* key, std::size_t def) {
        std::vector<std::size_t> out;
        const Json* f = find_field(grid, key);
        if (!f) return std::vector<std::size_t>{def};
        if (!f->is_array()) throw UsageError(path + ".grid." + key + ": expected an array");
        for (const Json& v : *f) out.push_back(as_usize(v, path + ".grid." + key));
        return out;
    };
    std::vector<std::size_t> ns = usize_list("n", 2000);
    std::vector<std::size_t> ps = usize_list("p", 5);
    std::vector<std::size_t> ms = usize_list("m", 5);
    std::vector<double> confs;
    if (const Json* f = find_field(grid, "conf_p")) {
        if (!f->is_array()) throw UsageError(path + ".grid.conf_p: expected an array");
        for (const Json& v : *f) {
            const double c = as_double(v, path + ".grid.conf_p");
            if (!(c >= 0.0 && c <= 1.0)) throw UsageError(path + ".grid.conf_p: must lie in [0, 1]");
            confs.push_back(c);
        }
    } else {
        confs.push_back(0.0);
    }

    std::vector<std::uint64_t> seeds;
    const Json& seeds_field = req_field(block, path, "seeds");
    if (!seeds_field.is_array()) throw UsageError(path + ".seeds: expected an array");
    std::set<std::uint64_t> seen_seeds;
    for (const Json& v : seeds_field) {
        const std::uint64_t s = as_u64(v, path + ".seeds");
        if (!seen_seeds.insert(s).second) {
            throw UsageError(path + ".seeds: duplicate seed " + std::to_string(s));
        }
        seeds.push_back(s);
    }

    scsl::GenConfig gen_base;
    if (const Json* g = find_field(block, "generator")) {
        check_keys(*g, path + ".generator", {"k_parents", "coef_mean", "coef_sd", "noise_sd"});
        gen_base = parse_generator_block(*g, path + ".generator");
    }
    scsl::TrainConfig train = parse_train(block, path);
    scsl::SearchConfig search = parse_search(block, path);
    const double fdr_q = double_or(block, path, "fdr_q", 0.05);
    if (!(fdr_q > 0.0 && fdr_q < 1.0)) throw UsageError(path + ".fdr_q: must lie in (0, 1)");

    std::vector<double> thresholds = scsl::default_threshold_grid();
    if (const Json* f = find_field(block, "thresholds")) {
        if (!f->is_array()) throw UsageError(path + ".thresholds: expected an array");
        thresholds.clear();
        for (const Json& v : *f) thresholds.push_back(as_double(v, path + ".thresholds"));
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            if (!(thresholds[i] > 0.0) || (i > 0 && thresholds[i] <= thresholds[i - 1])) {
                throw UsageError(path + ".thresholds: must be positive and strictly increasing");
            }
        }
        if (thresholds.empty()) throw UsageError(path + ".thresholds: must not be empty");
    }

    std::size_t workers = usize_or(block, path, "workers", 1);
    if (ctx.workers_override) workers = *ctx.workers_override;
    if (workers == 0) throw UsageError(path + ".workers: must be at least 1");

    if (search.mode == scsl::SearchMode::Exhaustive) {
        for (std::size_t m : ms) check_exhaustive_budget(m, ctx.force);
    }
    for (std::size_t p : ps) {
        if (gen_base.k_parents > p) {
            throw UsageError(path + ": k_parents=" + std::to_string(gen_base.k_parents) +
                             " exceeds grid X size " + std::to_string(p));
        }
    }

    std::vector<BenchCell> cells;
    for (std::size_t n : ns) {
        for (std::size_t p : ps) {
            for (std::size_t m : ms) {
                for (double c : confs) cells.push_back({n, p, m, c});
            }
        }
    }

    const fs::path metrics_dir = ctx.out_dir / "metrics";
    fs::create_directories(metrics_dir);
    log_info("bench sweep: " + std::to_string(cells.size()) + " cells x " +
             std::to_string(seeds.size()) + " seeds, workers=" + std::to_string(workers));

    std::vector<CellAccum> acc(cells.size());
    scsl::parallel_for(cells.size(), workers, [&](std::size_t ci) {
        const BenchCell& cell = cells[ci];
        std::ostringstream name;
        name << mode << "_n" << cell.n << "_p" << cell.p << "_m" << cell.m << "_conf"
             << trim_double(cell.conf_p);
        for (std::uint64_t s : seeds) {
            try {
                scsl::RngHandle base = scsl::RngHandle(ctx.seed).child(kBenchSeedStream, s);
                scsl::GenConfig gen = gen_base;
                gen.conf_p = cell.conf_p;
                gen.m_targets = cell.m;
                scsl::RngHandle input_rng = base.child(kInputStream);
                scsl::RngHandle gen_rng = base.child(kGenStream);
                scsl::SemiSynthOutput out;
                if (mode == "real_confounding") {
                    scsl::DataMatrix input =
                        make_iid_input(cell.n, cell.p, cell.m, domain, input_rng);
                    out = domain == scsl::ValueDomain::Binary
                              ? scsl::gen_real_confounding(input, gen, gen_rng)
                              : scsl::gen_real_confounding_continuous(input, gen, gen_rng);
                } else {
                    scsl::DataMatrix input = make_iid_input(cell.n, cell.p, 0, domain, input_rng);
                    out = domain == scsl::ValueDomain::Binary
                              ? scsl::gen_synth_confounding(input, gen, gen_rng)
                              : scsl::gen_synth_confounding_continuous(input, gen, gen_rng);
                }

                scsl::DiscoveryConfig dcfg;
                dcfg.train = train;
                dcfg.search = search;
                dcfg.fdr_q = fdr_q;
                dcfg.parallelism = 1;
                dcfg.seed = base.child(kDiscoverSeedStream).next_u64();
                scsl::DiscoveryReport report = scsl::discover(out.data, dcfg);

                const auto t0 = std::chrono::steady_clock::now();
                scsl::BenchMetrics metrics =
                    scsl::compute_metrics(report.p_matrix, out.truth.adjacency, thresholds);
                const double metrics_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

                Json mj = scsl::metrics_to_json(metrics);
                mj["seed"] = s;
                mj["cell"] = {{"mode", mode},   {"conf_p", cell.conf_p}, {"n", cell.n},
                              {"x_cols", cell.p}, {"y_cols", cell.m}};
                scsl::write_json_atomic(metrics_dir / (name.str() + "_seed" + std::to_string(s) +
                                                       ".json"),
                                        mj);

                acc[ci].ok += 1;
                acc[ci].f1_sum += metrics.f1;
                acc[ci].train_sum += report.timing.train_seconds;
                acc[ci].search_sum += report.timing.search_seconds;
                acc[ci].metrics_sum += metrics_seconds;
                log_debug(name.str() + " seed " + std::to_string(s) + ": f1=" +
                          trim_double(metrics.f1));
            } catch (const std::exception& e) {
                log_warn(name.str() + " seed " + std::to_string(s) + " failed: " + e.what());
            }
        }
    });

    std::ostringstream summary, timings;
    summary << "mode,conf_p,n,x_cols,y_cols,f1,seeds_ok\n";
    timings << "mode,conf_p,n,x_cols,y_cols,train_seconds,search_seconds,metrics_seconds\n";
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const BenchCell& cell = cells[ci];
        const CellAccum& a = acc[ci];
        const std::string prefix = mode + "," + trim_double(cell.conf_p) + "," +
                                   std::to_string(cell.n) + "," + std::to_string(cell.p) + "," +
                                   std::to_string(cell.m) + ",";
        summary << prefix
                << (a.ok ? scsl::format_g17(a.f1_sum / static_cast<double>(a.ok)) : "NA") << ","
                << a.ok << "/" << seeds.size() << "\n";
        timings << prefix;
        if (a.ok) {
            const double d = static_cast<double>(a.ok);
            timings << scsl::format_g17(a.train_sum / d) << ","
                    << scsl::format_g17(a.search_sum / d) << ","
                    << scsl::format_g17(a.metrics_sum / d);
        } else {
            timings << "NA,NA,NA";
        }
        timings << "\n";
    }
    scsl::write_text_atomic(ctx.out_dir / "summary.csv", summary.str());
    scsl::write_text_atomic(ctx.out_dir / "timings.csv", timings.str());
    log_info("wrote " + (ctx.out_dir / "summary.csv").string() + " and timings.csv");
    return 0;
}

// ------------------------------------------------------------------ trace

int cmd_trace(const CliArgs& args) {
    RunContext ctx = make_context(args, "trace");
    const Json& block = ctx.root.at("trace");
    const std::string path = "trace";
    check_keys(block, path, {"x_input", "y_input", "domain", "edge", "modes", "train", "search"});
    const std::string x_input = as_string(req_field(block, path, "x_input"), path + ".x_input");
    const std::string y_input = as_string(req_field(block, path, "y_input"), path + ".y_input");
    const scsl::ValueDomain domain = parse_domain_field(block, path);

    const Json& edge = req_field(block, path, "edge");
    if (!edge.is_array() || edge.size() != 2) throw UsageError(path + ".edge: expected [j, k]");
    const std::size_t j = as_usize(edge[0], path + ".edge");
    const std::size_t k = as_usize(edge[1], path + ".edge");

    const Json& modes_field = req_field(block, path, "modes");
    if (!modes_field.is_array() || modes_field.empty()) {
        throw UsageError(path + ".modes: expected a non-empty array of mode names");
    }
    std::vector<scsl::SearchMode> modes;
    for (const Json& v : modes_field) {
        const scsl::SearchMode mode =
            parse_search_mode(as_string(v, path + ".modes"), path + ".modes");
        if (std::find(modes.begin(), modes.end(), mode) != modes.end()) {
            throw UsageError(path + ".modes: duplicate mode '" + search_mode_name(mode) + "'");
        }
        modes.push_back(mode);
    }
    scsl::TrainConfig train = parse_train(block, path);
    scsl::SearchConfig search = parse_search(block, path);

    scsl::DataMatrix data = scsl::load_csv(x_input, y_input, domain);
    if (j >= data.p() || k >= data.m()) {
        throw UsageError(path + ".edge: out of range for " + std::to_string(data.p()) + " x " +
                         std::to_string(data.m()) + " columns");
    }
    if (std::find(modes.begin(), modes.end(), scsl::SearchMode::Exhaustive) != modes.end()) {
        check_exhaustive_budget(data.m(), ctx.force);
    }
    if (data.domain == scsl::ValueDomain::Binary) data = scsl::recode_binary(data);

    scsl::RngHandle base(ctx.seed);
    scsl::RngHandle y_rng = base.child(1, k);
    scsl::RngHandle x_rng = base.child(2, j);
    log_info("training the two models for edge " + data.x_names[j] + " -> " + data.y_names[k]);
    const scsl::AmortizedModel y_model = scsl::train_y_model(data, k, train, y_rng);
    const scsl::AmortizedModel x_model = scsl::train_x_model(data, j, train, x_rng);

    std::ostringstream lines;
    Json summary = Json::array();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        scsl::SearchConfig cfg = search;
        cfg.mode = modes[i];
        cfg.record_trace = true;
        scsl::RngHandle rng = base.child(3, j, k).child(i);
        const scsl::EdgeResult result = scsl::search_edge(data, j, k, y_model, x_model, cfg, rng);
        const char* mode_name = search_mode_name(modes[i]);
        for (const auto& t : result.trace) {
            Json rec;
            rec["mode"] = mode_name;
            rec["x"] = data.x_names[j];
            rec["y"] = data.y_names[k];
            rec["iter"] = t.iter;
            std::string bits(t.subset.size(), '0');
            for (std::size_t c = 0; c < t.subset.size(); ++c) {
                if (t.subset[c]) bits[c] = '1';
            }
            rec["subset"] = bits;
            rec["t"] = t.statistic;
            rec["p"] = t.p_value;
            lines << rec.dump() << '\n';
        }
        Json s;
        s["mode"] = mode_name;
        s["p_value"] = result.p_value;
        s["n_evaluations"] = result.n_evaluations;
        s["early_stopped"] = result.early_stopped;
        if (result.best_subset) {
            std::string bits(result.best_subset->size(), '0');
            for (std::size_t c = 0; c < result.best_subset->size(); ++c) {
                if ((*result.best_subset)[c]) bits[c] = '1';
            }
            s["best_subset"] = bits;
        } else {
            s["best_subset"] = nullptr;
        }
        summary.push_back(std::move(s));
        log_info(std::string("mode ") + mode_name + ": p=" +
                 scsl::format_g17(result.p_value) + " after " +
                 std::to_string(result.n_evaluations) + " evaluations");
    }
    scsl::write_text_atomic(ctx.out_dir / "traces.jsonl", lines.str());
    scsl::write_json_atomic(ctx.out_dir / "trace_summary.json", summary);
    log_info("wrote " + (ctx.out_dir / "traces.jsonl").string() + " and trace_summary.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-edge causal structure discovery over X -> Y candidate edges"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON run configuration")
            ->required();
        sub->add_option("--seed", args.seed, "Override the config seed");
        sub->add_option("--workers", args.workers, "Override the worker count");
        sub->add_option("--out", args.out, "Output directory");
        sub->add_flag("--force", args.force, "Run past cost guard rails");
    };
    CLI::App* generate = app.add_subcommand("generate", "Write a semi-synthetic dataset");
    CLI::App* discover = app.add_subcommand("discover", "Test every candidate edge");
    CLI::App* bench = app.add_subcommand("bench", "Sweep generate+discover over a grid");
    CLI::App* trace = app.add_subcommand("trace", "Record per-evaluation search traces");
    add_common(generate);
    add_common(discover);
    add_common(bench);
    add_common(trace);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    CLI::App* active = app.get_subcommands().front();
    args.has_seed = active->count("--seed") > 0;
    args.has_workers = active->count("--workers") > 0;
    args.has_out = active->count("--out") > 0;

    try {
        init_logging();
        if (active == generate) return cmd_generate(args);
        if (active == discover) return cmd_discover(args);
        if (active == bench) return cmd_bench(args);
        return cmd_trace(args);
    } catch (const UsageError& e) {
        log_error(e.what());
        return 2;
    } catch (const scsl::ConfigError& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 1;
    }
}
