#include "scsl/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "scsl/errors.hpp"
#include "scsl/fs_util.hpp"
#include "scsl/rng.hpp"

namespace scsl {

namespace {

const char* kind_name(TargetKind k) { return k == TargetKind::YTarget ? "y" : "x"; }
const char* domain_name(ValueDomain d) {
    return d == ValueDomain::Binary ? "binary" : "continuous";
}

TargetKind parse_kind(const std::string& s) {
    if (s == "y") return TargetKind::YTarget;
    if (s == "x") return TargetKind::XTarget;
    throw ParseError("unknown model kind '" + s + "'");
}

ValueDomain parse_domain(const std::string& s) {
    if (s == "binary") return ValueDomain::Binary;
    if (s == "continuous") return ValueDomain::Continuous;
    throw ParseError("unknown value domain '" + s + "'");
}

double json_double(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

Json double_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

std::string subset_bits(const std::vector<std::uint8_t>& subset) {
    std::string s(subset.size(), '0');
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (subset[i]) s[i] = '1';
    }
    return s;
}

template <typename T>
Json grid_to_json(const Grid<T>& g) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < g.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < g.cols(); ++c) row.push_back(g.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json model_to_json(const AmortizedModel& model) {
    Json j;
    j["target"] = {{"kind", kind_name(model.kind())}, {"index", model.target()}};
    j["input_layout"] = {
        {"n_x", model.p()},
        {"n_y", model.m()},
        {"domain", domain_name(model.domain())},
        {"maskable", model.maskable_count()},
        {"features", model.feature_count()},
    };
    j["weights"] = model.weights();
    j["bias"] = model.bias();
    j["training_meta"] = {
        {"n_epochs", model.meta.n_epochs},
        {"batch_size", model.meta.batch_size},
        {"learning_rate", model.meta.learning_rate},
        {"p_mask", model.meta.p_mask},
        {"l2_lambda", model.meta.l2_lambda},
        {"seed", model.meta.seed},
        {"n_rows", model.meta.n_rows},
        {"first_epoch_loss", double_or_null(model.meta.first_epoch_loss)},
        {"final_epoch_loss", double_or_null(model.meta.final_epoch_loss)},
    };
    return j;
}

AmortizedModel model_from_json(const Json& j) {
    try {
        const auto& target = j.at("target");
        const auto& layout = j.at("input_layout");
        AmortizedModel model(parse_kind(target.at("kind").get<std::string>()),
                             target.at("index").get<std::size_t>(),
                             layout.at("n_x").get<std::size_t>(),
                             layout.at("n_y").get<std::size_t>(),
                             parse_domain(layout.at("domain").get<std::string>()));
        auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != model.feature_count()) {
            throw ParseError("weight count " + std::to_string(w.size()) +
                             " does not match the declared layout (expected " +
                             std::to_string(model.feature_count()) + ")");
        }
        model.weights() = std::move(w);
        model.bias() = j.at("bias").get<double>();
        const auto& meta = j.at("training_meta");
        model.meta.n_epochs = meta.at("n_epochs").get<std::size_t>();
        model.meta.batch_size = meta.at("batch_size").get<std::size_t>();
        model.meta.learning_rate = meta.at("learning_rate").get<double>();
        model.meta.p_mask = meta.at("p_mask").get<double>();
        model.meta.l2_lambda = meta.at("l2_lambda").get<double>();
        model.meta.seed = meta.at("seed").get<std::uint64_t>();
        model.meta.n_rows = meta.at("n_rows").get<std::size_t>();
        model.meta.first_epoch_loss = json_double(meta.at("first_epoch_loss"));
        model.meta.final_epoch_loss = json_double(meta.at("final_epoch_loss"));
        return model;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed model record: ") + e.what());
    }
}

Json report_to_json(const DiscoveryReport& report, const std::vector<std::string>& x_names,
                    const std::vector<std::string>& y_names) {
    Json j;
    j["rng_family"] = report.rng_family;
    j["model_trainings"] = report.model_trainings;

    Json pm = Json::array();
    for (std::size_t r = 0; r < report.p_matrix.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < report.p_matrix.cols(); ++c) {
            row.push_back(double_or_null(report.p_matrix.at(r, c)));
        }
        pm.push_back(std::move(row));
    }
    j["p_matrix"] = std::move(pm);

    Json edges = Json::array();
    for (const auto& e : report.edges) {
        Json rec;
        rec["x"] = x_names.at(e.edge.j);
        rec["y"] = y_names.at(e.edge.k);
        rec["j"] = e.edge.j;
        rec["k"] = e.edge.k;
        if (!e.error.empty()) {
            rec["error"] = e.error;
        } else {
            rec["p_value"] = e.result.p_value;
            rec["early_stopped"] = e.result.early_stopped;
            rec["n_evaluations"] = e.result.n_evaluations;
            if (e.result.best_subset) {
                rec["best_subset"] = subset_bits(*e.result.best_subset);
                Json cond = Json::array();
                for (std::size_t c = 0; c < e.result.best_subset->size(); ++c) {
                    const std::size_t col = c < e.edge.k ? c : c + 1;
                    if ((*e.result.best_subset)[c]) cond.push_back(y_names.at(col));
                }
                rec["conditioned_on"] = std::move(cond);
            } else {
                rec["best_subset"] = nullptr;
            }
        }
        edges.push_back(std::move(rec));
    }
    j["edges"] = std::move(edges);

    Json rej = Json::array();
    for (const auto& r : report.rejections) {
        rej.push_back({{"x", x_names.at(r.j)}, {"y", y_names.at(r.k)}, {"j", r.j}, {"k", r.k}});
    }
    j["rejections"] = std::move(rej);
    return j;
}

Json timing_to_json(const PhaseTimings& timing) {
    return Json{{"train_seconds", timing.train_seconds},
                {"search_seconds", timing.search_seconds}};
}

Json truth_to_json(const SemiSynthOutput& out, const GenConfig& cfg, std::uint64_t seed) {
    Json j;
    j["seed"] = seed;
    j["rng_family"] = RngHandle::kFamily;
    j["x_names"] = out.data.x_names;
    j["y_names"] = out.data.y_names;
    j["adjacency"] = grid_to_json(out.truth.adjacency);
    j["y_internal_edges"] = grid_to_json(out.y_internal_edges);
    Json coef = Json::array();
    for (std::size_t k = 0; k < out.params.x_parents.size(); ++k) {
        Json rec;
        rec["target"] = out.data.y_names.at(k);
        rec["x_parents"] = out.params.x_parents[k];
        rec["beta"] = out.params.beta[k];
        // The row-resampling generator has no Y->Y parents and leaves these empty.
        rec["y_parents"] =
            k < out.params.y_parents.size() ? Json(out.params.y_parents[k]) : Json::array();
        rec["gamma"] = k < out.params.gamma.size() ? Json(out.params.gamma[k]) : Json::array();
        coef.push_back(std::move(rec));
    }
    j["coefficients"] = std::move(coef);
    j["config"] = {
        {"k_parents", cfg.k_parents},   {"conf_p", cfg.conf_p},
        {"coef_mean", cfg.coef_mean},   {"coef_sd", cfg.coef_sd},
        {"m_targets", cfg.m_targets},   {"noise_sd", cfg.noise_sd},
    };
    return j;
}

Json metrics_to_json(const BenchMetrics& metrics) {
    Json j;
    j["thresholds"] = metrics.thresholds;
    j["tpr"] = metrics.tpr;
    j["fpr"] = metrics.fpr;
    j["fpr_ratio"] = metrics.fpr_ratio;
    j["edge_draw_threshold"] = kEdgeDrawThreshold;
    j["precision"] = metrics.precision_at;
    j["recall"] = metrics.recall_at;
    j["f1"] = metrics.f1;
    return j;
}

void write_p_matrix_csv(const std::filesystem::path& path, const Grid<double>& p_matrix,
                        const std::vector<std::string>& x_names,
                        const std::vector<std::string>& y_names) {
    if (p_matrix.rows() != x_names.size() || p_matrix.cols() != y_names.size()) {
        throw ShapeMismatch("p-value matrix shape does not match the label lists");
    }
    std::ostringstream os;
    for (const auto& name : y_names) os << ',' << name;
    os << '\n';
    for (std::size_t r = 0; r < p_matrix.rows(); ++r) {
        os << x_names[r];
        for (std::size_t c = 0; c < p_matrix.cols(); ++c) {
            const double v = p_matrix.at(r, c);
            os << ',';
            if (std::isnan(v)) {
                os << "NA";
            } else {
                os << format_g17(v);
            }
        }
        os << '\n';
    }
    write_text_atomic(path, os.str());
}

std::string traces_to_jsonl(const std::vector<EdgeOutcome>& edges,
                            const std::vector<std::string>& x_names,
                            const std::vector<std::string>& y_names) {
    std::ostringstream os;
    for (const auto& e : edges) {
        for (const auto& t : e.result.trace) {
            Json rec;
            rec["x"] = x_names.at(e.edge.j);
            rec["y"] = y_names.at(e.edge.k);
            rec["iter"] = t.iter;
            rec["subset"] = subset_bits(t.subset);
            rec["t"] = t.statistic;
            rec["p"] = t.p_value;
            os << rec.dump() << '\n';
        }
    }
    return os.str();
}

void write_json_atomic(const std::filesystem::path& path, const Json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace scsl
