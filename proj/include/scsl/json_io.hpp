#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "scsl/data.hpp"
#include "scsl/discovery.hpp"
#include "scsl/metrics.hpp"
#include "scsl/model.hpp"
#include "scsl/synthgen.hpp"

namespace scsl {

using Json = nlohmann::json;

// Model caching between invocations. Round-trips exactly: weights and bias
// are stored as full-precision doubles.
Json model_to_json(const AmortizedModel& model);
AmortizedModel model_from_json(const Json& j);

// Everything except wall-clock timing, which lives in a separate file so the
// main report stays byte-identical across reruns and worker counts.
Json report_to_json(const DiscoveryReport& report, const std::vector<std::string>& x_names,
                    const std::vector<std::string>& y_names);

Json timing_to_json(const PhaseTimings& timing);

// Generator sidecar: adjacency, internal Y->Y edges, sampled coefficients,
// the generating config, and the seed.
Json truth_to_json(const SemiSynthOutput& out, const GenConfig& cfg, std::uint64_t seed);

Json metrics_to_json(const BenchMetrics& metrics);

// Row labels from x_names, one header row from y_names, %.17g values,
// NA for untested entries.
void write_p_matrix_csv(const std::filesystem::path& path, const Grid<double>& p_matrix,
                        const std::vector<std::string>& x_names,
                        const std::vector<std::string>& y_names);

// One line per recorded evaluation: {edge, iter, subset bitstring, t, p}.
std::string traces_to_jsonl(const std::vector<EdgeOutcome>& edges,
                            const std::vector<std::string>& x_names,
                            const std::vector<std::string>& y_names);

void write_json_atomic(const std::filesystem::path& path, const Json& j);

std::string format_g17(double v);

}  // namespace scsl
