// Copyright 2026 The STSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stsa/experiment.hpp"

#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "stsa/attention.hpp"
#include "stsa/block.hpp"
#include "stsa/metrics.hpp"

namespace stsa {

namespace {

using ordered_json = nlohmann::ordered_json;

bool divides(const VideoShape& shape, const SubspaceSpec& s) {
  return shape.frames % s.frames == 0 && shape.rows % s.rows == 0 && shape.cols % s.cols == 0;
}

AttentionDims dims_of(const VideoShape& shape, std::size_t width) {
  return {shape.frames, shape.rows, shape.cols, shape.channels, width};
}

CellMask object_cells(const Scene& scene) {
  return [&scene](std::size_t f, std::size_t c) { return scene.is_object(f, c); };
}

ordered_json run_to_json(const RunRecord& r) {
  ordered_json j;
  j["label"] = r.label;
  j["subspace"] = {r.subspace.frames, r.subspace.rows, r.subspace.cols};
  j["volume"] = r.subspace.volume();
  j["projection"] = r.projection;
  j["score"] = r.score;
  j["value"] = r.value;
  j["total"] = r.total;
  j["along_flow_variation"] = r.along_flow_variation;
  j["naive_temporal_variation"] = r.naive_temporal_variation;
  return j;
}

[[noreturn]] void bad(const std::string& what) { throw ParseError("report: " + what); }

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                  const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const char* k : keys) {
    if (!j.contains(k)) bad(where + " lacks \"" + k + "\"");
  }
  if (j.size() != keys.size()) bad(where + " has unexpected keys");
}

void require_count(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_unsigned()) bad(where + " must be a non-negative integer");
}

void require_metric(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) bad(where + " must be a number");
  if (j.get<double>() < 0.0) bad(where + " must be non-negative");
}

}  // namespace

std::vector<SubspaceSpec> default_sweep_sizes() { return {{4, 2, 2}, {4, 4, 4}, {8, 4, 4}}; }

SweepResult sweep_subspace_sizes(const std::vector<SubspaceSpec>& sizes, const Scene& scene,
                                 std::size_t width, std::uint64_t seed) {
  const VideoShape& shape = scene.video.shape();
  const AttentionParams<double> params =
      AttentionParams<double>::random(shape.channels, width, 1, seed, 0.3);
  SweepResult result;
  for (const SubspaceSpec& s : sizes) {
    s.validate();
    if (!divides(shape, s)) {
      result.warnings.push_back("skipping subspace " + s.to_string() + ": does not divide " +
                                shape.to_string());
      continue;
    }
    const CostReport cost = cost_model(AttentionMode::kSubspace, dims_of(shape, width), s);
    const LatentVideo<double> out = stsa_block(scene.video, scene.flows, s, params);
    RunRecord r;
    r.label = fmt::format("{},{},{}", s.frames, s.rows, s.cols);
    r.subspace = s;
    r.projection = cost.projection;
    r.score = cost.score;
    r.value = cost.value;
    r.total = cost.total();
    r.along_flow_variation = along_flow_variation(out, scene.flows, object_cells(scene));
    r.naive_temporal_variation = naive_temporal_variation(out, object_cells(scene));
    result.runs.push_back(std::move(r));
  }
  return result;
}

ConsistencyReport consistency_report(const Scene& scene, const SubspaceSpec& spec,
                                     std::size_t width) {
  ConsistencyReport report;
  report.along_flow_variation =
      along_flow_variation(scene.video, scene.flows, object_cells(scene));
  report.naive_temporal_variation = naive_temporal_variation(scene.video, object_cells(scene));
  const VideoShape& shape = scene.video.shape();
  const AttentionDims dims = dims_of(shape, width);
  for (AttentionMode mode :
       {AttentionMode::kSubspace, AttentionMode::kTemporal, AttentionMode::kCrossFrameFirst,
        AttentionMode::kCrossFrameMiddle, AttentionMode::kCrossFramePrevious,
        AttentionMode::kCrossFrameAll, AttentionMode::kFull}) {
    if (mode == AttentionMode::kSubspace && !divides(shape, spec)) continue;
    const CostReport c = cost_model(mode, dims, spec);
    report.mode_costs.push_back({to_string(mode), c.total(), c.score_and_value()});
  }
  return report;
}

std::string csv_header() {
  return "label,s_f,s_h,s_w,volume,projection,score,value,total,along_flow_variation,"
         "naive_temporal_variation\n";
}

std::string report_csv(const std::vector<RunRecord>& runs) {
  std::string out = csv_header();
  for (const RunRecord& r : runs) {
    out += fmt::format("\"{}\",{},{},{},{},{},{},{},{},{:.17g},{:.17g}\n", r.label,
                       r.subspace.frames, r.subspace.rows, r.subspace.cols, r.subspace.volume(),
                       r.projection, r.score, r.value, r.total, r.along_flow_variation,
                       r.naive_temporal_variation);
  }
  return out;
}

std::string report_json(const Report& report) {
  ordered_json j;
  j["schema"] = kReportSchema;
  const ReportMetadata& m = report.metadata;
  j["metadata"] = {{"seed", m.seed},
                   {"dims", {m.dims.frames, m.dims.rows, m.dims.cols, m.dims.channels}},
                   {"width", m.width},
                   {"precision", m.precision}};
  ordered_json costs = ordered_json::array();
  for (const ModeCost& c : report.consistency.mode_costs) {
    costs.push_back({{"mode", c.mode}, {"total", c.total}, {"score_and_value", c.score_and_value}});
  }
  j["consistency"] = {{"along_flow_variation", report.consistency.along_flow_variation},
                      {"naive_temporal_variation", report.consistency.naive_temporal_variation},
                      {"mode_costs", costs}};
  ordered_json runs = ordered_json::array();
  for (const RunRecord& r : report.runs) runs.push_back(run_to_json(r));
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

void validate_report_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(e.what());
  }
  require_keys(j, {"schema", "metadata", "consistency", "runs"}, "document");
  if (j["schema"] != kReportSchema) bad("unknown schema tag");

  const auto& m = j["metadata"];
  require_keys(m, {"seed", "dims", "width", "precision"}, "metadata");
  require_count(m["seed"], "metadata.seed");
  require_count(m["width"], "metadata.width");
  if (!m["dims"].is_array() || m["dims"].size() != 4) bad("metadata.dims must hold 4 integers");
  for (const auto& d : m["dims"]) require_count(d, "metadata.dims");
  if (m["precision"] != "single" && m["precision"] != "double") bad("metadata.precision");

  const auto& c = j["consistency"];
  require_keys(c, {"along_flow_variation", "naive_temporal_variation", "mode_costs"},
               "consistency");
  require_metric(c["along_flow_variation"], "consistency.along_flow_variation");
  require_metric(c["naive_temporal_variation"], "consistency.naive_temporal_variation");
  if (!c["mode_costs"].is_array()) bad("consistency.mode_costs must be an array");
  for (const auto& mc : c["mode_costs"]) {
    require_keys(mc, {"mode", "total", "score_and_value"}, "mode_costs[]");
    if (!mc["mode"].is_string()) bad("mode_costs[].mode must be a string");
    require_count(mc["total"], "mode_costs[].total");
    require_count(mc["score_and_value"], "mode_costs[].score_and_value");
  }

  if (!j["runs"].is_array()) bad("runs must be an array");
  for (const auto& r : j["runs"]) {
    require_keys(r,
                 {"label", "subspace", "volume", "projection", "score", "value", "total",
                  "along_flow_variation", "naive_temporal_variation"},
                 "runs[]");
    if (!r["label"].is_string()) bad("runs[].label must be a string");
    if (!r["subspace"].is_array() || r["subspace"].size() != 3) bad("runs[].subspace");
    for (const auto& d : r["subspace"]) require_count(d, "runs[].subspace");
    for (const char* k : {"volume", "projection", "score", "value", "total"}) {
      require_count(r[k], std::string("runs[].") + k);
    }
    require_metric(r["along_flow_variation"], "runs[].along_flow_variation");
    require_metric(r["naive_temporal_variation"], "runs[].naive_temporal_variation");
  }
}

void write_report(const std::filesystem::path& dir, const std::string& stem,
                  const Report& report) {
  const std::string json = report_json(report);
  validate_report_json(json);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  for (const auto& [ext, body] :
       {std::pair{std::string(".json"), json}, std::pair{std::string(".csv"), report_csv(report.runs)}}) {
    const std::filesystem::path path = dir / (stem + ext);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << body;
    if (!out.flush()) throw IoError("failed writing " + path.string());
  }
}

}  // namespace stsa
