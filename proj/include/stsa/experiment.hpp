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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stsa/cost.hpp"
#include "stsa/scene.hpp"
#include "stsa/subspace.hpp"

namespace stsa {

// One subspace size evaluated on one scene.
struct RunRecord {
  std::string label;  // "f,h,w"
  SubspaceSpec subspace;
  std::uint64_t projection = 0;
  std::uint64_t score = 0;
  std::uint64_t value = 0;
  std::uint64_t total = 0;
  double along_flow_variation = 0.0;      // block output, object cells
  double naive_temporal_variation = 0.0;  // block output, object cells
};

struct SweepResult {
  std::vector<RunRecord> runs;
  std::vector<std::string> warnings;  // one per skipped size
};

std::vector<SubspaceSpec> default_sweep_sizes();

// Cost model plus the along-flow variation of one STSA block output per size.
// The block uses random projections of width `width` drawn from seed.
// Sizes that do not divide the scene are skipped with a warning.
SweepResult sweep_subspace_sizes(const std::vector<SubspaceSpec>& sizes, const Scene& scene,
                                 std::size_t width, std::uint64_t seed);

struct ModeCost {
  std::string mode;
  std::uint64_t total = 0;
  std::uint64_t score_and_value = 0;
};

struct ConsistencyReport {
  double along_flow_variation = 0.0;
  double naive_temporal_variation = 0.0;
  std::vector<ModeCost> mode_costs;
};

// Metrics of the scene video itself (object cells) and the cost of every
// attention mode at the scene's dims.
ConsistencyReport consistency_report(const Scene& scene, const SubspaceSpec& spec,
                                     std::size_t width);

struct ReportMetadata {
  std::uint64_t seed = 0;
  VideoShape dims;
  std::size_t width = 0;
  std::string precision = "double";
};

struct Report {
  ReportMetadata metadata;
  ConsistencyReport consistency;
  std::vector<RunRecord> runs;
};

inline constexpr const char* kReportSchema = "stsa-report/1";

std::string csv_header();
std::string report_csv(const std::vector<RunRecord>& runs);
std::string report_json(const Report& report);

// Structural check against schemas/report.schema.json; throws ParseError.
void validate_report_json(const std::string& text);

// Writes <stem>.json and <stem>.csv into dir, validating the JSON first.
// Throws IoError when the files cannot be written.
void write_report(const std::filesystem::path& dir, const std::string& stem,
                  const Report& report);

}  // namespace stsa
