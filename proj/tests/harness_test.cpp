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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "oracles.hpp"
#include "stsa/experiment.hpp"
#include "stsa/metrics.hpp"
#include "stsa/train.hpp"

namespace stsa {
namespace {

using testing::random_video;

SceneSpec small_spec() {
  SceneSpec s;
  s.frames = 8;
  s.rows = 8;
  s.cols = 8;
  s.channels = 4;
  return s;
}

CellMask objects_of(const Scene& scene) {
  return [&scene](std::size_t f, std::size_t c) { return scene.is_object(f, c); };
}

TEST(GenScene, StaticObjectGivesIdenticalFramesAndZeroFlow) {
  SceneSpec s = small_spec();
  s.objects.push_back({ObjectShape::kSquare, 3, 2, 2, 0, 0});
  const Scene scene = gen_scene(s, 1);
  for (std::size_t f = 1; f < s.frames; ++f) {
    auto a = scene.video.frame(0);
    auto b = scene.video.frame(f);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  for (std::size_t k = 0; k < scene.flows.links(); ++k) {
    for (float v : scene.flows.forward(k).values()) EXPECT_EQ(v, 0.0f);
    for (float v : scene.flows.backward(k).values()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(GenScene, TranslatingSquareHasItsVelocityAsFlow) {
  SceneSpec s = small_spec();
  s.cols = 12;
  s.objects.push_back({ObjectShape::kSquare, 3, 0, 1, 1, 0});
  const Scene scene = gen_scene(s, 2);
  const std::size_t cols = s.cols;
  for (std::size_t k = 0; k + 1 < s.frames; ++k) {
    for (std::size_t c = 0; c < s.rows * cols; ++c) {
      if (!scene.is_object(k, c)) continue;
      EXPECT_EQ(scene.flows.forward(k).dx(c % cols, c / cols), 1.0f);
      EXPECT_EQ(scene.flows.forward(k).dy(c % cols, c / cols), 0.0f);
    }
  }
}

TEST(GenScene, KeypointsAtObjectCentres) {
  SceneSpec s = small_spec();
  s.cols = 12;
  s.objects.push_back({ObjectShape::kSquare, 3, 0, 1, 1, 0});
  const Scene scene = gen_scene(s, 3);
  EXPECT_EQ(scene.poses.frames(), s.frames);
  EXPECT_DOUBLE_EQ(scene.poses.frame(2)[0].x, 3.0);
  EXPECT_DOUBLE_EQ(scene.poses.frame(2)[0].y, 2.0);
}

TEST(GenScene, TwoObjectsWarpToReferenceExactly) {
  SceneSpec s;
  s.frames = 8;
  s.rows = 16;
  s.cols = 12;
  s.channels = 3;
  s.objects.push_back({ObjectShape::kSquare, 3, 0, 0, 1, 0});
  s.objects.push_back({ObjectShape::kBlob, 4, 8, 4, 0, 1});
  const Scene scene = gen_scene(s, 4);
  const std::size_t cells = 192;
  for (std::size_t r : {0u, 3u, 7u}) {
    for (std::size_t k = 0; k < s.frames; ++k) {
      const FlowField f = scene.flows.between(k, r);
      for (std::size_t c = 0; c < cells; ++c) {
        if (!scene.is_object(k, c)) continue;
        // Warp the cell along the composed flow and compare content.
        const long tx = static_cast<long>(c % 12) + static_cast<long>(f.dx(c % 12, c / 12));
        const long ty = static_cast<long>(c / 12) + static_cast<long>(f.dy(c % 12, c / 12));
        ASSERT_TRUE(tx >= 0 && ty >= 0 && tx < 12 && ty < 16);
        const std::size_t t = static_cast<std::size_t>(ty * 12 + tx);
        EXPECT_TRUE(scene.is_object(r, t));
        for (std::size_t ch = 0; ch < 3; ++ch)
          EXPECT_EQ(scene.video.cell(k * cells + c)[ch], scene.video.cell(r * cells + t)[ch]);
      }
    }
  }
}

TEST(GenScene, Deterministic) {
  const SceneSpec s = single_object_scene(8, 8, 8, 4, 3, 2, 1, 9);
  const Scene a = gen_scene(s, 5);
  const Scene b = gen_scene(s, 5);
  EXPECT_TRUE(bitwise_equal(a.video, b.video));
  EXPECT_TRUE(a.flows.bitwise_equal(b.flows));
  EXPECT_FALSE(bitwise_equal(a.video, gen_scene(s, 6).video));
}

TEST(GenScene, Errors) {
  SceneSpec s = small_spec();
  s.objects.push_back({ObjectShape::kSquare, 3, 4, 0, 1, 0});
  EXPECT_THROW(gen_scene(s, 1), BoundsError);
  s.wrap = true;
  EXPECT_NO_THROW(gen_scene(s, 1));
  SceneSpec overlap = small_spec();
  overlap.objects.push_back({ObjectShape::kSquare, 2, 0, 0, 0, 0});
  overlap.objects.push_back({ObjectShape::kSquare, 2, 1, 1, 0, 0});
  EXPECT_THROW(gen_scene(overlap, 1), ConfigError);
}

TEST(AlongFlowVariation, StaticVideoZeroFlowIsZero) {
  SceneSpec s = small_spec();
  const Scene scene = gen_scene(s, 1);
  EXPECT_EQ(along_flow_variation(scene.video, FlowSet::zeros(8, 8, 8)), 0.0);
}

TEST(AlongFlowVariation, TrueFlowIsZeroOnObjectCells) {
  const Scene scene = gen_scene(single_object_scene(8, 8, 8, 4, 3, 2, 1, 3), 4);
  EXPECT_EQ(along_flow_variation(scene.video, scene.flows, objects_of(scene)), 0.0);
  // Background that stays visible is static and carried exactly too. Cells
  // about to be covered are routed to vacated cells, which hold other values.
  const CellMask visible = [&scene](std::size_t f, std::size_t c) {
    return !scene.is_object(f, c) && !scene.is_object(f + 1, c);
  };
  EXPECT_EQ(along_flow_variation(scene.video, scene.flows, visible), 0.0);
  EXPECT_GT(along_flow_variation(scene.video, scene.flows), 0.0);
}

TEST(AlongFlowVariation, ZeroFlowMatchesBruteForceLoop) {
  const Scene scene = gen_scene(single_object_scene(8, 8, 8, 4, 3, 2, 1, 3), 4);
  const double v = along_flow_variation(scene.video, FlowSet::zeros(8, 8, 8), objects_of(scene));
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k + 1 < 8; ++k)
    for (std::size_t h = 0; h < 8; ++h)
      for (std::size_t w = 0; w < 8; ++w) {
        if (!scene.is_object(k, h * 8 + w)) continue;
        for (std::size_t c = 0; c < 4; ++c) {
          const double d = scene.video(k + 1, h, w, c) - scene.video(k, h, w, c);
          sum += d * d;
        }
        ++n;
      }
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(v, sum / n, 1e-12);
  EXPECT_EQ(v, naive_temporal_variation(scene.video, objects_of(scene)));
}

TEST(AlongFlowVariation, Errors) {
  const auto x = random_video<double>({4, 3, 3, 1}, 1);
  EXPECT_THROW(along_flow_variation(x, FlowSet::zeros(3, 3, 3)), FlowChainError);
  EXPECT_THROW(along_flow_variation(x, FlowSet::zeros(4, 3, 4)), DimensionError);
}

Scene train_scene() {
  return gen_scene(single_object_scene(8, 8, 8, 4, 4, 4, 0, 11), 12);
}

TEST(ToyTrain, ZeroLearningRateIsFlat) {
  BlockConfig b;
  b.spec = {4, 4, 4};
  b.width = 4;
  TrainConfig t;
  t.steps = 5;
  t.lr = 0.0;
  const TrainResult r = toy_train(train_scene(), b, t);
  ASSERT_EQ(r.losses.size(), 6u);
  for (double l : r.losses) EXPECT_EQ(l, r.losses.front());
}

TEST(ToyTrain, LossDecreasesAndIsDeterministic) {
  BlockConfig b;
  b.spec = {4, 4, 4};
  b.width = 4;
  TrainConfig t;
  t.steps = 40;
  t.seed = 3;
  const TrainResult r = toy_train(train_scene(), b, t);
  EXPECT_LT(r.final_loss(), r.initial_loss());
  for (double l : r.losses) EXPECT_TRUE(std::isfinite(l));
  const TrainResult again = toy_train(train_scene(), b, t);
  EXPECT_EQ(r.losses, again.losses);
  EXPECT_EQ(r.params.query, again.params.query);
}

TEST(ToyTrain, ShiftedResidualAndEmbeddingVariantsRun) {
  BlockConfig b;
  b.spec = {4, 2, 2};
  b.width = 4;
  b.heads = 2;
  b.shifted = true;
  b.residual = true;
  b.frame_embedding = true;
  TrainConfig t;
  t.steps = 3;
  t.init = ParamInit::kRandom;
  t.lr = 0.05;
  const TrainResult r = toy_train(train_scene(), b, t);
  EXPECT_EQ(r.losses.size(), 4u);
}

TEST(ToyTrain, DivergenceGuard) {
  BlockConfig b;
  b.spec = {4, 4, 4};
  b.width = 4;
  TrainConfig t;
  t.steps = 200;
  t.lr = 1e6;
  EXPECT_THROW(toy_train(train_scene(), b, t), DivergenceError);
  t.lr = -1.0;
  EXPECT_THROW(toy_train(train_scene(), b, t), ConfigError);
}

TEST(Sweep, DefaultSizesAndMonotoneCost) {
  const auto sizes = default_sweep_sizes();
  ASSERT_EQ(sizes.size(), 3u);
  EXPECT_EQ(sizes[0], (SubspaceSpec{4, 2, 2}));
  EXPECT_EQ(sizes[1], (SubspaceSpec{4, 4, 4}));
  EXPECT_EQ(sizes[2], (SubspaceSpec{8, 4, 4}));
  const Scene scene = gen_scene(single_object_scene(8, 8, 8, 4, 2, 2, 0, 1), 2);
  const SweepResult r = sweep_subspace_sizes(sizes, scene, 4, 7);
  ASSERT_EQ(r.runs.size(), 3u);
  EXPECT_TRUE(r.warnings.empty());
  for (std::size_t i = 1; i < r.runs.size(); ++i) EXPECT_GT(r.runs[i].total, r.runs[i - 1].total);
  for (const auto& run : r.runs) {
    EXPECT_GE(run.along_flow_variation, 0.0);
    EXPECT_GE(run.naive_temporal_variation, 0.0);
  }
}

TEST(Sweep, SingleWindowCostEqualsFull) {
  const Scene scene = gen_scene(single_object_scene(4, 4, 4, 2, 2, 1, 0, 1), 2);
  const SweepResult r = sweep_subspace_sizes({{4, 4, 4}}, scene, 2, 1);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_EQ(r.runs[0].total, cost_model(AttentionMode::kFull, {4, 4, 4, 2, 2}).total());
}

TEST(Sweep, NonDivisibleSizesSkippedWithWarning) {
  const Scene scene = gen_scene(single_object_scene(8, 8, 8, 4, 2, 1, 0, 1), 2);
  const SweepResult r = sweep_subspace_sizes({{3, 4, 4}, {4, 4, 4}}, scene, 4, 1);
  EXPECT_EQ(r.runs.size(), 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("3,4,4"), std::string::npos);
}

TEST(Consistency, ReportsEveryMode) {
  const Scene scene = gen_scene(single_object_scene(8, 8, 8, 4, 2, 2, 0, 1), 2);
  const ConsistencyReport c = consistency_report(scene, {4, 4, 4}, 4);
  EXPECT_EQ(c.mode_costs.size(), 7u);
  EXPECT_EQ(c.along_flow_variation, 0.0);
  EXPECT_GT(c.naive_temporal_variation, 0.0);
}

Report sample_report(std::size_t runs) {
  const Scene scene = gen_scene(single_object_scene(8, 8, 8, 4, 2, 2, 0, 1), 2);
  Report r;
  r.metadata = {5, scene.video.shape(), 4, "double"};
  r.consistency = consistency_report(scene, {4, 4, 4}, 4);
  auto sizes = default_sweep_sizes();
  sizes.resize(runs);
  r.runs = sweep_subspace_sizes(sizes, scene, 4, 5).runs;
  return r;
}

TEST(Report, EmptyResultSetIsValid) {
  Report r;
  r.metadata.dims = {1, 1, 1, 1};
  EXPECT_NO_THROW(validate_report_json(report_json(r)));
  EXPECT_EQ(report_csv({}), csv_header());
}

TEST(Report, CsvRowCountEqualsRuns) {
  const Report r = sample_report(3);
  const std::string csv = report_csv(r.runs);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Report, JsonRoundTripsThroughValidator) {
  const Report r = sample_report(2);
  const std::string text = report_json(r);
  EXPECT_NO_THROW(validate_report_json(text));
  const auto doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc["runs"].size(), 2u);
  EXPECT_EQ(doc["schema"], kReportSchema);
  // Key order is fixed.
  EXPECT_LT(text.find("\"schema\""), text.find("\"metadata\""));
  EXPECT_LT(text.find("\"consistency\""), text.find("\"runs\""));
}

TEST(Report, ValidatorRejectsMalformedDocuments) {
  auto doc = nlohmann::json::parse(report_json(sample_report(1)));
  auto broken = doc;
  broken["runs"][0]["along_flow_variation"] = -1.0;
  EXPECT_THROW(validate_report_json(broken.dump()), ParseError);
  broken = doc;
  broken.erase("metadata");
  EXPECT_THROW(validate_report_json(broken.dump()), ParseError);
  broken = doc;
  broken["extra"] = 1;
  EXPECT_THROW(validate_report_json(broken.dump()), ParseError);
  EXPECT_THROW(validate_report_json("not json"), ParseError);
}

TEST(Report, WritesBothFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "stsa_report_test";
  std::filesystem::remove_all(dir);
  write_report(dir, "out", sample_report(1));
  EXPECT_TRUE(std::filesystem::exists(dir / "out.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out.csv"));
}

TEST(Report, UnwritablePathIsIoError) {
  const auto file = std::filesystem::temp_directory_path() / "stsa_report_blocker";
  { std::ofstream(file) << "x"; }
  EXPECT_THROW(write_report(file / "sub", "out", sample_report(0)), IoError);
}

}  // namespace
}  // namespace stsa
