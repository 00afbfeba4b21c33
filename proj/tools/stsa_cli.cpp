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

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stsa/align.hpp"
#include "stsa/block.hpp"
#include "stsa/cost.hpp"
#include "stsa/experiment.hpp"
#include "stsa/flow.hpp"
#include "stsa/pose.hpp"
#include "stsa/scene.hpp"
#include "stsa/tensor_io.hpp"
#include "stsa/train.hpp"

namespace fs = std::filesystem;
using namespace stsa;

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::string precision = "double";
  std::string out_dir = ".";

  bool single() const { return precision == "single"; }

  fs::path out(const std::string& name) const {
    const fs::path p(name);
    if (p.is_absolute()) return p;
    fs::create_directories(out_dir);
    return fs::path(out_dir) / p;
  }

  void require_double(const char* command) const {
    if (single()) {
      throw PrecisionError(std::string(command) + " runs in double precision only");
    }
  }
};

std::vector<std::size_t> parse_list(const std::string& text, char sep, std::size_t count,
                                    const char* what) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", what, item));
    }
    out.push_back(v);
  }
  if (out.size() != count) {
    throw ConfigError(fmt::format("{} expects {} values, got '{}'", what, count, text));
  }
  return out;
}

std::pair<long, long> parse_velocity(const std::string& text) {
  std::stringstream in(text);
  long vx = 0;
  long vy = 0;
  char comma = 0;
  if (!(in >> vx >> comma >> vy) || comma != ',' || !in.eof()) {
    throw ConfigError("--velocity expects vx,vy, got '" + text + "'");
  }
  return {vx, vy};
}

std::vector<SubspaceSpec> parse_sizes(const std::string& text) {
  std::vector<SubspaceSpec> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) sizes.push_back(SubspaceSpec::parse(item));
  return sizes;
}

// Scene options shared by gen-data, train-toy, sweep and report.
struct SceneOptions {
  std::string dims = "16,16,16,8";
  std::size_t objects = 1;
  std::size_t size = 4;
  std::string velocity = "1,0";

  void add(CLI::App* cmd) {
    cmd->add_option("--dims", dims, "F,H,W,C");
    cmd->add_option("--objects", objects, "1 or 2 wrapping squares")->check(CLI::Range(1, 2));
    cmd->add_option("--object-size", size, "square side in cells");
    cmd->add_option("--velocity", velocity, "vx,vy in cells per frame");
  }

  Scene build(std::uint64_t seed) const {
    const auto d = parse_list(dims, ',', 4, "--dims");
    const auto [vx, vy] = parse_velocity(velocity);
    const SceneSpec spec = objects == 1
                               ? single_object_scene(d[0], d[1], d[2], d[3], size, vx, vy, seed)
                               : two_object_scene(d[0], d[1], d[2], d[3], size, vx, vy, seed);
    return gen_scene(spec, seed);
  }
};

// params.lvt: [4, C, d] holding W_q, W_k, W_v and W_o transposed.
void save_params(const fs::path& path, const AttentionParams<double>& p) {
  const std::size_t c = p.channels();
  const std::size_t d = p.width();
  std::vector<double> v;
  v.reserve(4 * c * d);
  for (const Matrix<double>* m : {&p.query, &p.key, &p.value}) {
    v.insert(v.end(), m->values().begin(), m->values().end());
  }
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < d; ++j) v.push_back(p.output(j, i));
  }
  write_lvt<double>(path, {4, static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(d)}, v);
}

template <typename T>
AttentionParams<T> load_params(const fs::path& path, std::size_t heads) {
  const LvtTensor t = read_lvt(path);
  if (t.dims.size() != 3 || t.dims[0] != 4) {
    throw ParseError(path.string() + ": params must be a [4, C, d] tensor");
  }
  const std::size_t c = t.dims[1];
  const std::size_t d = t.dims[2];
  auto slice = [&](std::size_t k) {
    Matrix<T> m(c, d);
    for (std::size_t i = 0; i < c * d; ++i) m.values()[i] = static_cast<T>(t.values[k * c * d + i]);
    return m;
  };
  AttentionParams<T> p;
  p.query = slice(0);
  p.key = slice(1);
  p.value = slice(2);
  const Matrix<T> wo_t = slice(3);
  p.output = Matrix<T>(d, c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < d; ++j) p.output(j, i) = wo_t(i, j);
  }
  p.heads = heads;
  p.validate();
  return p;
}

template <typename T>
AttentionParams<T> cast_params(const AttentionParams<double>& p) {
  auto cast = [](const Matrix<double>& m) {
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] = static_cast<T>(m.values()[i]);
    return out;
  };
  return {cast(p.query), cast(p.key), cast(p.value), cast(p.output), p.heads};
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, text);
  std::cout << path.string() << "\n";
}

void cmd_gen_data(const Global& g, const SceneOptions& scene_opts) {
  const Scene scene = scene_opts.build(g.seed);
  const fs::path video = g.out("scene.lvt");
  if (g.single()) {
    LatentVideo<float> f(scene.video.shape());
    for (std::size_t i = 0; i < f.size(); ++i) f.values()[i] = static_cast<float>(scene.video.values()[i]);
    save_video(video, f);
  } else {
    save_video(video, scene.video);
  }
  save_flow(g.out("scene.mfl"), scene.flows);
  save_pose_json(g.out("poses.json"), scene.poses);
  std::vector<double> mask(scene.object_mask.begin(), scene.object_mask.end());
  const VideoShape s = scene.video.shape();
  write_lvt<double>(g.out("mask.lvt"),
                    {static_cast<std::uint32_t>(s.frames), static_cast<std::uint32_t>(s.rows),
                     static_cast<std::uint32_t>(s.cols)},
                    mask);
  for (const char* name : {"scene.lvt", "scene.mfl", "poses.json", "mask.lvt"}) {
    std::cout << g.out(name).string() << "\n";
  }
}

struct ExtractFlowOptions {
  std::string poses;
  std::string size;
  double sigma = 2.0;
  std::string out = "flows.mfl";
  std::size_t downsample = 1;
};

void cmd_extract_flow(const Global& g, const ExtractFlowOptions& o) {
  const auto hw = parse_list(o.size, 'x', 2, "--size");
  const PoseSequence poses = load_pose_json(o.poses, hw[1], hw[0]);
  FlowSet flows = synth_flow_from_poses(poses, hw[0], hw[1], o.sigma);
  if (o.downsample > 1) flows = downsample(flows, o.downsample);
  const fs::path out = g.out(o.out);
  save_flow(out, flows);
  std::cout << out.string() << "\n";
}

struct RunBlockOptions {
  std::string input;
  std::string flows;
  std::string subspace = "4,4,4";
  bool shifted = false;
  bool no_residual = false;
  std::string params;
  std::size_t width = 8;
  std::size_t heads = 1;
  std::string out = "out.lvt";
  std::string dump_maps;
};

template <typename T>
void run_block_as(const Global& g, const RunBlockOptions& o) {
  const LatentVideo<T> x = load_video<T>(o.input);
  const FlowSet flows = load_flow(o.flows);
  const SubspaceSpec spec = SubspaceSpec::parse(o.subspace);
  const AttentionParams<T> params =
      o.params.empty() ? cast_params<T>(AttentionParams<double>::random(
                             x.channels(), o.width, o.heads, g.seed, 1.0 / std::sqrt(x.channels())))
                       : load_params<T>(o.params, o.heads);
  const BlockOptions options{o.shifted, !o.no_residual};
  const BlockPlan plan = plan_block(flows, x.shape(), spec, options);
  const LatentVideo<T> y = apply_block(x, plan, params);
  const fs::path out = g.out(o.out);
  save_video(out, y);
  std::cout << out.string() << "\n";
  if (!o.dump_maps.empty()) write_text(g.out(o.dump_maps), alignment_to_json(plan.alignment));
}

struct BenchmarkOptions {
  std::string mode;
  std::string dims = "16,16,16,8,8";
  std::string subspace;
  bool measure = false;
  std::string out = "benchmark.json";
};

void cmd_benchmark(const Global& g, const BenchmarkOptions& o) {
  const auto d = parse_list(o.dims, ',', 5, "--dims");
  const AttentionDims dims{d[0], d[1], d[2], d[3], d[4]};
  const AttentionMode mode = parse_attention_mode(o.mode);
  std::optional<SubspaceSpec> spec;
  if (!o.subspace.empty()) {
    spec = SubspaceSpec::parse(o.subspace);
  } else if (mode == AttentionMode::kSubspace) {
    spec = SubspaceSpec{4, 4, 4};
  }
  const CostReport report = cost_model(mode, dims, spec);
  auto doc = nlohmann::ordered_json::parse(report.to_json());
  if (o.measure) {
    const MacCounter m = measure_macs(mode, dims, spec, g.seed);
    doc["measured"] = {{"projection", m.projection},
                       {"score", m.score},
                       {"value", m.value},
                       {"total", m.total()},
                       {"matches_model", m.projection == report.projection &&
                                             m.score == report.score && m.value == report.value}};
  }
  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  write_file_bytes(g.out(o.out), text);
}

struct TrainOptions {
  SceneOptions scene;
  std::string subspace = "4,4,4";
  std::size_t steps = 200;
  double lr = 0.3;
  double beta = 0.5;
  std::size_t width = 8;
  std::size_t heads = 1;
  bool no_flows = false;
  bool shifted = false;
  bool residual = false;
  bool frame_embedding = false;
  bool random_init = false;
};

void cmd_train_toy(const Global& g, const TrainOptions& o) {
  g.require_double("train-toy");
  const Scene scene = o.scene.build(g.seed);
  BlockConfig block;
  block.spec = SubspaceSpec::parse(o.subspace);
  block.width = o.width;
  block.heads = o.heads;
  block.use_flows = !o.no_flows;
  block.shifted = o.shifted;
  block.residual = o.residual;
  block.frame_embedding = o.frame_embedding;
  TrainConfig train;
  train.steps = o.steps;
  train.lr = o.lr;
  train.beta = o.beta;
  train.seed = g.seed;
  train.init = o.random_init ? ParamInit::kRandom : ParamInit::kIdentity;
  const TrainResult r = toy_train(scene, block, train);

  nlohmann::ordered_json doc;
  doc["seed"] = g.seed;
  doc["subspace"] = {block.spec.frames, block.spec.rows, block.spec.cols};
  doc["use_flows"] = block.use_flows;
  doc["steps"] = train.steps;
  doc["lr"] = train.lr;
  doc["initial_loss"] = r.initial_loss();
  doc["final_loss"] = r.final_loss();
  doc["losses"] = r.losses;
  write_text(g.out("train.json"), doc.dump(2) + "\n");
  const fs::path params = g.out("params.lvt");
  save_params(params, r.params);
  std::cout << params.string() << "\n";
  fmt::print("loss {:.6g} -> {:.6g}\n", r.initial_loss(), r.final_loss());
}

struct SweepOptions {
  SceneOptions scene;
  std::string sizes = "4,2,2;4,4,4;8,4,4";
  std::string subspace = "4,4,4";
  std::size_t width = 8;
};

std::vector<RunRecord> run_sweep(const Global& g, const Scene& scene, const SweepOptions& o) {
  const SweepResult r = sweep_subspace_sizes(parse_sizes(o.sizes), scene, o.width, g.seed);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  return r.runs;
}

void cmd_sweep(const Global& g, const SweepOptions& o) {
  g.require_double("sweep");
  const Scene scene = o.scene.build(g.seed);
  write_text(g.out("sweep.csv"), report_csv(run_sweep(g, scene, o)));
}

void cmd_report(const Global& g, const SweepOptions& o) {
  g.require_double("report");
  const Scene scene = o.scene.build(g.seed);
  Report report;
  report.metadata = {g.seed, scene.video.shape(), o.width, g.precision};
  report.consistency = consistency_report(scene, SubspaceSpec::parse(o.subspace), o.width);
  report.runs = run_sweep(g, scene, o);
  write_report(g.out_dir, "report", report);
  std::cout << (fs::path(g.out_dir) / "report.json").string() << "\n"
            << (fs::path(g.out_dir) / "report.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace attention with flow-guided alignment"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "seed for every random draw");
  app.add_option("--precision", g.precision, "scalar precision")
      ->check(CLI::IsMember({"single", "double"}));
  app.add_option("--out-dir", g.out_dir, "directory for output files");

  SceneOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "synthetic scene: video, flows, poses, mask");
  gen.add(gen_cmd);

  ExtractFlowOptions ef;
  auto* ef_cmd = app.add_subcommand("extract-flow", "keypoint-driven flows from a pose file");
  ef_cmd->add_option("--poses", ef.poses, "pose JSON")->required();
  ef_cmd->add_option("--size", ef.size, "grid HxW")->required();
  ef_cmd->add_option("--sigma", ef.sigma, "Gaussian bandwidth in cells");
  ef_cmd->add_option("--out", ef.out, "output MFL1 file");
  ef_cmd->add_option("--downsample", ef.downsample, "block-mean factor");

  RunBlockOptions rb;
  auto* rb_cmd = app.add_subcommand("run-block", "apply one attention block to an LVT1 video");
  rb_cmd->add_option("--input", rb.input, "input LVT1 video")->required();
  rb_cmd->add_option("--flows", rb.flows, "MFL1 flows")->required();
  rb_cmd->add_option("--subspace", rb.subspace, "window f,h,w");
  rb_cmd->add_flag("--shifted", rb.shifted, "half-window shifted block");
  rb_cmd->add_flag("--no-residual", rb.no_residual, "drop the residual connection");
  rb_cmd->add_option("--params", rb.params, "[4,C,d] LVT1 weights; random from --seed if absent");
  rb_cmd->add_option("--width", rb.width, "projection width for random weights");
  rb_cmd->add_option("--heads", rb.heads, "attention heads");
  rb_cmd->add_option("--out", rb.out, "output LVT1 video");
  rb_cmd->add_option("--dump-maps", rb.dump_maps, "write alignment maps as JSON");

  BenchmarkOptions bm;
  auto* bm_cmd = app.add_subcommand("benchmark", "multiply-accumulate cost of one attention layer");
  bm_cmd->add_option("--mode", bm.mode, "subspace|temporal|crossframe-*|full")->required();
  bm_cmd->add_option("--dims", bm.dims, "F,H,W,C,d");
  bm_cmd->add_option("--subspace", bm.subspace, "window f,h,w");
  bm_cmd->add_flag("--measure", bm.measure, "also run the layer and count");
  bm_cmd->add_option("--out", bm.out, "output JSON file");

  TrainOptions tr;
  tr.scene.size = 8;
  tr.scene.objects = 2;
  tr.scene.velocity = "4,0";
  auto* tr_cmd = app.add_subcommand("train-toy", "gradient descent on one block, noised to clean");
  tr.scene.add(tr_cmd);
  tr_cmd->add_option("--subspace", tr.subspace, "window f,h,w");
  tr_cmd->add_option("--steps", tr.steps, "gradient steps");
  tr_cmd->add_option("--lr", tr.lr, "learning rate");
  tr_cmd->add_option("--beta", tr.beta, "forward noising variance");
  tr_cmd->add_option("--width", tr.width, "projection width");
  tr_cmd->add_option("--heads", tr.heads, "attention heads");
  tr_cmd->add_flag("--no-flows", tr.no_flows, "zero flows: plain windowed attention");
  tr_cmd->add_flag("--shifted", tr.shifted, "half-window shifted block");
  tr_cmd->add_flag("--residual", tr.residual, "add the residual connection");
  tr_cmd->add_flag("--frame-embedding", tr.frame_embedding, "add sinusoidal frame embeddings");
  tr_cmd->add_flag("--random-init", tr.random_init, "random instead of identity-based init");

  SweepOptions sw;
  auto* sw_cmd = app.add_subcommand("sweep", "cost and variation across subspace sizes, as CSV");
  sw.scene.add(sw_cmd);
  sw_cmd->add_option("--sizes", sw.sizes, "';'-separated f,h,w list");
  sw_cmd->add_option("--width", sw.width, "projection width");

  SweepOptions rp;
  auto* rp_cmd = app.add_subcommand("report", "consistency report and sweep as JSON and CSV");
  rp.scene.add(rp_cmd);
  rp_cmd->add_option("--sizes", rp.sizes, "';'-separated f,h,w list");
  rp_cmd->add_option("--subspace", rp.subspace, "window f,h,w for the consistency costs");
  rp_cmd->add_option("--width", rp.width, "projection width");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) cmd_gen_data(g, gen);
    if (ef_cmd->parsed()) cmd_extract_flow(g, ef);
    if (rb_cmd->parsed()) {
      g.single() ? run_block_as<float>(g, rb) : run_block_as<double>(g, rb);
    }
    if (bm_cmd->parsed()) cmd_benchmark(g, bm);
    if (tr_cmd->parsed()) cmd_train_toy(g, tr);
    if (sw_cmd->parsed()) cmd_sweep(g, sw);
    if (rp_cmd->parsed()) cmd_report(g, rp);
  } catch (const stsa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
