#include "cwmap/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cwmap/eval.hpp"
#include "cwmap/featuremaps.hpp"
#include "cwmap/inference.hpp"
#include "cwmap/losses.hpp"
#include "cwmap/rng.hpp"
#include "cwmap/scene.hpp"
#include "text_format.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace cwmap::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  GeneratorConfig gen;
  CorruptionConfig cor;
  EnergyConfig energy;
  LossConfig loss;
};

////////////////////////////////////////////////////////////////////////////////
// Config files. Sections generator / corruption / energy / loss, unknown
// keys rejected, absent keys keep their defaults. Precedence is
// flag > --corruption file > --config file > default.

void expect_object(const nlohmann::json& o, const std::string& what) {
  if (!o.is_object()) fail(Err::ParseError, what + " must be an object");
}

double as_num(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) fail(Err::ParseError, "field " + key + " must be a number");
  return v.get<double>();
}

void get_num(const nlohmann::json& o, const std::string& key, double& dst) {
  if (auto it = o.find(key); it != o.end()) dst = as_num(*it, key);
}

void get_u64(const nlohmann::json& o, const std::string& key, uint64_t& dst) {
  if (auto it = o.find(key); it != o.end()) {
    if (!it->is_number_unsigned() && !it->is_number_integer())
      fail(Err::ParseError, "field " + key + " must be an integer");
    dst = it->get<uint64_t>();
  }
}

void get_range(const nlohmann::json& o, const std::string& key, Range& dst) {
  if (auto it = o.find(key); it != o.end()) {
    if (!it->is_array() || it->size() != 2)
      fail(Err::ParseError, "field " + key + " must be [lo, hi]");
    dst.lo = as_num((*it)[0], key);
    dst.hi = as_num((*it)[1], key);
  }
}

void get_irange(const nlohmann::json& o, const std::string& key, IntRange& dst) {
  if (auto it = o.find(key); it != o.end()) {
    if (!it->is_array() || it->size() != 2)
      fail(Err::ParseError, "field " + key + " must be [lo, hi]");
    dst.lo = int(as_num((*it)[0], key));
    dst.hi = int(as_num((*it)[1], key));
  }
}

void check_keys(const nlohmann::json& o, const std::string& section,
                std::initializer_list<const char*> known) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(Err::ParseError, "unknown key " + it.key() + " in " + section);
  }
}

void apply_generator(const nlohmann::json& o, GeneratorConfig& c) {
  expect_object(o, "generator");
  check_keys(o, "generator",
             {"n_roads", "road_width", "crosswalk_width", "crosswalk_offset",
              "angle_jitter_deg", "p_no_crosswalk", "seed"});
  get_irange(o, "n_roads", c.n_roads);
  get_range(o, "road_width", c.road_width);
  get_range(o, "crosswalk_width", c.crosswalk_width);
  get_range(o, "crosswalk_offset", c.crosswalk_offset);
  get_num(o, "angle_jitter_deg", c.angle_jitter_deg);
  get_num(o, "p_no_crosswalk", c.p_no_crosswalk);
  get_u64(o, "seed", c.seed);
}

void apply_corruption(const nlohmann::json& o, CorruptionConfig& c) {
  expect_object(o, "corruption");
  check_keys(o, "corruption",
             {"blur_sigma", "noise_sigma", "hole_rate", "hole_size", "erosion_px",
              "angle_jitter_deg", "seed"});
  get_num(o, "blur_sigma", c.blur_sigma);
  get_num(o, "noise_sigma", c.noise_sigma);
  get_num(o, "hole_rate", c.hole_rate);
  get_irange(o, "hole_size", c.hole_size);
  get_num(o, "erosion_px", c.erosion_px);
  get_num(o, "angle_jitter_deg", c.angle_jitter_deg);
  get_u64(o, "seed", c.seed);
}

void apply_energy(const nlohmann::json& o, EnergyConfig& c) {
  expect_object(o, "energy");
  check_keys(o, "energy",
             {"lambda_i", "min_width", "max_width", "position_step", "slice_step",
              "search_window", "presence_threshold", "angle_offsets_deg"});
  get_num(o, "lambda_i", c.lambda_i);
  get_num(o, "min_width", c.min_width);
  get_num(o, "max_width", c.max_width);
  get_num(o, "position_step", c.position_step);
  get_num(o, "slice_step", c.slice_step);
  get_num(o, "search_window", c.search_window);
  get_num(o, "presence_threshold", c.presence_threshold);
  if (auto it = o.find("angle_offsets_deg"); it != o.end()) {
    if (!it->is_array()) fail(Err::ParseError, "angle_offsets_deg must be an array");
    c.angle_offsets_deg.clear();
    for (const auto& v : *it) c.angle_offsets_deg.push_back(as_num(v, "angle_offsets_deg"));
  }
}

void apply_loss(const nlohmann::json& o, LossConfig& c) {
  expect_object(o, "loss");
  check_keys(o, "loss", {"lambda_align", "clamp_eps"});
  get_num(o, "lambda_align", c.lambda_align);
  get_num(o, "clamp_eps", c.clamp_eps);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) fail(Err::IoError, "cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::IoError, "cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out.good()) fail(Err::IoError, "cannot write " + path);
}

void load_config_file(const std::string& path, RunConfig& rc) {
  nlohmann::json j = textio::parse(read_file(path), "config " + path);
  expect_object(j, "config file");
  check_keys(j, "config file", {"generator", "corruption", "energy", "loss"});
  if (auto it = j.find("generator"); it != j.end()) apply_generator(*it, rc.gen);
  if (auto it = j.find("corruption"); it != j.end()) apply_corruption(*it, rc.cor);
  if (auto it = j.find("energy"); it != j.end()) apply_energy(*it, rc.energy);
  if (auto it = j.find("loss"); it != j.end()) apply_loss(*it, rc.loss);
}

void load_corruption_file(const std::string& path, CorruptionConfig& c) {
  nlohmann::json j = textio::parse(read_file(path), "corruption " + path);
  // Either a bare corruption object or a config file with that section.
  if (j.is_object() && j.contains("corruption"))
    apply_corruption(j["corruption"], c);
  else
    apply_corruption(j, c);
}

////////////////////////////////////////////////////////////////////////////////
// Reproducibility line: version, master seed and a digest of the effective
// config, so a run can be re-created from its log.

void digest_num(std::string& s, const char* key, double v) {
  s += key;
  s += '=';
  s += textio::fmt_double(v);
  s += ';';
}

uint64_t config_digest(const RunConfig& rc) {
  std::string s = "generator:";
  char buf[64];
  std::snprintf(buf, sizeof buf, "n_roads=[%d,%d];", rc.gen.n_roads.lo, rc.gen.n_roads.hi);
  s += buf;
  digest_num(s, "road_width_lo", rc.gen.road_width.lo);
  digest_num(s, "road_width_hi", rc.gen.road_width.hi);
  digest_num(s, "crosswalk_width_lo", rc.gen.crosswalk_width.lo);
  digest_num(s, "crosswalk_width_hi", rc.gen.crosswalk_width.hi);
  digest_num(s, "crosswalk_offset_lo", rc.gen.crosswalk_offset.lo);
  digest_num(s, "crosswalk_offset_hi", rc.gen.crosswalk_offset.hi);
  digest_num(s, "angle_jitter_deg", rc.gen.angle_jitter_deg);
  digest_num(s, "p_no_crosswalk", rc.gen.p_no_crosswalk);
  std::snprintf(buf, sizeof buf, "seed=%" PRIu64 ";corruption:", rc.gen.seed);
  s += buf;
  digest_num(s, "blur_sigma", rc.cor.blur_sigma);
  digest_num(s, "noise_sigma", rc.cor.noise_sigma);
  digest_num(s, "hole_rate", rc.cor.hole_rate);
  std::snprintf(buf, sizeof buf, "hole_size=[%d,%d];", rc.cor.hole_size.lo, rc.cor.hole_size.hi);
  s += buf;
  digest_num(s, "erosion_px", rc.cor.erosion_px);
  digest_num(s, "angle_jitter_deg", rc.cor.angle_jitter_deg);
  std::snprintf(buf, sizeof buf, "seed=%" PRIu64 ";energy:", rc.cor.seed);
  s += buf;
  digest_num(s, "lambda_i", rc.energy.lambda_i);
  digest_num(s, "min_width", rc.energy.min_width);
  digest_num(s, "max_width", rc.energy.max_width);
  digest_num(s, "position_step", rc.energy.position_step);
  digest_num(s, "slice_step", rc.energy.slice_step);
  digest_num(s, "search_window", rc.energy.search_window);
  digest_num(s, "presence_threshold", rc.energy.presence_threshold);
  s += "angle_offsets_deg=[";
  for (size_t i = 0; i < rc.energy.angle_offsets_deg.size(); ++i) {
    if (i) s += ',';
    s += textio::fmt_double(rc.energy.angle_offsets_deg[i]);
  }
  s += "];loss:";
  digest_num(s, "lambda_align", rc.loss.lambda_align);
  digest_num(s, "clamp_eps", rc.loss.clamp_eps);
  return crc64_ecma(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

void repro_line(uint64_t seed, const RunConfig& rc) {
  std::fprintf(stderr, "cwmap %s seed=%" PRIu64 " config=%016" PRIx64 "\n", kVersion, seed,
               config_digest(rc));
}

////////////////////////////////////////////////////////////////////////////////
// Batch directories: files named <prefix><digits><suffix>, processed in
// index order. The digit string is preserved when deriving output names.

struct IndexedFile {
  uint64_t index;
  std::string digits;
  fs::path path;
};

std::vector<IndexedFile> list_indexed(const fs::path& dir, const std::string& prefix,
                                      const std::string& suffix) {
  if (!fs::is_directory(dir)) fail(Err::IoError, dir.string() + " is not a directory");
  std::vector<IndexedFile> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() <= prefix.size() + suffix.size()) continue;
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
      continue;
    out.push_back({std::stoull(digits), digits, entry.path()});
  }
  std::sort(out.begin(), out.end(), [](const IndexedFile& a, const IndexedFile& b) {
    return a.index != b.index ? a.index < b.index : a.digits < b.digits;
  });
  return out;
}

std::string pad4(uint64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04" PRIu64, i);
  return buf;
}

// Runs fn(k) for k in [0, n) in parallel; the first Error wins and is
// rethrown after the loop so OpenMP never sees an escaping exception.
template <typename Fn>
void parallel_indexed(long n, Fn&& fn) {
  std::atomic<bool> failed{false};
  std::optional<Error> first;
  std::mutex m;
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      fn(k);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(m);
      if (!first) first = e;
      failed.store(true, std::memory_order_relaxed);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(m);
      if (!first) first = Error(Err::IoError, e.what());
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (first) throw *first;
}

// World placement for grid files processed without a scene: the container
// stores pixels only, and pixel-space operations ignore the placement.
GridSpec placeholder_spec(const std::string& path) {
  int w = 0, h = 0, ch = 0;
  read_grid_header(path, w, h, ch);
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.width_px = w;
  g.height_px = h;
  return g;
}

std::string loss_report_text(const LossReport& r) {
  std::string s;
  s += "seg " + textio::fmt_double(r.seg) + "\n";
  s += "dt " + textio::fmt_double(r.dt) + "\n";
  s += "align " + textio::fmt_double(r.align) + "\n";
  s += "total " + textio::fmt_double(r.total) + "\n";
  return s;
}

std::string metrics_text(const MetricsReport& r) {
  char buf[96];
  std::string s;
  std::snprintf(buf, sizeof buf, "scenes %ld\n", r.n_scenes);
  s += buf;
  std::snprintf(buf, sizeof buf, "predictions %ld\n", r.n_pred);
  s += buf;
  std::snprintf(buf, sizeof buf, "ground_truth %ld\n", r.n_gt);
  s += buf;
  for (size_t t = 0; t < r.taus.size(); ++t) {
    std::snprintf(buf, sizeof buf, "P@%.2f %.6f\n", r.taus[t], r.precision[t]);
    s += buf;
  }
  for (size_t t = 0; t < r.taus.size(); ++t) {
    std::snprintf(buf, sizeof buf, "R@%.2f %.6f\n", r.taus[t], r.recall[t]);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "mean_iou %.6f\n", r.mean_iou);
  s += buf;
  std::snprintf(buf, sizeof buf, "angle_before5 %.6f\n", r.angle_before5);
  s += buf;
  std::snprintf(buf, sizeof buf, "angle_after5 %.6f\n", r.angle_after5);
  s += buf;
  if (r.no_predictions) s += "note no_predictions\n";
  if (r.no_ground_truth) s += "note no_ground_truth\n";
  return s;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::fwrite(text.data(), 1, text.size(), stdout);
  else
    write_file(out_path, text);
}

CandidatePolicy parse_policy(const std::string& name) {
  if (name == "full") return CandidatePolicy::kFull;
  if (name == "no_offsets") return CandidatePolicy::kNoOffsets;
  if (name == "no_centerline") return CandidatePolicy::kNoCenterline;
  return CandidatePolicy::kPerpendicularOnly;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"crosswalk drawing by structured energy maximization"};
  app.require_subcommand(1);

  // Shared option storage; each subcommand binds the subset it uses.
  uint64_t seed = 0;
  long count = 1;
  int jobs = 0;
  std::string config_path, corruption_path, out_path, in_path;
  std::string scene_path, grid_path, pred_path, gt_path, grids_path, preds_path;
  std::string channel = "seg", policy_name = "full", suite = "table2";
  double lambda_i = 0.0, scale = 0.0;
  bool do_calibrate = false;
  std::vector<double> lambdas;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--jobs", jobs, "worker threads (0 = library default)");
    sub->add_option("--config", config_path, "config file (json)");
  };

  CLI::App* c_gen = app.add_subcommand("gen", "generate synthetic scenes");
  c_gen->add_option("--seed", seed, "master seed");
  c_gen->add_option("--count,--scenes", count, "number of scenes")->check(CLI::PositiveNumber);
  c_gen->add_option("--out", out_path, "output directory")->required();
  add_common(c_gen);

  CLI::App* c_render = app.add_subcommand("render", "render oracle feature maps");
  c_render->add_option("--scene", scene_path, "single scene file");
  c_render->add_option("--in", in_path, "directory of scene_*.json");
  c_render->add_option("--out", out_path, "output grid file or directory")->required();
  add_common(c_render);

  CLI::App* c_corrupt = app.add_subcommand("corrupt", "degrade feature maps");
  c_corrupt->add_option("--seed", seed, "corruption seed");
  c_corrupt->add_option("--in", in_path, "grid file or directory of scene_*.grid")->required();
  c_corrupt->add_option("--out", out_path, "output grid file or directory")->required();
  c_corrupt->add_option("--corruption", corruption_path, "corruption config (json)");
  add_common(c_corrupt);

  CLI::App* c_infer = app.add_subcommand("infer", "draw crosswalks from feature maps");
  c_infer->add_option("--scene", scene_path, "single scene file");
  c_infer->add_option("--grid", grid_path, "grid file for --scene");
  c_infer->add_option("--in", in_path, "directory of scene_*.json");
  c_infer->add_option("--grids", grids_path, "directory of scene_*.grid (default --in)");
  c_infer->add_option("--out", out_path, "predictions file or directory")->required();
  auto* infer_lam = c_infer->add_option("--lambda-i", lambda_i, "energy mixing weight");
  c_infer->add_option("--policy", policy_name, "candidate angle policy")
      ->check(CLI::IsMember({"full", "no_offsets", "no_centerline", "perpendicular_only"}));
  add_common(c_infer);

  CLI::App* c_loss = app.add_subcommand("loss", "compare predicted and ground-truth maps");
  c_loss->add_option("--pred", pred_path, "predicted grid file")->required();
  c_loss->add_option("--gt", gt_path, "ground-truth grid file")->required();
  c_loss->add_option("--out", out_path, "report file (default stdout)");
  add_common(c_loss);

  CLI::App* c_eval = app.add_subcommand("eval", "score predictions against ground truth");
  c_eval->add_option("--in", in_path, "directory of scene_*.json")->required();
  c_eval->add_option("--preds", preds_path, "directory of preds_*.json (default --in)");
  c_eval->add_option("--out", out_path, "report file (default stdout)");
  add_common(c_eval);

  CLI::App* c_ablate = app.add_subcommand("ablate", "run ablation or calibration sweeps");
  c_ablate->add_option("--seed", seed, "master seed");
  c_ablate->add_option("--scenes,--count", count, "scenes per row")->check(CLI::PositiveNumber);
  c_ablate->add_option("--suite", suite, "ablation suite")->check(CLI::IsMember({"table2"}));
  c_ablate->add_flag("--calibrate-lambda", do_calibrate, "grid-search lambda_i instead");
  c_ablate->add_option("--lambdas", lambdas, "calibration grid")->delimiter(',');
  c_ablate->add_option("--corruption", corruption_path, "corruption config (json)");
  auto* ablate_lam = c_ablate->add_option("--lambda-i", lambda_i, "energy mixing weight");
  c_ablate->add_option("--out", out_path, "report file (default stdout)");
  add_common(c_ablate);

  CLI::App* c_pgm = app.add_subcommand("export-pgm", "export one channel as a graymap");
  c_pgm->add_option("--in", in_path, "grid file")->required();
  c_pgm->add_option("--channel", channel, "channel name")
      ->check(CLI::IsMember({"seg", "dt", "angle_x", "angle_y", "angle_mask"}));
  c_pgm->add_option("--out", out_path, "output .pgm")->required();
  auto* pgm_scale = c_pgm->add_option("--scale", scale, "value mapped to white (default by channel)");

  try {
    app.parse(argc, argv);

#if defined(_OPENMP)
    if (jobs > 0) omp_set_num_threads(jobs);
#endif

    RunConfig rc;
    if (!config_path.empty()) load_config_file(config_path, rc);
    if (!corruption_path.empty()) load_corruption_file(corruption_path, rc.cor);

    if (c_gen->parsed()) {
      if (c_gen->count("--seed")) rc.gen.seed = seed;
      repro_line(rc.gen.seed, rc);
      fs::create_directories(out_path);
      const GeneratorConfig gcfg = rc.gen;
      parallel_indexed(count, [&](long i) {
        Scene scene = generate_scene(gcfg, uint64_t(i));
        save_scene(scene, (fs::path(out_path) / ("scene_" + pad4(uint64_t(i)) + ".json")).string());
      });
    } else if (c_render->parsed()) {
      repro_line(0, rc);
      if (!scene_path.empty()) {
        Scene scene = load_scene(scene_path);
        write_grids(out_path, render_oracle(scene));
      } else if (!in_path.empty()) {
        auto files = list_indexed(in_path, "scene_", ".json");
        fs::create_directories(out_path);
        parallel_indexed(long(files.size()), [&](long k) {
          Scene scene = load_scene(files[k].path.string());
          write_grids((fs::path(out_path) / ("scene_" + files[k].digits + ".grid")).string(),
                      render_oracle(scene));
        });
      } else {
        fail(Err::IoError, "render needs --scene or --in");
      }
    } else if (c_corrupt->parsed()) {
      if (c_corrupt->count("--seed")) rc.cor.seed = seed;
      repro_line(rc.cor.seed, rc);
      if (fs::is_directory(in_path)) {
        auto files = list_indexed(in_path, "scene_", ".grid");
        fs::create_directories(out_path);
        const CorruptionConfig base = rc.cor;
        parallel_indexed(long(files.size()), [&](long k) {
          FeatureMaps maps = read_grids(files[k].path.string(),
                                        placeholder_spec(files[k].path.string()));
          CorruptionConfig cc = base;
          cc.seed = derive_stream(base.seed, files[k].index);
          write_grids((fs::path(out_path) / ("scene_" + files[k].digits + ".grid")).string(),
                      corrupt(maps, cc));
        });
      } else {
        FeatureMaps maps = read_grids(in_path, placeholder_spec(in_path));
        write_grids(out_path, corrupt(maps, rc.cor));
      }
    } else if (c_infer->parsed()) {
      if (*infer_lam) rc.energy.lambda_i = lambda_i;
      const CandidatePolicy policy = parse_policy(policy_name);
      repro_line(0, rc);
      const EnergyConfig ecfg = rc.energy;
      if (!scene_path.empty()) {
        if (grid_path.empty()) fail(Err::IoError, "infer --scene needs --grid");
        Scene scene = load_scene(scene_path);
        FeatureMaps maps = read_grids(grid_path, scene.grid);
        save_predictions(infer_scene(scene, maps, ecfg, policy), out_path);
      } else if (!in_path.empty()) {
        fs::path gdir = grids_path.empty() ? fs::path(in_path) : fs::path(grids_path);
        auto files = list_indexed(in_path, "scene_", ".json");
        fs::create_directories(out_path);
        parallel_indexed(long(files.size()), [&](long k) {
          Scene scene = load_scene(files[k].path.string());
          FeatureMaps maps =
              read_grids((gdir / ("scene_" + files[k].digits + ".grid")).string(), scene.grid);
          save_predictions(infer_scene(scene, maps, ecfg, policy),
                           (fs::path(out_path) / ("preds_" + files[k].digits + ".json")).string());
        });
      } else {
        fail(Err::IoError, "infer needs --scene or --in");
      }
    } else if (c_loss->parsed()) {
      repro_line(0, rc);
      FeatureMaps pred = read_grids(pred_path, placeholder_spec(pred_path));
      FeatureMaps gt = read_grids(gt_path, placeholder_spec(gt_path));
      emit(out_path, loss_report_text(total_loss(pred, gt, rc.loss)));
    } else if (c_eval->parsed()) {
      repro_line(0, rc);
      fs::path pdir = preds_path.empty() ? fs::path(in_path) : fs::path(preds_path);
      auto files = list_indexed(in_path, "scene_", ".json");
      std::vector<SceneScore> scores(files.size());
      parallel_indexed(long(files.size()), [&](long k) {
        Scene scene = load_scene(files[k].path.string());
        auto preds =
            load_predictions((pdir / ("preds_" + files[k].digits + ".json")).string());
        scores[size_t(k)] = score_scene(preds, scene);
      });
      emit(out_path, metrics_text(aggregate_metrics(scores)));
    } else if (c_ablate->parsed()) {
      if (c_ablate->count("--seed")) rc.gen.seed = seed;
      if (*ablate_lam) rc.energy.lambda_i = lambda_i;
      repro_line(rc.gen.seed, rc);
      if (do_calibrate) {
        if (lambdas.empty())
          lambdas = {0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
        CalibrationResult cal =
            calibrate_lambda(rc.gen, rc.cor, rc.energy, uint64_t(count), lambdas);
        std::string text = "lambda\tmean_iou\n";
        for (auto [lam, iou] : cal.table) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.6g\t%.6f\n", lam, iou);
          text += buf;
        }
        text += "best\t" + textio::fmt_double(cal.best_lambda) + "\n";
        emit(out_path, text);
      } else {
        auto rows = run_ablation(table2_suite(rc.cor, rc.energy), rc.gen, uint64_t(count));
        emit(out_path, report_table(rows));
      }
    } else if (c_pgm->parsed()) {
      repro_line(0, rc);
      FeatureMaps maps = read_grids(in_path, placeholder_spec(in_path));
      const Grid* g = &maps.seg;
      double def_scale = 1.0;
      if (channel == "dt") {
        g = &maps.dt;
        def_scale = kDtThresholdPx;
      } else if (channel == "angle_x") {
        g = &maps.angle_x;
      } else if (channel == "angle_y") {
        g = &maps.angle_y;
      } else if (channel == "angle_mask") {
        g = &maps.angle_mask;
      }
      export_pgm(*g, out_path, *pgm_scale ? scale : def_scale);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", err_name(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace cwmap::cli
