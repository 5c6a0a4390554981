#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "symgs/codec.hpp"
#include "symgs/compressor.hpp"
#include "symgs/config.hpp"
#include "symgs/errors.hpp"
#include "symgs/harness.hpp"
#include "symgs/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace symgs;

constexpr int kExitNoSymmetry = 2;
constexpr int kExitReconstruction = 3;
constexpr int kExitConfig = 64;

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

PipelineConfig resolve_config(const Globals& g) {
  PipelineConfig cfg;
  ConfigTable table;
  if (!g.config_path.empty()) table = read_config_file(g.config_path);
  for (const auto& o : g.overrides) {
    auto [k, v] = parse_override(o);
    table[k] = v;
  }
  apply_config(cfg, table);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  return cfg;
}

json mirror_json(const MirrorPlane& m) { return {{"alpha", m.alpha}, {"beta", m.beta}, {"gamma", m.gamma}}; }

json stats_json(const VoteStats& s) {
  return {{"pairs_total", s.pairs_total},
          {"pairs_planned", s.pairs_planned},
          {"votes", s.votes},
          {"skipped_degenerate", s.skipped_degenerate},
          {"skipped_out_of_range", s.skipped_out_of_range}};
}

json report_json(const CompressResult& r, std::uint64_t original, std::uint64_t compressed) {
  json levels = json::array();
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    const LevelReport& rep = r.levels[l];
    json j = mirror_json(rep.mirror);
    j["level"] = l;
    j["raw"] = mirror_json(rep.raw_mirror);
    j["votes"] = rep.votes;
    j["workset"] = rep.workset;
    j["left"] = rep.left;
    j["right"] = rep.right;
    j["out"] = rep.out;
    j["grid"] = stats_json(rep.stats);
    j["refine_initial_cost"] = rep.refine_initial_cost;
    j["refine_final_cost"] = rep.refine_final_cost;
    levels.push_back(j);
  }
  return {{"levels", levels},
          {"stop", std::string(to_string(r.stop))},
          {"stored_gaussians", r.container.stored_gaussians()},
          {"represented_gaussians", r.container.represented_gaussians()},
          {"original_bytes", original},
          {"compressed_bytes", compressed},
          {"rcf", rcf(static_cast<double>(original), static_cast<double>(compressed))}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
}

std::vector<MirrorPlane> read_truth(const std::string& path, const Vec3& centroid_offset) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid truth file: ") + e.what());
  }
  std::vector<MirrorPlane> out;
  for (const auto& m : j.at("mirrors")) {
    const Vec3 n(m.at("normal").at(0).get<double>(), m.at("normal").at(1).get<double>(),
                 m.at("normal").at(2).get<double>());
    out.push_back(shift_origin(MirrorPlane::from_normal_offset(n, m.at("offset").get<double>()), centroid_offset));
  }
  if (out.empty()) throw DataError("truth file lists no mirrors");
  return out;
}

int run_compress(const Globals& g, const std::string& in, const std::string& out, const std::string& report) {
  const PipelineConfig cfg = resolve_config(g);
  const GaussianScene scene = load_ply(in);
  const CompressResult r = compress(scene, cfg);
  const std::uint64_t bytes = encode(r.container, out);
  const json j = report_json(r, ply_byte_size(scene), bytes);
  if (!report.empty()) write_text(report, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_decompress(const std::string& in, const std::string& out, double match_tol) {
  const CompressedScene cs = decode(in);
  const GaussianScene scene = reconstruct(cs, match_tol);
  save_ply(scene, out);
  std::cout << scene.size() << " Gaussians written to " << out << "\n";
  return 0;
}

int run_detect(const Globals& g, const std::string& in, bool require) {
  const PipelineConfig cfg = resolve_config(g);
  const GaussianScene scene = load_ply(in);
  const CompressResult r = compress(scene, cfg);
  json list = json::array();
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    json j = mirror_json(r.levels[l].mirror);
    j["votes"] = r.levels[l].votes;
    j["level"] = l;
    list.push_back(j);
  }
  std::cout << list.dump(2) << "\n";
  return require && list.empty() ? kExitNoSymmetry : 0;
}

int run_stats(const std::string& in) {
  const CompressedScene cs = decode(in);
  json levels = json::array();
  for (const auto& l : cs.levels) {
    json j = mirror_json(l.mirror);
    j["retained"] = l.retained_positions.size();
    levels.push_back(j);
  }
  const json j = {{"levels", levels},
                  {"last_left", cs.last_left.size()},
                  {"last_out", cs.last_out.size()},
                  {"represented_gaussians", cs.represented_gaussians()},
                  {"extent", cs.extent},
                  {"centroid_offset", {cs.centroid_offset.x(), cs.centroid_offset.y(), cs.centroid_offset.z()}},
                  {"householder_rotations", cs.reflect_rotations},
                  {"sh_floats", sh_count(cs)},
                  {"match_tol", cs.match_tol},
                  {"bytes", encoded_size(cs)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct GenArgs {
  std::size_t base = 1000;
  std::size_t mirrors = 1;
  std::vector<double> coverage;
  double noise = 0.0;
  std::string profile = "k_color";
  std::uint32_t k = 8;
  bool orthogonal = false;
  std::string out;
  std::string truth;
};

int run_gen(const Globals& g, const GenArgs& a) {
  const PipelineConfig cfg = resolve_config(g);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  SyntheticSpec spec;
  spec.base_count = a.base;
  spec.noise_sigma = a.noise;
  spec.seed = cfg.seed;
  spec.k_colors = a.k;
  if (a.profile == "uniform") spec.profile = AttributeProfile::uniform;
  else if (a.profile == "k_color") spec.profile = AttributeProfile::k_color;
  else throw ConfigError("--profile must be uniform or k_color");
  std::vector<MirrorPlane> planes;
  if (a.orthogonal) {
    planes = orthogonal_mirrors(rng, a.mirrors, spec.radius);
  } else {
    for (std::size_t i = 0; i < a.mirrors; ++i) planes.push_back(random_mirror(rng, spec.radius));
  }
  std::vector<double> coverage = a.coverage;
  if (coverage.empty()) coverage.assign(a.mirrors, 1.0 / static_cast<double>(std::max<std::size_t>(1, a.mirrors)));
  if (coverage.size() != a.mirrors) throw ConfigError("--coverage needs one value per mirror");
  for (std::size_t i = 0; i < a.mirrors; ++i) spec.mirrors.push_back({planes[i], coverage[i]});

  const SyntheticScene s = gen_synthetic(spec);
  save_ply(s.scene, a.out);
  json mirrors = json::array();
  for (std::size_t i = 0; i < s.mirrors.size(); ++i) {
    // Ground truth in the file's frame.
    const MirrorPlane m = shift_origin(s.mirrors[i], -s.scene.centroid_offset);
    const Vec3 n = m.normal();
    mirrors.push_back({{"normal", {n.x(), n.y(), n.z()}},
                       {"offset", m.gamma},
                       {"alpha", m.alpha},
                       {"beta", m.beta},
                       {"pairs", s.level_pairs[i]}});
  }
  const json j = {{"mirrors", mirrors}, {"gaussians", s.scene.size()}, {"asymmetric", s.asymmetric}, {"seed", cfg.seed}};
  if (!a.truth.empty()) write_text(a.truth, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_eval(const Globals& g, const std::string& in, const std::string& truth) {
  const PipelineConfig cfg = resolve_config(g);
  const GaussianScene scene = load_ply(in);
  const auto gt = read_truth(truth, scene.centroid_offset);
  const DetectionReport r = eval_detection(scene, gt, cfg);
  const json j = {{"detected", r.detected},
                  {"ground_truth_index", r.gt_index},
                  {"raw", mirror_json(r.raw)},
                  {"refined", mirror_json(r.refined)},
                  {"raw_angular_error", r.raw_angular_error},
                  {"raw_offset_error", r.raw_offset_error},
                  {"angular_error", r.angular_error},
                  {"offset_error", r.offset_error},
                  {"votes", r.votes},
                  {"levels_found", r.levels_found}};
  std::cout << j.dump(2) << "\n";
  return r.detected ? 0 : kExitNoSymmetry;
}

int run_sweep(const Globals& g, const std::string& in, const std::string& truth, std::vector<double> values,
              const std::string& out) {
  const PipelineConfig cfg = resolve_config(g);
  const GaussianScene scene = load_ply(in);
  const auto gt = read_truth(truth, scene.centroid_offset);
  std::sort(values.begin(), values.end());
  const auto rows = sweep_gamma_res(scene, gt, values, cfg);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  if (!out.empty()) write_text(out, csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror-symmetry compression for Gaussian splat scenes"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "TOML or JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "Config override section.key=value (repeatable)");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  std::string in, out, report, truth;
  double match_tol = 0.0;
  bool require = false;

  auto* compress_cmd = app.add_subcommand("compress", "Compress a PLY scene into a .symg container");
  compress_cmd->add_option("input", in, "Input PLY")->required();
  compress_cmd->add_option("output", out, "Output container")->required();
  compress_cmd->add_option("--report", report, "Write the JSON report here as well");

  auto* decompress_cmd = app.add_subcommand("decompress", "Reconstruct a PLY scene from a container");
  decompress_cmd->add_option("input", in, "Input container")->required();
  decompress_cmd->add_option("output", out, "Output PLY")->required();
  decompress_cmd->add_option("--match-tol", match_tol, "Override the stored matching tolerance");

  auto* detect_cmd = app.add_subcommand("detect", "Print detected mirrors as JSON");
  detect_cmd->add_option("input", in, "Input PLY")->required();
  detect_cmd->add_flag("--require", require, "Exit with status 2 when no mirror is found");

  auto* stats_cmd = app.add_subcommand("stats", "Summarize a container");
  stats_cmd->add_option("input", in, "Input container")->required();

  auto* bench = app.add_subcommand("bench", "Synthetic benchmarks");
  bench->require_subcommand(1);
  GenArgs gen;
  auto* gen_cmd = bench->add_subcommand("gen", "Generate a synthetic scene with known mirrors");
  gen_cmd->add_option("output", gen.out, "Output PLY")->required();
  gen_cmd->add_option("--truth", gen.truth, "Ground-truth JSON output");
  gen_cmd->add_option("--base", gen.base, "Base Gaussian count");
  gen_cmd->add_option("--mirrors", gen.mirrors, "Number of nested mirrors");
  gen_cmd->add_option("--coverage", gen.coverage, "Coverage fraction per mirror")->delimiter(',');
  gen_cmd->add_option("--noise", gen.noise, "Jitter sigma on reflected positions");
  gen_cmd->add_option("--profile", gen.profile, "uniform or k_color");
  gen_cmd->add_option("--colors", gen.k, "Palette size for k_color");
  gen_cmd->add_flag("--orthogonal", gen.orthogonal, "Use mutually orthogonal mirrors");

  auto* eval_cmd = bench->add_subcommand("eval", "Detection error against ground truth");
  eval_cmd->add_option("input", in, "Input PLY")->required();
  eval_cmd->add_option("truth", truth, "Ground-truth JSON")->required();

  std::vector<double> values{0.01, 0.05, 0.1, 0.5, 1.0};
  auto* sweep_cmd = bench->add_subcommand("sweep", "gamma_res sweep as CSV");
  sweep_cmd->add_option("input", in, "Input PLY")->required();
  sweep_cmd->add_option("truth", truth, "Ground-truth JSON")->required();
  sweep_cmd->add_option("--values", values, "gamma_res values")->delimiter(',');
  sweep_cmd->add_option("--out", out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*compress_cmd) return run_compress(g, in, out, report);
    if (*decompress_cmd) return run_decompress(in, out, match_tol);
    if (*detect_cmd) return run_detect(g, in, require);
    if (*stats_cmd) return run_stats(in);
    if (*gen_cmd) return run_gen(g, gen);
    if (*eval_cmd) return run_eval(g, in, truth);
    if (*sweep_cmd) return run_sweep(g, in, truth, values, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ReconstructionError& e) {
    std::cerr << "reconstruction failed: " << e.what() << "\n";
    return kExitReconstruction;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
