#include "symgs/compressor.hpp"

#include <algorithm>
#include <cstring>
#include <iterator>
#include <stdexcept>

#include "symgs/clustering.hpp"
#include "symgs/parallel.hpp"

namespace symgs {

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_vec(const Vec3& a, const Vec3& b) {
  return same_bits(a.x(), b.x()) && same_bits(a.y(), b.y()) && same_bits(a.z(), b.z());
}

bool same_mirror(const MirrorPlane& a, const MirrorPlane& b) {
  return same_bits(a.alpha, b.alpha) && same_bits(a.beta, b.beta) && same_bits(a.gamma, b.gamma);
}

bool same_list(const std::vector<Gaussian>& a, const std::vector<Gaussian>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bit_equal(a[i], b[i])) return false;
  }
  return true;
}

std::vector<Gaussian> gather(const GaussianScene& scene, std::span<const std::uint32_t> idx) {
  std::vector<Gaussian> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(scene.gaussians[i]);
  return out;
}

}  // namespace

std::size_t CompressedScene::represented_gaussians() const {
  std::size_t n = last_out.size() + (levels.empty() ? 0 : 2 * last_left.size());
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) n += levels[l].retained_positions.size();
  return n;
}

bool identical(const CompressedScene& a, const CompressedScene& b) {
  if (a.levels.size() != b.levels.size()) return false;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    const auto& la = a.levels[l];
    const auto& lb = b.levels[l];
    if (!same_mirror(la.mirror, lb.mirror) || la.retained_positions.size() != lb.retained_positions.size()) {
      return false;
    }
    for (std::size_t i = 0; i < la.retained_positions.size(); ++i) {
      if (!same_vec(la.retained_positions[i], lb.retained_positions[i])) return false;
    }
  }
  return same_list(a.last_left, b.last_left) && same_list(a.last_out, b.last_out) &&
         same_vec(a.centroid_offset, b.centroid_offset) && same_bits(a.extent, b.extent) &&
         a.reflect_rotations == b.reflect_rotations && same_bits(a.match_tol, b.match_tol);
}

GaussianScene quantize_for_storage(const GaussianScene& scene) {
  GaussianScene out = scene;
  for (auto& g : out.gaussians) {
    g.position = g.position.cast<float>().cast<double>();
    g.rotation.coeffs() = g.rotation.coeffs().cast<float>().cast<double>().eval();
  }
  return out;
}

std::optional<StepResult> compress_step(const GaussianScene& scene, std::span<const std::uint32_t> workset,
                                        const PipelineConfig& cfg) {
  if (workset.size() < 2 || !(scene.extent > 0.0)) return std::nullopt;

  const GridConfig grid = cfg.detector.grid(scene.extent);
  VoteOptions vote;
  vote.seed = cfg.seed;
  vote.threads = cfg.threads;
  vote.pair_cap = cfg.detector.pair_cap;
  vote.min_separation = cfg.detector.pair_epsilon * scene.extent;
  vote.strategy = cfg.detector.vote_strategy;
  vote.max_grid_bytes = cfg.detector.max_grid_mb << 20;

  const ClusterMap clusters = build_clusters(scene, cfg.clustering, workset, resolve_threads(cfg.threads));
  const std::vector<Vec3> positions = scene.positions();
  const VoteResult votes = accumulate_votes(positions, clusters, grid, vote);
  const auto peak = argmax_mirror(votes.grid, grid, cfg.detector.smoothing);
  if (!peak) return std::nullopt;

  const Participants parts =
      find_participants(positions, clusters, peak->region, grid, vote, cfg.detector.smoothing);

  StepResult step;
  step.raw_mirror = peak->mirror;
  step.peak_votes = peak->votes;
  step.stats = votes.stats;

  MirrorPlane mirror = peak->mirror;
  if (cfg.compressor.refine) {
    std::vector<Vec3> left, right;
    for (const auto i : parts.indices) {
      const double sd = mirror.signed_distance(positions[i]);
      if (sd > 0.0) left.push_back(positions[i]);
      else if (sd < 0.0) right.push_back(positions[i]);
    }
    if (!left.empty() && !right.empty()) {
      RefineOptions ropts = cfg.refiner;
      if (!(ropts.scale > 0.0)) ropts.scale = scene.extent;
      step.refine = refine_mirror(left, right, mirror, ropts);
      mirror = step.refine->mirror;
    }
  }

  step.partition = match_bijection(positions, workset, parts.indices, mirror, cfg.detector.resolved_match_tol());
  if (step.partition.left.empty()) return std::nullopt;
  step.partition.votes = peak->votes;
  return step;
}

CompressResult compress(const GaussianScene& input, const PipelineConfig& cfg) {
  cfg.validate();
  if (input.empty()) throw std::invalid_argument("cannot compress an empty scene");

  const GaussianScene scene = quantize_for_storage(input);
  CompressResult result;
  CompressedScene& cs = result.container;
  cs.centroid_offset = scene.centroid_offset;
  cs.extent = scene.extent;
  cs.reflect_rotations = cfg.compressor.rotations == RotationMode::householder;
  cs.match_tol = cfg.detector.resolved_match_tol();

  std::vector<std::uint32_t> workset(scene.size());
  for (std::uint32_t i = 0; i < workset.size(); ++i) workset[i] = i;
  std::vector<std::uint32_t> last_left;

  for (;;) {
    if (cs.levels.size() >= cfg.compressor.max_levels) {
      result.stop = StopReason::max_levels;
      break;
    }
    if (workset.size() < 2) {
      result.stop = StopReason::small_workset;
      break;
    }
    auto step = compress_step(scene, workset, cfg);
    if (!step) {
      result.stop = StopReason::no_symmetry;
      break;
    }
    if (static_cast<double>(step->peak_votes) < cfg.compressor.min_support * static_cast<double>(workset.size())) {
      result.stop = StopReason::low_support;
      break;
    }
    const PartitionResult& p = step->partition;
    CompressionLevel level;
    level.mirror = p.mirror;
    level.retained_positions.reserve(p.left.size());
    for (const auto i : p.left) level.retained_positions.push_back(scene.gaussians[i].position);
    cs.levels.push_back(std::move(level));

    LevelReport rep;
    rep.mirror = p.mirror;
    rep.raw_mirror = step->raw_mirror;
    rep.votes = step->peak_votes;
    rep.workset = workset.size();
    rep.left = p.left.size();
    rep.right = p.right.size();
    rep.out = p.out.size();
    rep.stats = step->stats;
    if (step->refine) {
      rep.refine_initial_cost = step->refine->initial_cost;
      rep.refine_final_cost = step->refine->final_cost;
    }
    result.levels.push_back(rep);

    last_left = p.left;
    workset.clear();
    std::merge(p.left.begin(), p.left.end(), p.out.begin(), p.out.end(), std::back_inserter(workset));
  }

  if (cs.levels.empty()) {
    cs.last_out = scene.gaussians;
  } else {
    // The final workset is left + out of the innermost level.
    std::vector<std::uint32_t> out;
    std::set_difference(workset.begin(), workset.end(), last_left.begin(), last_left.end(), std::back_inserter(out));
    cs.last_left = gather(scene, last_left);
    cs.last_out = gather(scene, out);
  }
  return result;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::low_support:
      return "low-support";
    case StopReason::max_levels:
      return "max-levels";
    case StopReason::small_workset:
      return "small-workset";
    case StopReason::no_symmetry:
      break;
  }
  return "no-symmetry";
}

}  // namespace symgs
