#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "symgs/config.hpp"
#include "symgs/detector.hpp"
#include "symgs/refiner.hpp"
#include "symgs/scene.hpp"

namespace symgs {

struct CompressionLevel {
  MirrorPlane mirror;
  std::vector<Vec3> retained_positions;  // float-representable
};

/// Hierarchical container. levels[0] is the outermost mirror; last_left and
/// last_out hold full attributes for the innermost level.
struct CompressedScene {
  std::vector<CompressionLevel> levels;
  std::vector<Gaussian> last_left;
  std::vector<Gaussian> last_out;
  Vec3 centroid_offset = Vec3::Zero();
  double extent = 0.0;
  bool reflect_rotations = true;
  double match_tol = 0.01;

  [[nodiscard]] std::size_t stored_gaussians() const { return last_left.size() + last_out.size(); }
  [[nodiscard]] std::size_t represented_gaussians() const;
};

/// Bitwise equality of every field.
bool identical(const CompressedScene& a, const CompressedScene& b);

struct StepResult {
  PartitionResult partition;  // against the final mirror
  MirrorPlane raw_mirror;     // accumulator voxel centre
  std::uint64_t peak_votes = 0;
  VoteStats stats;
  std::optional<RefineResult> refine;
};

/// One detection round on `workset`: cluster, vote, argmax, refine, partition.
/// nullopt when there is no peak or no matched pair survives.
std::optional<StepResult> compress_step(const GaussianScene& scene, std::span<const std::uint32_t> workset,
                                        const PipelineConfig& cfg);

struct LevelReport {
  MirrorPlane mirror;
  MirrorPlane raw_mirror;
  std::uint64_t votes = 0;
  std::size_t workset = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t out = 0;
  VoteStats stats;
  double refine_initial_cost = 0.0;
  double refine_final_cost = 0.0;
};

enum class StopReason { no_symmetry, low_support, max_levels, small_workset };

struct CompressResult {
  CompressedScene container;
  std::vector<LevelReport> levels;
  StopReason stop = StopReason::no_symmetry;
};

/// Rounds positions and rotation components to float, the precision the
/// container stores.
GaussianScene quantize_for_storage(const GaussianScene& scene);

/// Peels mirrors until a stop rule fires; each next round works on left + out.
CompressResult compress(const GaussianScene& scene, const PipelineConfig& cfg);

std::string_view to_string(StopReason r);

}  // namespace symgs
