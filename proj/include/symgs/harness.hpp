#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "symgs/config.hpp"
#include "symgs/mirror.hpp"
#include "symgs/scene.hpp"

namespace symgs {

struct DetectionReport {
  bool detected = false;
  MirrorPlane raw;      // accumulator peak
  MirrorPlane refined;  // after refinement
  std::size_t gt_index = 0;
  double raw_angular_error = 0.0;
  double raw_offset_error = 0.0;
  double angular_error = 0.0;  // refined
  double offset_error = 0.0;   // refined
  std::uint64_t votes = 0;
  std::size_t levels_found = 0;
};

/// One detection step (raw and refined) against the closest ground-truth
/// plane, plus the number of levels a full compression finds.
DetectionReport eval_detection(const GaussianScene& scene, std::span<const MirrorPlane> gt, const PipelineConfig& cfg);

struct SweepRow {
  double gamma_res = 0.0;
  double angular_error = 0.0;  // before refinement
  double offset_error = 0.0;   // before refinement
  std::uint64_t votes = 0;
  std::size_t levels = 0;
  std::uint64_t compressed_bytes = 0;
  double rcf = 0.0;
  bool detected = false;
};

std::vector<SweepRow> sweep_gamma_res(const GaussianScene& scene, std::span<const MirrorPlane> gt,
                                      std::span<const double> values, const PipelineConfig& cfg);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace symgs
