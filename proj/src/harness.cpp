#include "symgs/harness.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "symgs/codec.hpp"
#include "symgs/compressor.hpp"

namespace symgs {

namespace {

std::size_t closest_gt(const MirrorPlane& m, std::span<const MirrorPlane> gt, double extent) {
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double score = angular_error(m, gt[i]) + offset_error(m, gt[i]) / extent;
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

std::vector<std::uint32_t> all_indices(std::size_t n) {
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

DetectionReport evaluate(const GaussianScene& scene, std::span<const MirrorPlane> gt, const PipelineConfig& cfg,
                         CompressResult& full) {
  if (gt.empty()) throw std::invalid_argument("evaluation needs at least one ground-truth plane");
  full = compress(scene, cfg);
  DetectionReport rep;
  rep.levels_found = full.container.levels.size();
  PipelineConfig refined_cfg = cfg;
  refined_cfg.compressor.refine = true;
  const auto step = compress_step(scene, all_indices(scene.size()), refined_cfg);
  if (!step) return rep;

  const double extent = scene.extent > 0.0 ? scene.extent : 1.0;
  rep.detected = true;
  rep.raw = step->raw_mirror;
  rep.refined = step->partition.mirror;
  rep.votes = step->peak_votes;
  rep.gt_index = closest_gt(rep.raw, gt, extent);
  const MirrorPlane& truth = gt[rep.gt_index];
  rep.raw_angular_error = angular_error(rep.raw, truth);
  rep.raw_offset_error = offset_error(rep.raw, truth);
  rep.angular_error = angular_error(rep.refined, truth);
  rep.offset_error = offset_error(rep.refined, truth);
  return rep;
}

}  // namespace

DetectionReport eval_detection(const GaussianScene& scene, std::span<const MirrorPlane> gt, const PipelineConfig& cfg) {
  CompressResult full;
  return evaluate(scene, gt, cfg, full);
}

std::vector<SweepRow> sweep_gamma_res(const GaussianScene& scene, std::span<const MirrorPlane> gt,
                                      std::span<const double> values, const PipelineConfig& cfg) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("gamma_res values must be positive");
    if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("gamma_res values must be ascending");
  }
  const double original = static_cast<double>(ply_byte_size(scene));
  std::vector<SweepRow> rows;
  for (const double v : values) {
    PipelineConfig c = cfg;
    c.detector.gamma_res = v;
    if (!cfg.detector.match_tol) c.detector.match_tol = v;
    SweepRow row;
    row.gamma_res = v;
    CompressResult cr;
    const DetectionReport rep = evaluate(scene, gt, c, cr);
    row.detected = rep.detected;
    row.angular_error = rep.detected ? rep.raw_angular_error : std::numeric_limits<double>::quiet_NaN();
    row.offset_error = rep.detected ? rep.raw_offset_error : std::numeric_limits<double>::quiet_NaN();
    row.votes = rep.votes;
    row.levels = cr.container.levels.size();
    row.compressed_bytes = encoded_size(cr.container);
    row.rcf = rcf(original, static_cast<double>(row.compressed_bytes));
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "gamma_res,angular_error_rad,offset_error,votes,levels,compressed_bytes,rcf\n";
  const auto old_precision = out.precision(10);
  for (const auto& r : rows) {
    out << r.gamma_res << ',' << r.angular_error << ',' << r.offset_error << ',' << r.votes << ',' << r.levels << ','
        << r.compressed_bytes << ',' << r.rcf << '\n';
  }
  out.precision(old_precision);
}

}  // namespace symgs
