#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "symgs/clustering.hpp"
#include "symgs/detector.hpp"
#include "symgs/reflection.hpp"
#include "symgs/refiner.hpp"

namespace symgs {

enum class SceneScale { object, room };

struct DetectorConfig {
  double alpha_res = 0.01;
  double beta_res = 0.01;
  std::optional<double> gamma_res;  // unset: 0.01 for object scenes, 0.1 for room scenes
  SceneScale scene_scale = SceneScale::object;
  bool smoothing = false;
  std::optional<double> match_tol;  // unset: gamma_res
  std::uint64_t pair_cap = 2'000'000;
  double pair_epsilon = 1e-6;  // relative to extent
  std::uint64_t max_grid_mb = 2048;
  VoteStrategy vote_strategy = VoteStrategy::automatic;

  [[nodiscard]] double resolved_gamma_res() const;
  [[nodiscard]] double resolved_match_tol() const;
  [[nodiscard]] GridConfig grid(double extent) const;
};

struct CompressorConfig {
  double min_support = 0.05;
  std::uint32_t max_levels = 8;
  bool refine = true;
  RotationMode rotations = RotationMode::householder;
};

struct PipelineConfig {
  ClusterConfig clustering;
  DetectorConfig detector;
  RefineOptions refiner;
  CompressorConfig compressor;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

using ConfigValue = std::variant<bool, double, std::string, std::vector<double>>;

/// Flat "section.key" -> value table.
using ConfigTable = std::map<std::string, ConfigValue>;

/// [section] headers, key = value lines, # comments. Values: numbers, true/false,
/// "strings", and [number, ...] arrays.
ConfigTable parse_toml(std::string_view text);
/// An object of section objects.
ConfigTable parse_json_config(std::string_view text);
/// Chooses the format by extension (.json, otherwise TOML).
ConfigTable read_config_file(const std::filesystem::path& path);

/// Parses one "section.key=value" override.
std::pair<std::string, ConfigValue> parse_override(std::string_view text);

/// Applies the table on top of `cfg`; unknown keys or wrong types throw ConfigError.
void apply_config(PipelineConfig& cfg, const ConfigTable& table);

PipelineConfig load_config(const std::filesystem::path& path);

std::string_view to_string(RefineObjective o);
std::string_view to_string(RotationMode m);
std::string_view to_string(VoteStrategy s);

}  // namespace symgs
