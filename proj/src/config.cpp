#include "symgs/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "symgs/errors.hpp"

namespace symgs {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_value(std::string_view raw, const std::string& where) {
  const std::string_view s = trim(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    std::vector<double> out;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = parse_number(body.substr(0, comma));
      if (!item) throw ConfigError(where + ": array items must be numbers");
      out.push_back(*item);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return out;
  }
  if (const auto v = parse_number(s)) return *v;
  throw ConfigError(where + ": cannot parse value '" + std::string(s) + "'");
}

ConfigValue from_json(const nlohmann::json& j, const std::string& key) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& item : j) {
      if (!item.is_number()) throw ConfigError(key + ": array items must be numbers");
      out.push_back(item.get<double>());
    }
    return out;
  }
  throw ConfigError(key + ": unsupported value type");
}

struct Reader {
  const std::string& key;
  const ConfigValue& value;

  [[nodiscard]] double number() const {
    if (const auto* d = std::get_if<double>(&value)) return *d;
    throw ConfigError(key + " must be a number");
  }
  [[nodiscard]] double positive() const {
    const double v = number();
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive");
    return v;
  }
  template <typename T>
  [[nodiscard]] T integer() const {
    const double v = number();
    if (v < 0.0 || v != std::floor(v) || v > static_cast<double>(std::numeric_limits<T>::max())) {
      throw ConfigError(key + " must be a non-negative integer");
    }
    return static_cast<T>(v);
  }
  [[nodiscard]] bool boolean() const {
    if (const auto* b = std::get_if<bool>(&value)) return *b;
    throw ConfigError(key + " must be true or false");
  }
  [[nodiscard]] const std::string& text() const {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    throw ConfigError(key + " must be a string");
  }
  [[nodiscard]] const std::vector<double>& array() const {
    if (const auto* a = std::get_if<std::vector<double>>(&value)) return *a;
    throw ConfigError(key + " must be an array");
  }
};

}  // namespace

double DetectorConfig::resolved_gamma_res() const {
  if (gamma_res) return *gamma_res;
  return scene_scale == SceneScale::room ? 0.1 : 0.01;
}

double DetectorConfig::resolved_match_tol() const { return match_tol ? *match_tol : resolved_gamma_res(); }

GridConfig DetectorConfig::grid(double extent) const { return {alpha_res, beta_res, resolved_gamma_res(), extent}; }

void PipelineConfig::validate() const {
  clustering.validate();
  if (clustering.scale_range && !((*clustering.scale_range)[0] < (*clustering.scale_range)[1])) {
    throw ConfigError("clustering.scale_range must be increasing");
  }
  if (!(detector.alpha_res > 0.0) || !(detector.beta_res > 0.0) || !(detector.resolved_gamma_res() > 0.0)) {
    throw ConfigError("detector resolutions must be positive");
  }
  if (!(detector.resolved_match_tol() > 0.0)) throw ConfigError("detector.match_tol must be positive");
  if (!(detector.pair_epsilon >= 0.0)) throw ConfigError("detector.pair_epsilon must be non-negative");
  refiner.validate();
  if (!(compressor.min_support >= 0.0)) throw ConfigError("compressor.min_support must be non-negative");
  if (compressor.max_levels > 65535) throw ConfigError("compressor.max_levels must fit in 16 bits");
}

ConfigTable parse_toml(std::string_view text) {
  ConfigTable table;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside a section");
    table[section + "." + key] = parse_value(line.substr(eq + 1), where);
  }
  return table;
}

ConfigTable parse_json_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object of sections");
  ConfigTable table;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) throw ConfigError("JSON section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string full = section + "." + key;
      table[full] = from_json(value, full);
    }
  }
  return table;
}

ConfigTable read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return path.extension() == ".json" ? parse_json_config(text) : parse_toml(text);
}

std::pair<std::string, ConfigValue> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(text) + "' must be section.key=value");
  const std::string key(trim(text.substr(0, eq)));
  if (key.find('.') == std::string::npos) throw ConfigError("override key '" + key + "' must be section.key");
  std::string_view raw = trim(text.substr(eq + 1));
  // Bare words are accepted as strings on the command line.
  ConfigValue value;
  try {
    value = parse_value(raw, key);
  } catch (const ConfigError&) {
    value = std::string(raw);
  }
  return {key, value};
}

void apply_config(PipelineConfig& cfg, const ConfigTable& table) {
  for (const auto& [key, value] : table) {
    const Reader r{key, value};
    if (key == "clustering.bins_h") cfg.clustering.bins_h = r.integer<std::uint32_t>();
    else if (key == "clustering.bins_s") cfg.clustering.bins_s = r.integer<std::uint32_t>();
    else if (key == "clustering.bins_v") cfg.clustering.bins_v = r.integer<std::uint32_t>();
    else if (key == "clustering.bins_opacity") cfg.clustering.bins_opacity = r.integer<std::uint32_t>();
    else if (key == "clustering.bins_scale") cfg.clustering.bins_scale = r.integer<std::uint32_t>();
    else if (key == "clustering.scale_range") {
      const auto& a = r.array();
      if (a.size() != 2) throw ConfigError(key + " must have two entries");
      cfg.clustering.scale_range = std::array<double, 2>{a[0], a[1]};
    } else if (key == "detector.alpha_res") cfg.detector.alpha_res = r.positive();
    else if (key == "detector.beta_res") cfg.detector.beta_res = r.positive();
    else if (key == "detector.gamma_res") cfg.detector.gamma_res = r.positive();
    else if (key == "detector.scene_scale") {
      const auto& s = r.text();
      if (s == "object") cfg.detector.scene_scale = SceneScale::object;
      else if (s == "room") cfg.detector.scene_scale = SceneScale::room;
      else throw ConfigError(key + " must be \"object\" or \"room\"");
    } else if (key == "detector.smoothing") cfg.detector.smoothing = r.boolean();
    else if (key == "detector.match_tol") cfg.detector.match_tol = r.positive();
    else if (key == "detector.pair_cap") cfg.detector.pair_cap = r.integer<std::uint64_t>();
    else if (key == "detector.pair_epsilon") cfg.detector.pair_epsilon = r.number();
    else if (key == "detector.max_grid_mb") cfg.detector.max_grid_mb = r.integer<std::uint64_t>();
    else if (key == "detector.vote_strategy") {
      const auto& s = r.text();
      if (s == "auto") cfg.detector.vote_strategy = VoteStrategy::automatic;
      else if (s == "sharded") cfg.detector.vote_strategy = VoteStrategy::sharded;
      else if (s == "atomic") cfg.detector.vote_strategy = VoteStrategy::atomic;
      else throw ConfigError(key + " must be \"auto\", \"sharded\" or \"atomic\"");
    } else if (key == "refiner.step_size") cfg.refiner.step_size = r.positive();
    else if (key == "refiner.max_iters") cfg.refiner.max_iters = r.integer<int>();
    else if (key == "refiner.tol") cfg.refiner.tol = r.number();
    else if (key == "refiner.objective") {
      const auto& s = r.text();
      if (s == "one-sided-chamfer") cfg.refiner.objective = RefineObjective::one_sided_chamfer;
      else if (s == "trimmed-chamfer") cfg.refiner.objective = RefineObjective::trimmed_chamfer;
      else throw ConfigError(key + " must be \"one-sided-chamfer\" or \"trimmed-chamfer\"");
    } else if (key == "refiner.trim_fraction") cfg.refiner.trim_fraction = r.number();
    else if (key == "compressor.min_support") cfg.compressor.min_support = r.number();
    else if (key == "compressor.max_levels") cfg.compressor.max_levels = r.integer<std::uint32_t>();
    else if (key == "compressor.refine") cfg.compressor.refine = r.boolean();
    else if (key == "compressor.rotations") {
      const auto& s = r.text();
      if (s == "householder") cfg.compressor.rotations = RotationMode::householder;
      else if (s == "copy") cfg.compressor.rotations = RotationMode::copy;
      else throw ConfigError(key + " must be \"householder\" or \"copy\"");
    } else if (key == "run.seed") cfg.seed = r.integer<std::uint64_t>();
    else if (key == "run.threads") cfg.threads = r.integer<unsigned>();
    else throw ConfigError("unknown config key '" + key + "'");
  }
  cfg.validate();
}

PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig cfg;
  apply_config(cfg, read_config_file(path));
  return cfg;
}

std::string_view to_string(RefineObjective o) {
  return o == RefineObjective::trimmed_chamfer ? "trimmed-chamfer" : "one-sided-chamfer";
}

std::string_view to_string(RotationMode m) { return m == RotationMode::copy ? "copy" : "householder"; }

std::string_view to_string(VoteStrategy s) {
  switch (s) {
    case VoteStrategy::sharded:
      return "sharded";
    case VoteStrategy::atomic:
      return "atomic";
    case VoteStrategy::automatic:
      break;
  }
  return "auto";
}

}  // namespace symgs
