#include "symgs/scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "symgs/errors.hpp"

namespace symgs {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

Vec3 Gaussian::scale() const {
  return {std::exp(static_cast<double>(log_scale[0])), std::exp(static_cast<double>(log_scale[1])),
          std::exp(static_cast<double>(log_scale[2]))};
}

double Gaussian::opacity() const { return logistic(opacity_logit); }

Mat3 Gaussian::covariance() const {
  const Mat3 r = rotation.normalized().toRotationMatrix();
  const Vec3 s = scale();
  return r * s.cwiseAbs2().asDiagonal() * r.transpose();
}

namespace {

template <typename T>
bool same_bits(T a, T b) {
  return std::memcmp(&a, &b, sizeof(T)) == 0;
}

}  // namespace

bool bit_equal(const Gaussian& a, const Gaussian& b) {
  for (int k = 0; k < 3; ++k) {
    if (!same_bits(a.position[k], b.position[k]) || !same_bits(a.log_scale[k], b.log_scale[k]) ||
        !same_bits(a.color_dc[k], b.color_dc[k])) {
      return false;
    }
  }
  const auto& qa = a.rotation.coeffs();
  const auto& qb = b.rotation.coeffs();
  for (int k = 0; k < 4; ++k) {
    if (!same_bits(qa[k], qb[k])) return false;
  }
  if (!same_bits(a.opacity_logit, b.opacity_logit) || a.sh_rest.size() != b.sh_rest.size()) return false;
  for (std::size_t k = 0; k < a.sh_rest.size(); ++k) {
    if (!same_bits(a.sh_rest[k], b.sh_rest[k])) return false;
  }
  return true;
}

Quat normalized_f32(const Quat& q) {
  float w = static_cast<float>(q.w());
  float x = static_cast<float>(q.x());
  float y = static_cast<float>(q.y());
  float z = static_cast<float>(q.z());
  const float n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.f) || !std::isfinite(n)) {
    throw DataError("cannot normalize a zero or non-finite quaternion");
  }
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  return Quat(w, x, y, z);
}

std::vector<Vec3> GaussianScene::positions() const {
  std::vector<Vec3> out;
  out.reserve(gaussians.size());
  for (const auto& g : gaussians) out.push_back(g.position);
  return out;
}

namespace {

double max_radius(const std::vector<Gaussian>& gaussians) {
  double r = 0.0;
  for (const auto& g : gaussians) r = std::max(r, g.position.norm());
  return r;
}

}  // namespace

GaussianScene make_scene(std::vector<Gaussian> gaussians, const Vec3& prior_offset) {
  GaussianScene scene;
  Vec3 centroid = Vec3::Zero();
  if (!gaussians.empty()) {
    for (const auto& g : gaussians) centroid += g.position;
    centroid /= static_cast<double>(gaussians.size());
    for (auto& g : gaussians) g.position -= centroid;
  }
  scene.centroid_offset = prior_offset + centroid;
  scene.extent = max_radius(gaussians);
  scene.gaussians = std::move(gaussians);
  return scene;
}

GaussianScene make_scene_in_frame(std::vector<Gaussian> gaussians, const Vec3& centroid_offset) {
  GaussianScene scene;
  scene.centroid_offset = centroid_offset;
  scene.extent = max_radius(gaussians);
  scene.gaussians = std::move(gaussians);
  return scene;
}

// ---------------------------------------------------------------------------
// PLY

namespace {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<PlyType> parse_type(const std::string& t) {
  static const std::map<std::string, PlyType> types = {
      {"char", PlyType::i8},    {"int8", PlyType::i8},     {"uchar", PlyType::u8},
      {"uint8", PlyType::u8},   {"short", PlyType::i16},   {"int16", PlyType::i16},
      {"ushort", PlyType::u16}, {"uint16", PlyType::u16},  {"int", PlyType::i32},
      {"int32", PlyType::i32},  {"uint", PlyType::u32},    {"uint32", PlyType::u32},
      {"float", PlyType::f32},  {"float32", PlyType::f32}, {"double", PlyType::f64},
      {"float64", PlyType::f64}};
  const auto it = types.find(t);
  if (it == types.end()) return std::nullopt;
  return it->second;
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8:
      return 1;
    case PlyType::i16:
    case PlyType::u16:
      return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32:
      return 4;
    case PlyType::f64:
      return 8;
  }
  return 0;
}

template <typename T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

double read_binary(PlyType t, const unsigned char* p) {
  switch (t) {
    case PlyType::i8:
      return load_le<std::int8_t>(p);
    case PlyType::u8:
      return load_le<std::uint8_t>(p);
    case PlyType::i16:
      return load_le<std::int16_t>(p);
    case PlyType::u16:
      return load_le<std::uint16_t>(p);
    case PlyType::i32:
      return load_le<std::int32_t>(p);
    case PlyType::u32:
      return load_le<std::uint32_t>(p);
    case PlyType::f32:
      return load_le<float>(p);
    case PlyType::f64:
      return load_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  std::size_t offset;  // within a binary record
};

struct PlyHeader {
  bool binary = false;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> properties;
  std::size_t stride = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

PlyHeader parse_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply") throw ParseError("not a PLY file: missing 'ply' magic");

  PlyHeader header;
  bool have_format = false;
  bool in_vertex = false;
  bool seen_vertex = false;
  while (true) {
    if (!std::getline(in, line)) throw ParseError("unexpected end of PLY header");
    line = trim(line);
    if (line.empty() || line.rfind("comment", 0) == 0 || line.rfind("obj_info", 0) == 0) continue;
    if (line == "end_header") break;

    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        header.binary = false;
      } else if (fmt == "binary_little_endian") {
        header.binary = true;
      } else {
        throw ParseError("unsupported PLY format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (name == "vertex") {
        if (seen_vertex) throw ParseError("duplicate vertex element");
        header.vertex_count = count;
        in_vertex = true;
        seen_vertex = true;
      } else {
        if (!seen_vertex) throw ParseError("element '" + name + "' precedes the vertex element");
        in_vertex = false;
      }
    } else if (keyword == "property") {
      if (!in_vertex) continue;
      std::string type_name;
      ls >> type_name;
      if (type_name == "list") throw ParseError("list properties are not supported on vertices");
      std::string name;
      ls >> name;
      const auto type = parse_type(type_name);
      if (!type) throw ParseError("unknown property type '" + type_name + "' for '" + name + "'");
      header.properties.push_back({name, *type, header.stride});
      header.stride += type_size(*type);
    } else {
      throw ParseError("unexpected header line '" + line + "'");
    }
  }
  if (!have_format) throw ParseError("PLY header lacks a format line");
  if (!seen_vertex) throw ParseError("PLY header lacks a vertex element");
  return header;
}

struct FieldMap {
  std::array<std::size_t, 3> position;
  std::array<std::size_t, 3> scale;
  std::array<std::size_t, 4> rotation;
  std::size_t opacity;
  std::array<std::size_t, 3> color;
  std::vector<std::size_t> sh;
};

FieldMap map_fields(const PlyHeader& header) {
  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < header.properties.size(); ++i) by_name[header.properties[i].name] = i;
  const auto need = [&](const std::string& name) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("PLY header is missing required property '" + name + "'");
    return it->second;
  };
  FieldMap f{};
  f.position = {need("x"), need("y"), need("z")};
  f.scale = {need("scale_0"), need("scale_1"), need("scale_2")};
  f.rotation = {need("rot_0"), need("rot_1"), need("rot_2"), need("rot_3")};
  f.opacity = need("opacity");
  f.color = {need("f_dc_0"), need("f_dc_1"), need("f_dc_2")};
  for (std::size_t k = 0;; ++k) {
    const auto it = by_name.find("f_rest_" + std::to_string(k));
    if (it == by_name.end()) break;
    f.sh.push_back(it->second);
  }
  return f;
}

}  // namespace

GaussianScene read_ply(std::istream& in) {
  const PlyHeader header = parse_header(in);
  const FieldMap f = map_fields(header);
  const std::size_t nprop = header.properties.size();

  std::vector<Gaussian> gaussians(header.vertex_count);
  std::vector<double> values(nprop);
  std::vector<unsigned char> record(header.stride);

  for (std::size_t v = 0; v < header.vertex_count; ++v) {
    if (header.binary) {
      in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(record.size()));
      if (!in) throw ParseError("PLY body truncated at vertex " + std::to_string(v));
      for (std::size_t p = 0; p < nprop; ++p) {
        values[p] = read_binary(header.properties[p].type, record.data() + header.properties[p].offset);
      }
    } else {
      for (std::size_t p = 0; p < nprop; ++p) {
        std::string token;
        if (!(in >> token)) throw ParseError("PLY body truncated at vertex " + std::to_string(v));
        try {
          values[p] = std::stod(token);
        } catch (const std::exception&) {
          throw DataError("vertex " + std::to_string(v) + ": cannot parse '" + token + "' for property '" +
                          header.properties[p].name + "'");
        }
      }
    }
    for (std::size_t p = 0; p < nprop; ++p) {
      if (!std::isfinite(values[p])) {
        throw DataError("vertex " + std::to_string(v) + ": non-finite value in property '" +
                        header.properties[p].name + "'");
      }
    }

    Gaussian& g = gaussians[v];
    // Go through float so positions match what a float PLY stores.
    for (int k = 0; k < 3; ++k) {
      g.position[k] = static_cast<float>(values[f.position[k]]);
      g.log_scale[k] = static_cast<float>(values[f.scale[k]]);
      g.color_dc[k] = static_cast<float>(values[f.color[k]]);
    }
    g.opacity_logit = static_cast<float>(values[f.opacity]);
    const Quat raw(values[f.rotation[0]], values[f.rotation[1]], values[f.rotation[2]], values[f.rotation[3]]);
    try {
      g.rotation = normalized_f32(raw);
    } catch (const DataError&) {
      throw DataError("vertex " + std::to_string(v) + ": zero-length rotation quaternion");
    }
    g.sh_rest.resize(f.sh.size());
    for (std::size_t k = 0; k < f.sh.size(); ++k) g.sh_rest[k] = static_cast<float>(values[f.sh[k]]);
  }
  return make_scene(std::move(gaussians));
}

GaussianScene load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_ply(in);
}

namespace {

std::size_t uniform_sh_count(const GaussianScene& scene) {
  const std::size_t n = scene.gaussians.front().sh_rest.size();
  for (const auto& g : scene.gaussians) {
    if (g.sh_rest.size() != n) throw std::invalid_argument("SH payload length differs between Gaussians");
  }
  return n;
}

std::string ply_header_text(std::size_t count, std::size_t sh) {
  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\nelement vertex " << count << "\n";
  for (const char* name : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
    h << "property float " << name << "\n";
  }
  for (std::size_t k = 0; k < sh; ++k) h << "property float f_rest_" << k << "\n";
  for (const char* name : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"}) {
    h << "property float " << name << "\n";
  }
  h << "end_header\n";
  return h.str();
}

void put_f32(std::vector<unsigned char>& buf, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xffu));
}

}  // namespace

std::uint64_t ply_byte_size(const GaussianScene& scene) {
  if (scene.empty()) throw std::invalid_argument("cannot size an empty scene");
  const std::size_t sh = uniform_sh_count(scene);
  return ply_header_text(scene.size(), sh).size() + scene.size() * 4ull * (17 + sh);
}

void write_ply(const GaussianScene& scene, std::ostream& out) {
  if (scene.empty()) throw std::invalid_argument("cannot write an empty scene");
  const std::size_t sh = uniform_sh_count(scene);
  out << ply_header_text(scene.size(), sh);

  std::vector<unsigned char> buf;
  buf.reserve(4 * (17 + sh));
  for (const auto& g : scene.gaussians) {
    buf.clear();
    const Vec3 p = g.position + scene.centroid_offset;
    for (int k = 0; k < 3; ++k) put_f32(buf, static_cast<float>(p[k]));
    for (int k = 0; k < 3; ++k) put_f32(buf, 0.f);
    for (float c : g.color_dc) put_f32(buf, c);
    for (float c : g.sh_rest) put_f32(buf, c);
    put_f32(buf, g.opacity_logit);
    for (float s : g.log_scale) put_f32(buf, s);
    put_f32(buf, static_cast<float>(g.rotation.w()));
    put_f32(buf, static_cast<float>(g.rotation.x()));
    put_f32(buf, static_cast<float>(g.rotation.y()));
    put_f32(buf, static_cast<float>(g.rotation.z()));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IoError("failed while writing PLY data");
}

void save_ply(const GaussianScene& scene, const std::filesystem::path& path) {
  if (scene.empty()) throw std::invalid_argument("cannot write an empty scene");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_ply(scene, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace symgs
