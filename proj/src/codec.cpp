#include "symgs/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "symgs/errors.hpp"
#include "symgs/kdtree.hpp"
#include "symgs/reflection.hpp"

namespace symgs {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'Y', 'M', 'G'};

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_f32(double v) { put(static_cast<float>(v)); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw DecodeError(std::string("truncated container while reading ") + what, bytes_.size());
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  double get_f32(const char* what) { return static_cast<double>(get<float>(what)); }
  void need(std::uint64_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw DecodeError(std::string("truncated container in ") + what, bytes_.size());
    }
  }

  [[nodiscard]] std::size_t pos() const { return pos_; }
  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_gaussian(Writer& w, const Gaussian& g) {
  for (int k = 0; k < 3; ++k) w.put_f32(g.position[k]);
  for (const float s : g.log_scale) w.put(s);
  w.put_f32(g.rotation.w());
  w.put_f32(g.rotation.x());
  w.put_f32(g.rotation.y());
  w.put_f32(g.rotation.z());
  w.put(g.opacity_logit);
  for (const float c : g.color_dc) w.put(c);
  for (const float c : g.sh_rest) w.put(c);
}

Gaussian get_gaussian(Reader& r, std::size_t sh) {
  Gaussian g;
  for (int k = 0; k < 3; ++k) g.position[k] = r.get_f32("position");
  for (auto& s : g.log_scale) s = r.get<float>("scale");
  const double w = r.get_f32("rotation");
  const double x = r.get_f32("rotation");
  const double y = r.get_f32("rotation");
  const double z = r.get_f32("rotation");
  g.rotation = Quat(w, x, y, z);
  g.opacity_logit = r.get<float>("opacity");
  for (auto& c : g.color_dc) c = r.get<float>("color");
  g.sh_rest.resize(sh);
  for (auto& c : g.sh_rest) c = r.get<float>("sh payload");
  return g;
}

std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > 0xffffffffu) throw std::invalid_argument(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

std::size_t sh_count(const CompressedScene& cs) {
  const Gaussian* first = !cs.last_left.empty() ? &cs.last_left.front() : !cs.last_out.empty() ? &cs.last_out.front() : nullptr;
  if (!first) return 0;
  const std::size_t n = first->sh_rest.size();
  for (const auto* list : {&cs.last_left, &cs.last_out}) {
    for (const auto& g : *list) {
      if (g.sh_rest.size() != n) throw std::invalid_argument("SH payload length differs between Gaussians");
    }
  }
  return n;
}

std::uint64_t encoded_size(const CompressedScene& cs) {
  std::uint64_t n = kHeaderBytes;
  for (const auto& l : cs.levels) n += kLevelFixedBytes + 12ull * l.retained_positions.size();
  n += 4;
  n += static_cast<std::uint64_t>(cs.last_left.size() + cs.last_out.size()) * (4ull * (kRecordFloats + sh_count(cs)));
  return n;
}

std::vector<std::uint8_t> encode_bytes(const CompressedScene& cs) {
  if (cs.levels.size() > 0xffff) throw std::invalid_argument("too many levels for the container");
  const std::size_t sh = sh_count(cs);
  Writer w(static_cast<std::size_t>(encoded_size(cs)));

  for (const char c : kMagic) w.put(c);
  w.put(kContainerVersion);
  w.put(static_cast<std::uint16_t>(cs.levels.size()));
  w.put(checked_u32(cs.last_left.size(), "last_left"));
  w.put(checked_u32(cs.last_out.size(), "last_out"));
  w.put(cs.extent);
  for (int k = 0; k < 3; ++k) w.put(cs.centroid_offset[k]);
  std::uint32_t flags = 0;
  if (cs.reflect_rotations) flags |= kFlagHouseholder;
  if (sh > 0) flags |= kFlagSh;
  w.put(flags);
  w.put(cs.match_tol);

  for (const auto& l : cs.levels) {
    w.put(l.mirror.alpha);
    w.put(l.mirror.beta);
    w.put(l.mirror.gamma);
    w.put(checked_u32(l.retained_positions.size(), "retained_count"));
    for (const auto& p : l.retained_positions) {
      for (int k = 0; k < 3; ++k) w.put_f32(p[k]);
    }
  }

  w.put(static_cast<std::uint32_t>(sh));
  for (const auto& g : cs.last_left) put_gaussian(w, g);
  for (const auto& g : cs.last_out) put_gaussian(w, g);
  return w.take();
}

std::uint64_t encode(const CompressedScene& cs, const std::filesystem::path& path) {
  const auto bytes = encode_bytes(cs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
  return bytes.size();
}

CompressedScene decode_bytes(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  for (auto& c : magic) c = r.get<char>("magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DecodeError("bad magic", 0);
  const auto version = r.get<std::uint16_t>("version");
  if (version != kContainerVersion) {
    throw DecodeError("unsupported container version " + std::to_string(version), 4);
  }
  const auto level_count = r.get<std::uint16_t>("level count");
  const auto n_left = r.get<std::uint32_t>("last_left count");
  const auto n_out = r.get<std::uint32_t>("last_out count");

  CompressedScene cs;
  cs.extent = r.get<double>("extent");
  for (int k = 0; k < 3; ++k) cs.centroid_offset[k] = r.get<double>("centroid offset");
  const std::size_t flags_at = r.pos();
  const auto flags = r.get<std::uint32_t>("flags");
  if (flags & ~(kFlagHouseholder | kFlagSh)) throw DecodeError("unknown flag bits", flags_at);
  cs.reflect_rotations = (flags & kFlagHouseholder) != 0;
  cs.match_tol = r.get<double>("match_tol");
  if (!std::isfinite(cs.extent) || cs.extent < 0.0) throw DecodeError("invalid extent", 16);
  if (!cs.centroid_offset.allFinite()) throw DecodeError("invalid centroid offset", 24);
  if (!(cs.match_tol > 0.0) || !std::isfinite(cs.match_tol)) throw DecodeError("invalid match_tol", 52);
  if (level_count > 0 && n_left == 0) throw DecodeError("levels present but last_left is empty", 8);

  cs.levels.resize(level_count);
  for (auto& l : cs.levels) {
    const std::size_t at = r.pos();
    l.mirror.alpha = r.get<double>("mirror");
    l.mirror.beta = r.get<double>("mirror");
    l.mirror.gamma = r.get<double>("mirror");
    if (!std::isfinite(l.mirror.alpha) || !std::isfinite(l.mirror.beta) || !std::isfinite(l.mirror.gamma)) {
      throw DecodeError("non-finite mirror parameters", at);
    }
    const auto count = r.get<std::uint32_t>("retained count");
    if (count == 0) throw DecodeError("level with no retained positions", r.pos() - 4);
    r.need(12ull * count, "retained positions");
    l.retained_positions.resize(count);
    for (auto& p : l.retained_positions) {
      for (int k = 0; k < 3; ++k) p[k] = r.get_f32("retained position");
    }
  }

  const std::size_t sh_at = r.pos();
  const auto sh = r.get<std::uint32_t>("SH count");
  if (((flags & kFlagSh) != 0) != (sh > 0)) throw DecodeError("SH flag disagrees with SH count", sh_at);
  const std::uint64_t record = 4ull * (kRecordFloats + sh);
  r.need((static_cast<std::uint64_t>(n_left) + n_out) * record, "Gaussian records");
  cs.last_left.reserve(n_left);
  cs.last_out.reserve(n_out);
  for (std::uint32_t i = 0; i < n_left; ++i) cs.last_left.push_back(get_gaussian(r, sh));
  for (std::uint32_t i = 0; i < n_out; ++i) cs.last_out.push_back(get_gaussian(r, sh));
  if (r.remaining() != 0) throw DecodeError("trailing bytes after container", r.pos());
  return cs;
}

CompressedScene decode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_bytes(bytes);
}

GaussianScene reconstruct(const CompressedScene& cs, double match_tol, std::vector<std::size_t>* level_sizes) {
  const double tol = match_tol > 0.0 ? match_tol : cs.match_tol;
  const RotationMode mode = cs.reflect_rotations ? RotationMode::householder : RotationMode::copy;
  if (level_sizes) level_sizes->clear();

  std::vector<Gaussian> ws;
  if (cs.levels.empty()) {
    ws = cs.last_out;
    if (level_sizes) level_sizes->push_back(ws.size());
    return make_scene_in_frame(std::move(ws), cs.centroid_offset);
  }

  ws.reserve(cs.represented_gaussians());
  ws.insert(ws.end(), cs.last_left.begin(), cs.last_left.end());
  const auto mirrored = reflect_all(cs.last_left, cs.levels.back().mirror, mode);
  ws.insert(ws.end(), mirrored.begin(), mirrored.end());
  ws.insert(ws.end(), cs.last_out.begin(), cs.last_out.end());
  if (level_sizes) level_sizes->push_back(ws.size());

  for (std::size_t l = cs.levels.size() - 1; l-- > 0;) {
    const CompressionLevel& level = cs.levels[l];
    std::vector<Vec3> pos;
    pos.reserve(ws.size());
    for (const auto& g : ws) pos.push_back(g.position);
    const KdTree tree(pos);
    std::vector<bool> claimed(ws.size(), false);
    std::vector<Gaussian> added;
    added.reserve(level.retained_positions.size());
    for (std::size_t i = 0; i < level.retained_positions.size(); ++i) {
      bool found = false;
      for (const Neighbor& nb : tree.within(level.retained_positions[i], tol)) {
        if (claimed[nb.index]) continue;
        claimed[nb.index] = true;
        added.push_back(reflect_gaussian(ws[nb.index], level.mirror, mode));
        found = true;
        break;
      }
      if (!found) {
        throw ReconstructionError("level " + std::to_string(l) + ": retained position " + std::to_string(i) +
                                      " has no unclaimed Gaussian within " + std::to_string(tol),
                                  l, i);
      }
    }
    ws.insert(ws.end(), added.begin(), added.end());
    if (level_sizes) level_sizes->push_back(ws.size());
  }
  return make_scene_in_frame(std::move(ws), cs.centroid_offset);
}

double rcf(double original_bytes, double compressed_bytes) {
  if (!(compressed_bytes > 0.0)) throw std::invalid_argument("compressed size must be positive");
  if (!(original_bytes > 0.0)) throw std::invalid_argument("original size must be positive");
  return original_bytes / compressed_bytes;
}

}  // namespace symgs
