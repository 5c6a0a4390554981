#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "symgs/compressor.hpp"

namespace symgs {

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kHeaderBytes = 60;
inline constexpr std::size_t kLevelFixedBytes = 28;  // mirror 3 x f64 + u32 count
inline constexpr std::size_t kRecordFloats = 14;     // without SH

enum ContainerFlags : std::uint32_t {
  kFlagHouseholder = 1u << 0,
  kFlagSh = 1u << 1,
};

/// Number of SH floats per Gaussian; throws std::invalid_argument when the
/// stored Gaussians disagree.
std::size_t sh_count(const CompressedScene& cs);

/// Closed-form container size.
std::uint64_t encoded_size(const CompressedScene& cs);

std::vector<std::uint8_t> encode_bytes(const CompressedScene& cs);
/// Writes the container and returns the number of bytes written.
std::uint64_t encode(const CompressedScene& cs, const std::filesystem::path& path);

CompressedScene decode_bytes(std::span<const std::uint8_t> bytes);
CompressedScene decode(const std::filesystem::path& path);

/// Unrolls the hierarchy innermost-first. Positions of retained Gaussians are
/// matched to the working set within `match_tol` (<= 0: the container's
/// value). `level_sizes`, when given, receives the working-set size after
/// each unrolled level, innermost first.
GaussianScene reconstruct(const CompressedScene& cs, double match_tol = 0.0,
                          std::vector<std::size_t>* level_sizes = nullptr);

/// original / compressed
double rcf(double original_bytes, double compressed_bytes);

}  // namespace symgs
