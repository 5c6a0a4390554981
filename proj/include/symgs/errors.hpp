#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symgs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input structure (PLY header, config syntax).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input carrying unusable values (NaN, zero quaternion, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unsatisfiable configuration (bad bin counts, grid too large, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ReconstructionError : public Error {
 public:
  ReconstructionError(const std::string& what, std::size_t level, std::size_t index)
      : Error(what), level_(level), index_(index) {}
  [[nodiscard]] std::size_t level() const noexcept { return level_; }
  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t level_;
  std::size_t index_;
};

}  // namespace symgs
