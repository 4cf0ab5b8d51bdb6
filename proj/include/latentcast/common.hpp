#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace latentcast {

/// Base class for all errors raised by this library. The CLI maps the
/// subclasses onto exit codes (config -> 2, data -> 3, anything else -> 4).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration: bad schema, out-of-range hyperparameter, missing LPM.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Bad data: shape mismatches, non-finite ingestion values, degenerate channels.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Tensor shape violations in model/loss plumbing.
class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& msg) : DataError(msg) {}
};

/// I/O failures (missing files, truncated payloads, refused overwrites).
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// FNV-1a 64-bit. Used for config hashes; stable across platforms, no deps.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw. Unlike
/// std::uniform_real_distribution this is the same on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) via unit_uniform; n must be positive.
inline std::int64_t uniform_index(std::mt19937_64& rng, std::int64_t n) {
  const auto i = static_cast<std::int64_t>(unit_uniform(rng) * static_cast<double>(n));
  return i >= n ? n - 1 : i;
}

}  // namespace latentcast
