#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace latentcast {

/// Named channel list with level metadata and the ordered key-variable subset.
///
/// `levels[i]` is either a pressure level in hPa (decimal string), "surface",
/// or "integrated". `key_indices[j]` is the channel index (0-based) of the
/// j-th key variable; the order of key_indices defines the output channel
/// order of `select_key` and of every decoded forecast.
struct VariableCatalog {
  std::vector<std::string> names;
  std::vector<std::string> levels;
  std::vector<bool> surface_flags;
  std::vector<std::int64_t> key_indices;

  std::int64_t num_channels() const { return static_cast<std::int64_t>(names.size()); }
  std::int64_t num_keys() const { return static_cast<std::int64_t>(key_indices.size()); }

  const std::string& key_name(std::int64_t j) const { return names[key_indices[j]]; }

  /// Throws DataError on duplicate names, out-of-range or repeated key
  /// indices, or mismatched field lengths.
  void validate() const;

  /// Per-key loss weight w_j: 1.0 for upper-air channels and for t2m,
  /// 0.1 for every other surface/integrated channel.
  std::vector<double> key_surface_weights() const;
};

/// The full-scale 104-channel reanalysis catalog: 13 surface/integrated
/// channels followed by seven upper-air variables (z, t, rh, u, v, w, ws) at
/// 13 pressure levels each, with the 20 key variables marked.
VariableCatalog era5_catalog();

/// The 13 upper-air pressure levels (hPa), ascending.
const std::vector<int>& upper_air_levels();

}  // namespace latentcast
