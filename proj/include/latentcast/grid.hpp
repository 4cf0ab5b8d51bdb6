#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

#include "latentcast/catalog.hpp"

namespace latentcast {

/// Gridded multi-channel time series: data is [T, C, H, W] on CPU, lat/lon are
/// cell-center coordinates in degrees, timestamps run t0 + k*dt.
struct GridField {
  torch::Tensor data;  // [T, C, H, W], float32
  std::vector<double> lat;
  std::vector<double> lon;
  std::int64_t t0_hours = 0;  // hours since 2000-01-01T00:00Z
  int dt_hours = 6;

  std::int64_t steps() const { return data.size(0); }
  std::int64_t channels() const { return data.size(1); }
  std::int64_t height() const { return data.size(2); }
  std::int64_t width() const { return data.size(3); }

  std::int64_t time_at(std::int64_t step) const { return t0_hours + step * dt_hours; }

  /// Checks rank, coordinate lengths, lat coverage, lon monotonic+equispaced,
  /// and that every value is finite. Throws DataError.
  void validate() const;

  /// A new GridField over data[first, first+count) sharing storage.
  GridField slice_time(std::int64_t first, std::int64_t count) const;
};

/// Equiangular cell-center latitudes for H rows covering [-90, 90], no poles:
/// -90 + (k + 0.5) * 180/H, ascending.
std::vector<double> cell_center_lats(std::int64_t h);

/// Cell-center longitudes for W columns covering [0, 360).
std::vector<double> cell_center_lons(std::int64_t w);

}  // namespace latentcast
