#pragma once

#include <torch/torch.h>

#include <vector>

#include "latentcast/catalog.hpp"
#include "latentcast/grid.hpp"

namespace latentcast {

/// Cosine latitude weights normalized to unit mean, a_i = cos(lat_i) / mean_j cos(lat_j).
struct LatitudeWeights {
  torch::Tensor a;  // [H], float64

  /// Weights reshaped to [1, 1, H, 1] in the given dtype for broadcasting
  /// against [*, C, H, W] tensors.
  torch::Tensor broadcast(torch::Dtype dtype = torch::kFloat32) const;
};

LatitudeWeights latitude_weights(const std::vector<double>& lats);

/// Per-channel mean and population standard deviation over the training split.
struct NormalizationStats {
  torch::Tensor mean;  // [C], float64
  torch::Tensor std;   // [C], float64

  std::int64_t channels() const { return mean.numel(); }
};

NormalizationStats compute_stats(const GridField& train);

GridField normalize(const GridField& x, const NormalizationStats& s);
GridField denormalize(const GridField& x, const NormalizationStats& s);

enum class ClimatologyMode { kSimple, kSeasonal };

/// Anomaly reference for the correlation metric: per-cell temporal mean, either
/// a single field or binned by day of year.
struct Climatology {
  torch::Tensor mean_field;  // [C, H, W] simple, [366, C, H, W] seasonal; float32
  ClimatologyMode mode = ClimatologyMode::kSimple;

  /// Reference field [C, H, W] for a timestamp (hours since epoch).
  torch::Tensor at_time(std::int64_t hours) const;
};

Climatology compute_climatology(const GridField& train,
                                ClimatologyMode mode = ClimatologyMode::kSimple);

/// Slice the key channels out of a full field, in catalog key order.
GridField select_key(const GridField& x, const VariableCatalog& cat);

}  // namespace latentcast
