#pragma once

#include <torch/torch.h>

#include <optional>

#include "latentcast/catalog.hpp"
#include "latentcast/dataset.hpp"
#include "latentcast/grid.hpp"

namespace latentcast {

/// Latitude-weighted RMSE in physical units. `pred` and `truth` are [H, W] or
/// [N, H, W] (N init times: per-init RMSE, then the mean across inits).
/// Computed in float64.
double rmse_lat(const torch::Tensor& pred, const torch::Tensor& truth,
                const LatitudeWeights& a);

/// Latitude-weighted anomaly correlation about `clim` [H, W]. Shapes as in
/// rmse_lat; for [N, H, W] the per-init coefficients are averaged. A zero
/// anomaly variance in either field makes the result undefined (nullopt) —
/// never NaN.
std::optional<double> acc_lat(const torch::Tensor& pred, const torch::Tensor& truth,
                              const torch::Tensor& clim, const LatitudeWeights& a);

/// Pearson correlations over flattened (time, grid) samples. `self` is
/// key-vs-key [c, c]; `cross` is key-vs-all [c, C]. Entries touching a
/// constant channel are quiet NaN (the writers render them as null).
struct CorrelationMatrices {
  torch::Tensor self;   // [c, c], float64
  torch::Tensor cross;  // [c, C], float64
};

CorrelationMatrices correlation_matrix(const GridField& data, const VariableCatalog& cat);

}  // namespace latentcast
