#include "latentcast/metrics.hpp"

#include <cmath>
#include <cstdint>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

// [H, W] or [N, H, W] -> float64 [N, H, W]; checks agreement with the weights.
torch::Tensor as_batch(const torch::Tensor& t, std::int64_t rows, const char* name) {
  if (t.dim() != 2 && t.dim() != 3)
    throw ShapeError(std::string(name) + ": expected [H, W] or [N, H, W], got rank " +
                     std::to_string(t.dim()));
  torch::Tensor out = t.to(torch::kFloat64);
  if (out.dim() == 2) out = out.unsqueeze(0);
  if (out.size(1) != rows)
    throw ShapeError(std::string(name) + ": " + std::to_string(out.size(1)) +
                     " rows vs " + std::to_string(rows) + " latitude weights");
  return out;
}

}  // namespace

double rmse_lat(const torch::Tensor& pred, const torch::Tensor& truth,
                const LatitudeWeights& a) {
  if (!pred.sizes().equals(truth.sizes()))
    throw ShapeError("rmse_lat: prediction and truth shapes differ");
  const torch::Tensor p = as_batch(pred, a.a.numel(), "rmse_lat");
  const torch::Tensor t = as_batch(truth, a.a.numel(), "rmse_lat");
  const torch::Tensor w = a.a.reshape({1, -1, 1});
  const double cells = static_cast<double>(p.size(1) * p.size(2));
  const torch::Tensor per_init = ((p - t).square() * w).sum({1, 2}).div(cells).sqrt();
  return per_init.mean().item<double>();
}

std::optional<double> acc_lat(const torch::Tensor& pred, const torch::Tensor& truth,
                              const torch::Tensor& clim, const LatitudeWeights& a) {
  if (!pred.sizes().equals(truth.sizes()))
    throw ShapeError("acc_lat: prediction and truth shapes differ");
  const torch::Tensor p = as_batch(pred, a.a.numel(), "acc_lat");
  const torch::Tensor t = as_batch(truth, a.a.numel(), "acc_lat");
  if (clim.dim() != 2 || clim.size(0) != p.size(1) || clim.size(1) != p.size(2))
    throw ShapeError("acc_lat: climatology shape does not match the fields");
  const torch::Tensor c = clim.to(torch::kFloat64).unsqueeze(0);
  const torch::Tensor w = a.a.reshape({1, -1, 1});
  const torch::Tensor pa = p - c, ta = t - c;
  const torch::Tensor num = (pa * ta * w).sum({1, 2});
  const torch::Tensor pp = (pa.square() * w).sum({1, 2});
  const torch::Tensor tt = (ta.square() * w).sum({1, 2});
  double sum = 0.0;
  for (std::int64_t i = 0; i < num.numel(); ++i) {
    const double p2 = pp[i].item<double>(), t2 = tt[i].item<double>();
    if (p2 == 0.0 || t2 == 0.0) return std::nullopt;
    sum += num[i].item<double>() / std::sqrt(p2 * t2);
  }
  const double acc = sum / static_cast<double>(num.numel());
  return std::clamp(acc, -1.0, 1.0);
}

CorrelationMatrices correlation_matrix(const GridField& data, const VariableCatalog& cat) {
  if (data.steps() < 2) throw DataError("correlation_matrix: need at least 2 time samples");
  const std::int64_t C = data.channels();
  if (static_cast<std::int64_t>(cat.names.size()) != C)
    throw DataError("correlation_matrix: catalog lists " + std::to_string(cat.names.size()) +
                    " variables for " + std::to_string(C) + " channels");
  std::vector<std::int64_t> keys;
  for (std::int64_t k : cat.key_indices) {
    if (k < 0 || k >= C) throw DataError("correlation_matrix: key index out of range");
    keys.push_back(k);
  }

  const torch::Tensor x =
      data.data.to(torch::kFloat64).permute({1, 0, 2, 3}).reshape({C, -1});
  const torch::Tensor centered = x - x.mean(1, /*keepdim=*/true);
  const torch::Tensor norms = centered.square().sum(1).sqrt();
  // 0/0 on constant channels yields the NaN undefined marker by construction.
  const torch::Tensor corr =
      torch::matmul(centered, centered.t()) / (norms.unsqueeze(1) * norms.unsqueeze(0));
  const torch::Tensor clamped = corr.clamp(-1.0, 1.0);  // NaN passes through

  const torch::Tensor key_idx =
      torch::tensor(keys, torch::TensorOptions().dtype(torch::kInt64));
  return {clamped.index_select(0, key_idx).index_select(1, key_idx),
          clamped.index_select(0, key_idx)};
}

}  // namespace latentcast
