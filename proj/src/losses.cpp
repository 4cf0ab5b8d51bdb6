#include "latentcast/losses.hpp"

#include <string>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

torch::Tensor as_batched(const torch::Tensor& t, const char* who) {
  if (t.dim() == 4) return t.unsqueeze(0);
  if (t.dim() == 5) return t;
  throw ShapeError(std::string(who) + ": expected [T, C, H, W] or [B, T, C, H, W], got rank " +
                   std::to_string(t.dim()));
}

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* who) {
  if (a.sizes() != b.sizes())
    throw ShapeError(std::string(who) + ": prediction and target shapes differ");
}

/// Latitude-weighted grid mean per (batch, step, channel): [B, T, C].
torch::Tensor weighted_grid_mean(const torch::Tensor& err, const LatitudeWeights& a) {
  if (a.a.numel() != err.size(3))
    throw ShapeError("latitude weights cover " + std::to_string(a.a.numel()) +
                     " rows, field has " + std::to_string(err.size(3)));
  torch::Tensor aw = a.a.to(err.scalar_type()).view({1, 1, 1, -1, 1});
  return (err * aw).mean({3, 4});
}

}  // namespace

void LossWeights::validate() const {
  if (q.numel() != w.numel())
    throw ConfigError("loss weights q and w must cover the same key variables");
  if (!(q > 0).all().item<bool>()) throw ConfigError("per-variable weights q must be positive");
  if (std::abs(a.a.mean().item<double>() - 1.0) > 1e-9)
    throw ConfigError("latitude weights must have unit mean");
}

LossWeights make_loss_weights(const VariableCatalog& cat, const NormalizationStats& stats,
                              const std::vector<double>& lats) {
  if (stats.channels() != cat.num_channels())
    throw ShapeError("make_loss_weights: stats cover " + std::to_string(stats.channels()) +
                     " channels, catalog has " + std::to_string(cat.num_channels()));
  torch::Tensor idx = torch::tensor(cat.key_indices, torch::kLong);
  torch::Tensor key_std = stats.std.index_select(0, idx);
  LossWeights wts;
  wts.q = 1.0 / key_std.square();
  wts.w = torch::tensor(cat.key_surface_weights(), torch::kFloat64);
  wts.a = latitude_weights(lats);
  wts.validate();
  return wts;
}

torch::Tensor key_loss(const torch::Tensor& pred, const torch::Tensor& target,
                       const LossWeights& wts) {
  torch::Tensor x = as_batched(pred, "key_loss");
  torch::Tensor y = as_batched(target, "key_loss");
  check_same_shape(x, y, "key_loss");
  if (x.size(2) != wts.q.numel())
    throw ShapeError("key_loss: field has " + std::to_string(x.size(2)) +
                     " channels, weights cover " + std::to_string(wts.q.numel()));
  torch::Tensor grid = weighted_grid_mean((x - y).abs(), wts.a);   // [B, T, c]
  torch::Tensor qw = (wts.q * wts.w).to(x.scalar_type()).view({1, 1, -1});
  return (grid * qw).sum({1, 2}).mean();
}

torch::Tensor recon_loss(const torch::Tensor& pred, const torch::Tensor& target,
                         const LatitudeWeights& a) {
  torch::Tensor x = as_batched(pred, "recon_loss");
  torch::Tensor y = as_batched(target, "recon_loss");
  check_same_shape(x, y, "recon_loss");
  return weighted_grid_mean((x - y).abs(), a).sum({1, 2}).mean();
}

torch::Tensor latent_loss(const torch::Tensor& pred, const torch::Tensor& target,
                          const LatitudeWeights& a, const torch::Tensor& lead_wts) {
  torch::Tensor x = as_batched(pred, "latent_loss");
  torch::Tensor y = as_batched(target, "latent_loss");
  check_same_shape(x, y, "latent_loss");
  if (lead_wts.numel() != x.size(1))
    throw ShapeError("latent_loss: " + std::to_string(lead_wts.numel()) +
                     " lead weights for " + std::to_string(x.size(1)) + " steps");
  torch::Tensor grid = weighted_grid_mean((x - y).abs(), a);  // [B, T, d]
  torch::Tensor lw = lead_wts.to(x.scalar_type()).view({1, -1, 1});
  return (grid * lw).sum({1, 2}).mean();
}

torch::Tensor total_loss(const torch::Tensor& key, const torch::Tensor& recon,
                         const torch::Tensor& latent) {
  auto check = [](const torch::Tensor& t, const char* name) {
    if (t.numel() != 1) throw ShapeError(std::string(name) + " loss term must be a scalar");
    if (!torch::isfinite(t).all().item<bool>())
      throw Error(std::string("total_loss: ") + name + " term is non-finite");
  };
  check(key, "key");
  check(recon, "reconstruction");
  check(latent, "latent");
  return key + recon + latent;
}

}  // namespace latentcast
