#pragma once

#include <torch/torch.h>

#include <vector>

#include "latentcast/catalog.hpp"
#include "latentcast/dataset.hpp"

namespace latentcast {

/// Weights of the key-variable loss: per-variable inverse variance q, the
/// surface/upper-air factor w (0.1 for surface except 2m temperature), and
/// unit-mean latitude weights a.
struct LossWeights {
  torch::Tensor q;  // [c], float64
  torch::Tensor w;  // [c], float64
  LatitudeWeights a;

  void validate() const;
};

/// Assemble loss weights from a catalog, per-channel stats of the training
/// split (in the same space the loss inputs will live in; q_j = 1/std_j^2 of
/// the j-th key channel), and grid latitudes.
LossWeights make_loss_weights(const VariableCatalog& cat, const NormalizationStats& stats,
                              const std::vector<double>& lats);

/// Key-variable L1: mean over batch of
///   sum_tau sum_j q_j w_j (sum_i a_i |pred - target|_i) / (H*W).
/// Accepts [T, c, H, W] (implicit batch of one) or [B, T, c, H, W].
torch::Tensor key_loss(const torch::Tensor& pred, const torch::Tensor& target,
                       const LossWeights& wts);

/// Reconstruction L1 over all provided steps, latitude-weighted only:
///   mean over batch of sum_tau sum_j (sum_i a_i |pred - target|_i) / (H*W).
torch::Tensor recon_loss(const torch::Tensor& pred, const torch::Tensor& target,
                         const LatitudeWeights& a);

/// Latent-space L1 with per-lead weights:
///   mean over batch of sum_tau lead_wts_tau sum_d (sum_i a_i |...|_i) / (H*W).
torch::Tensor latent_loss(const torch::Tensor& pred, const torch::Tensor& target,
                          const LatitudeWeights& a, const torch::Tensor& lead_wts);

/// Equal-weight sum of the three terms. Throws if any part is non-finite.
torch::Tensor total_loss(const torch::Tensor& key, const torch::Tensor& recon,
                         const torch::Tensor& latent);

}  // namespace latentcast
