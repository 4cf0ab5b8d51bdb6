#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

#include "latentcast/blocks.hpp"

namespace latentcast {

/// Cycle lengths in days for the multi-cycle time features: 1..15.
const std::vector<int>& default_cycles_days();

/// Per cycle of k days: (sin, cos) of 2*pi*h/(24k), h in hours since the
/// 2000-01-01T00:00Z epoch. Returns [2*|cycles|] float64; exactly periodic in
/// integer multiples of each cycle.
torch::Tensor raw_time_features(std::int64_t hours, const std::vector<int>& cycles_days);

/// Fully-connected stack over the concatenated raw features of the two input
/// steps: 4n -> hidden -> hidden -> out_channels with LeakyReLU(0.01), the
/// result broadcast uniformly over the grid.
class TimeEmbedImpl : public torch::nn::Module {
 public:
  explicit TimeEmbedImpl(std::int64_t cycles = 15, std::int64_t hidden = 128,
                         std::int64_t out_channels = 12);

  /// raw_prev/raw_curr: [2n] or [B, 2n] -> [B, out_channels, h, w]
  /// ([out_channels, h, w] when unbatched).
  torch::Tensor forward(const torch::Tensor& raw_prev, const torch::Tensor& raw_curr,
                        std::int64_t h, std::int64_t w);

  /// Convenience: features from two hour stamps (batch of one).
  torch::Tensor at_hours(std::int64_t prev_hours, std::int64_t curr_hours, std::int64_t h,
                         std::int64_t w);

  std::int64_t out_channels() const { return out_channels_; }

 private:
  std::int64_t cycles_, out_channels_;
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr}, fc3_{nullptr};
};
TORCH_MODULE(TimeEmbed);

/// Two multi-scale residual blocks mapping the constant fields to
/// out_channels, spatial shape preserved.
class ConstEmbedImpl : public torch::nn::Module {
 public:
  explicit ConstEmbedImpl(std::int64_t in_channels, std::int64_t out_channels = 12);

  /// [K, H, W] or [B, K, H, W] -> [.., out_channels, H, W].
  torch::Tensor forward(const torch::Tensor& constants);

  std::int64_t out_channels() const { return out_channels_; }

 private:
  std::int64_t out_channels_;
  MsrBlock block1_{nullptr}, block2_{nullptr};
};
TORCH_MODULE(ConstEmbed);

/// Analytic constant fields for synthetic runs: a binary land-mask-like blob
/// pattern and a normalized latitude ramp. Shape [2, H, W].
torch::Tensor synthetic_constants(std::int64_t h, std::int64_t w);

}  // namespace latentcast
