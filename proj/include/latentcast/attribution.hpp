#pragma once

#include <torch/torch.h>

#include <functional>

namespace latentcast {

/// Differentiable scalar-valued function of one input tensor.
using ScalarFn = std::function<torch::Tensor(const torch::Tensor&)>;

struct IgResult {
  torch::Tensor attributions;  // same shape as the input
  double delta = 0;            // f(x) - f(baseline)
  double completeness_gap = 0;  // |sum(attributions) - delta|
};

/// Integrated gradients along the straight path from `baseline` to `x`:
/// (x - baseline) * mean of grad f at the m midpoints. m >= 8.
IgResult integrated_gradients(const ScalarFn& f, const torch::Tensor& x,
                              const torch::Tensor& baseline, int m = 32);

/// Per-channel attribution magnitude: mean |IG| over the grid -> [C] float64.
torch::Tensor channel_attribution(const torch::Tensor& attributions);

}  // namespace latentcast
