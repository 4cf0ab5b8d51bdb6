#include "latentcast/attribution.hpp"

#include <cmath>

#include "latentcast/common.hpp"

namespace latentcast {

IgResult integrated_gradients(const ScalarFn& f, const torch::Tensor& x,
                              const torch::Tensor& baseline, int m) {
  if (m < 8) throw ConfigError("integrated_gradients: m must be at least 8");
  if (!x.sizes().equals(baseline.sizes()))
    throw ShapeError("integrated_gradients: input and baseline shapes differ");
  if (!torch::isfinite(x).all().item<bool>() ||
      !torch::isfinite(baseline).all().item<bool>())
    throw DataError("integrated_gradients: non-finite input or baseline");

  const torch::Tensor x0 = x.detach();
  const torch::Tensor b0 = baseline.detach();
  const torch::Tensor diff = x0 - b0;

  torch::Tensor grad_sum = torch::zeros_like(x0);
  for (int k = 1; k <= m; ++k) {
    const double alpha = (k - 0.5) / m;
    torch::Tensor point = (b0 + alpha * diff).detach().requires_grad_(true);
    torch::Tensor y = f(point);
    if (y.numel() != 1)
      throw ShapeError("integrated_gradients: target function must return a scalar");
    if (!y.requires_grad())
      throw DataError("integrated_gradients: target does not depend on the input");
    grad_sum += torch::autograd::grad({y}, {point})[0];
  }

  IgResult out;
  out.attributions = diff * grad_sum / m;
  {
    torch::NoGradGuard ng;
    out.delta = (f(x0) - f(b0)).item<double>();
  }
  out.completeness_gap = std::abs(out.attributions.sum().item<double>() - out.delta);
  return out;
}

torch::Tensor channel_attribution(const torch::Tensor& attributions) {
  if (attributions.dim() < 1) throw ShapeError("channel_attribution: rank-0 input");
  return attributions.detach()
      .to(torch::kFloat64)
      .abs()
      .reshape({attributions.size(0), -1})
      .mean(1);
}

}  // namespace latentcast
