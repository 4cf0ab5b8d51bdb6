#include "latentcast/embeddings.hpp"

#include <cmath>
#include <string>

#include "latentcast/common.hpp"
#include "latentcast/grid.hpp"

namespace latentcast {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

const std::vector<int>& default_cycles_days() {
  static const std::vector<int> cycles = [] {
    std::vector<int> c;
    for (int k = 1; k <= 15; ++k) c.push_back(k);
    return c;
  }();
  return cycles;
}

torch::Tensor raw_time_features(std::int64_t hours, const std::vector<int>& cycles_days) {
  torch::Tensor out = torch::empty({2 * static_cast<std::int64_t>(cycles_days.size())},
                                   torch::kFloat64);
  auto acc = out.accessor<double, 1>();
  for (std::size_t i = 0; i < cycles_days.size(); ++i) {
    const int k = cycles_days[i];
    if (k <= 0) throw ConfigError("time embedding cycles must be positive days");
    const std::int64_t period = 24 * static_cast<std::int64_t>(k);
    // Reduce modulo the period in integer hours so the features are exactly
    // periodic and the trig arguments stay small.
    const std::int64_t rem = ((hours % period) + period) % period;
    const double phase = kTwoPi * static_cast<double>(rem) / static_cast<double>(period);
    acc[static_cast<std::int64_t>(2 * i)] = std::sin(phase);
    acc[static_cast<std::int64_t>(2 * i + 1)] = std::cos(phase);
  }
  return out;
}

TimeEmbedImpl::TimeEmbedImpl(std::int64_t cycles, std::int64_t hidden, std::int64_t out_channels)
    : cycles_(cycles), out_channels_(out_channels) {
  if (cycles < 1 || hidden < 1 || out_channels < 1)
    throw ConfigError("time embedding needs positive sizes");
  fc1_ = register_module("fc1", torch::nn::Linear(4 * cycles, hidden));
  fc2_ = register_module("fc2", torch::nn::Linear(hidden, hidden));
  fc3_ = register_module("fc3", torch::nn::Linear(hidden, out_channels));
}

torch::Tensor TimeEmbedImpl::forward(const torch::Tensor& raw_prev,
                                     const torch::Tensor& raw_curr, std::int64_t h,
                                     std::int64_t w) {
  if (raw_prev.sizes() != raw_curr.sizes())
    throw ShapeError("time embedding inputs must have equal length");
  const bool batched = raw_prev.dim() == 2;
  torch::Tensor a = batched ? raw_prev : raw_prev.unsqueeze(0);
  torch::Tensor b = batched ? raw_curr : raw_curr.unsqueeze(0);
  if (a.dim() != 2 || a.size(1) != 2 * cycles_)
    throw ShapeError("time embedding expects " + std::to_string(2 * cycles_) +
                     " raw features per step, got " + std::to_string(a.size(-1)));
  torch::Tensor x = torch::cat({a, b}, 1).to(fc1_->weight.scalar_type());
  x = torch::leaky_relu(fc1_->forward(x), 0.01);
  x = torch::leaky_relu(fc2_->forward(x), 0.01);
  x = fc3_->forward(x);  // [B, out]
  torch::Tensor field = x.unsqueeze(-1).unsqueeze(-1).expand({x.size(0), out_channels_, h, w});
  return batched ? field : field.squeeze(0);
}

torch::Tensor TimeEmbedImpl::at_hours(std::int64_t prev_hours, std::int64_t curr_hours,
                                      std::int64_t h, std::int64_t w) {
  const auto& cycles = default_cycles_days();
  if (static_cast<std::int64_t>(cycles.size()) != cycles_)
    throw ConfigError("at_hours requires the default 15-cycle configuration");
  return forward(raw_time_features(prev_hours, cycles), raw_time_features(curr_hours, cycles),
                 h, w);
}

ConstEmbedImpl::ConstEmbedImpl(std::int64_t in_channels, std::int64_t out_channels)
    : out_channels_(out_channels) {
  block1_ = register_module("block1", MsrBlock(MsrBlockOptions{in_channels, out_channels}));
  block2_ = register_module("block2", MsrBlock(MsrBlockOptions{out_channels, out_channels}));
}

torch::Tensor ConstEmbedImpl::forward(const torch::Tensor& constants) {
  if (!torch::isfinite(constants).all().item<bool>())
    throw DataError("constant fields contain non-finite values");
  return block2_->forward(block1_->forward(constants));
}

torch::Tensor synthetic_constants(std::int64_t h, std::int64_t w) {
  if (h < 1 || w < 1) throw ShapeError("constant fields need a positive grid");
  torch::Tensor out = torch::zeros({2, h, w}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  const auto lats = cell_center_lats(h);
  const auto lons = cell_center_lons(w);
  struct Blob {
    double lat, lon, rlat, rlon;
  };
  const Blob blobs[] = {{30.0, 90.0, 25.0, 60.0}, {-20.0, 240.0, 30.0, 50.0}};
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      for (const Blob& b : blobs) {
        const double dy = (lats[static_cast<std::size_t>(y)] - b.lat) / b.rlat;
        const double dx = (lons[static_cast<std::size_t>(x)] - b.lon) / b.rlon;
        if (dy * dy + dx * dx <= 1.0) acc[0][y][x] = 1.0f;
      }
      acc[1][y][x] = static_cast<float>(lats[static_cast<std::size_t>(y)] / 90.0);
    }
  return out;
}

}  // namespace latentcast
