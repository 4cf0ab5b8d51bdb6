#include "latentcast/dataset.hpp"

#include <cmath>
#include <string>

#include "latentcast/common.hpp"
#include "latentcast/time_utils.hpp"

namespace latentcast {

torch::Tensor LatitudeWeights::broadcast(torch::Dtype dtype) const {
  return a.to(dtype).view({1, 1, a.numel(), 1});
}

LatitudeWeights latitude_weights(const std::vector<double>& lats) {
  if (lats.empty()) throw DataError("latitude_weights: empty latitude list");
  torch::Tensor a = torch::empty({static_cast<std::int64_t>(lats.size())}, torch::kFloat64);
  auto acc = a.accessor<double, 1>();
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  for (std::size_t i = 0; i < lats.size(); ++i) {
    if (std::abs(lats[i]) >= 90.0)
      throw DataError("latitude_weights: |lat| >= 90 at row " + std::to_string(i));
    acc[static_cast<std::int64_t>(i)] = std::cos(lats[i] * kDegToRad);
  }
  LatitudeWeights w;
  w.a = a / a.mean();
  return w;
}

NormalizationStats compute_stats(const GridField& train) {
  if (train.steps() < 2) throw DataError("compute_stats: need at least 2 time steps");
  torch::Tensor x = train.data.to(torch::kFloat64);
  NormalizationStats s;
  s.mean = x.mean({0, 2, 3});
  s.std = x.std(/*dim=*/{0, 2, 3}, /*correction=*/0);
  auto sd = s.std.accessor<double, 1>();
  for (std::int64_t c = 0; c < s.std.numel(); ++c)
    if (!(sd[c] > 0))
      throw DataError("compute_stats: channel " + std::to_string(c) +
                      " is constant (std = 0)");
  return s;
}

namespace {

GridField affine_per_channel(const GridField& x, const NormalizationStats& s, bool forward) {
  if (x.channels() != s.channels())
    throw ShapeError("normalization stats have " + std::to_string(s.channels()) +
                     " channels, field has " + std::to_string(x.channels()));
  torch::Tensor mean = s.mean.to(torch::kFloat32).view({1, -1, 1, 1});
  torch::Tensor std = s.std.to(torch::kFloat32).view({1, -1, 1, 1});
  GridField out = x;
  out.data = forward ? (x.data - mean) / std : x.data * std + mean;
  return out;
}

}  // namespace

GridField normalize(const GridField& x, const NormalizationStats& s) {
  return affine_per_channel(x, s, true);
}

GridField denormalize(const GridField& x, const NormalizationStats& s) {
  return affine_per_channel(x, s, false);
}

torch::Tensor Climatology::at_time(std::int64_t hours) const {
  if (mode == ClimatologyMode::kSimple) return mean_field;
  return mean_field[day_of_year(hours)];
}

Climatology compute_climatology(const GridField& train, ClimatologyMode mode) {
  if (train.steps() < 1) throw DataError("compute_climatology: empty training range");
  Climatology c;
  c.mode = mode;
  torch::Tensor x = train.data.to(torch::kFloat64);
  torch::Tensor overall = x.mean(0);
  if (mode == ClimatologyMode::kSimple) {
    c.mean_field = overall.to(torch::kFloat32);
    return c;
  }
  torch::Tensor sums = torch::zeros({366, x.size(1), x.size(2), x.size(3)}, torch::kFloat64);
  torch::Tensor counts = torch::zeros({366}, torch::kFloat64);
  for (std::int64_t t = 0; t < train.steps(); ++t) {
    int doy = day_of_year(train.time_at(t));
    sums[doy] += x[t];
    counts[doy] += 1.0;
  }
  // Bins with no samples fall back to the overall mean so the reference stays finite.
  auto cnt = counts.accessor<double, 1>();
  for (int d = 0; d < 366; ++d) {
    if (cnt[d] > 0)
      sums[d] /= cnt[d];
    else
      sums[d] = overall;
  }
  c.mean_field = sums.to(torch::kFloat32);
  return c;
}

GridField select_key(const GridField& x, const VariableCatalog& cat) {
  if (x.channels() != cat.num_channels())
    throw ShapeError("select_key: field has " + std::to_string(x.channels()) +
                     " channels, catalog describes " + std::to_string(cat.num_channels()));
  torch::Tensor idx = torch::tensor(cat.key_indices, torch::kLong);
  GridField out = x;
  out.data = x.data.index_select(1, idx).contiguous();
  return out;
}

}  // namespace latentcast
