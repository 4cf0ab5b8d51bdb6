#include "latentcast/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

constexpr double kPi = 3.14159265358979323846;

double standard_normal(std::mt19937_64& rng) {
  double u1 = unit_uniform(rng);
  double u2 = unit_uniform(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

void validate(const SyntheticConfig& cfg) {
  if (cfg.key_channels > cfg.channels)
    throw DataError("synthetic: key channel count " + std::to_string(cfg.key_channels) +
                    " exceeds channel count " + std::to_string(cfg.channels));
  if (cfg.key_channels < 1 || cfg.channels < 1)
    throw DataError("synthetic: channel counts must be positive");
  if (cfg.height < 4 || cfg.width < 4) throw DataError("synthetic: grid must be at least 4x4");
  if (cfg.steps < 16) throw DataError("synthetic: need at least 16 steps");
  if (cfg.coupling < 0 || cfg.coupling > 1)
    throw DataError("synthetic: coupling must lie in [0, 1]");
  if (cfg.diffusion < 0 || cfg.diffusion > 0.1)
    throw DataError("synthetic: diffusion must lie in [0, 0.1]");
  if (cfg.forcing < 0) throw DataError("synthetic: forcing must be non-negative");
}

VariableCatalog make_catalog(const SyntheticConfig& cfg) {
  VariableCatalog cat;
  for (std::int64_t i = 0; i < cfg.channels; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "var%02d", static_cast<int>(i));
    cat.names.emplace_back(buf);
    const bool surface = (i % 2 == 0);
    cat.levels.emplace_back(surface ? "surface" : "500");
    cat.surface_flags.push_back(surface);
  }
  for (std::int64_t j = 0; j < cfg.key_channels; ++j) cat.key_indices.push_back(j);
  cat.validate();
  return cat;
}

}  // namespace

std::vector<std::int64_t> synthetic_key_sources(const SyntheticConfig& cfg) {
  std::vector<std::int64_t> src;
  const std::int64_t non_key = cfg.channels - cfg.key_channels;
  if (non_key <= 0) return src;
  for (std::int64_t j = 0; j < cfg.key_channels; ++j)
    src.push_back(cfg.key_channels + (j % non_key));
  return src;
}

std::pair<GridField, VariableCatalog> generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  const std::int64_t C = cfg.channels, H = cfg.height, W = cfg.width, T = cfg.steps;

  GridField field;
  field.data = torch::empty({T, C, H, W}, torch::kFloat32);
  field.lat = cell_center_lats(H);
  field.lon = cell_center_lons(W);
  field.t0_hours = 0;
  field.dt_hours = 6;

  std::mt19937_64 rng(cfg.seed);
  auto acc = field.data.accessor<float, 4>();

  // Initial condition: three zonal/meridional cosine modes per channel.
  for (std::int64_t ch = 0; ch < C; ++ch) {
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t x = 0; x < W; ++x) acc[0][ch][y][x] = 0.0f;
    for (int m = 0; m < 3; ++m) {
      const std::int64_t kx = 1 + static_cast<std::int64_t>(rng() % 3);
      const std::int64_t ky = static_cast<std::int64_t>(rng() % 3);
      const double amp = 0.5 + 0.5 * unit_uniform(rng);
      const double phase = 2.0 * kPi * unit_uniform(rng);
      for (std::int64_t y = 0; y < H; ++y) {
        const double my = std::cos(kPi * static_cast<double>(ky) *
                                   (static_cast<double>(y) + 0.5) / static_cast<double>(H));
        for (std::int64_t x = 0; x < W; ++x) {
          const double mx =
              std::cos(2.0 * kPi * static_cast<double>(kx * x) / static_cast<double>(W) + phase);
          acc[0][ch][y][x] += static_cast<float>(amp * mx * my);
        }
      }
    }
  }

  const std::vector<std::int64_t> sources = synthetic_key_sources(cfg);
  const float nu = static_cast<float>(cfg.diffusion);
  const float kappa = static_cast<float>(cfg.coupling);
  std::vector<float> tmp(static_cast<std::size_t>(C * H * W));
  auto at = [&](std::int64_t ch, std::int64_t y, std::int64_t x) -> float& {
    return tmp[static_cast<std::size_t>((ch * H + y) * W + x)];
  };

  for (std::int64_t t = 1; t < T; ++t) {
    // Advect one cell eastward, then diffuse.
    for (std::int64_t ch = 0; ch < C; ++ch)
      for (std::int64_t y = 0; y < H; ++y)
        for (std::int64_t x = 0; x < W; ++x)
          at(ch, y, x) = acc[t - 1][ch][y][(x - 1 + W) % W];
    for (std::int64_t ch = 0; ch < C; ++ch) {
      for (std::int64_t y = 0; y < H; ++y) {
        const std::int64_t yd = (y > 0) ? y - 1 : 0;
        const std::int64_t yu = (y < H - 1) ? y + 1 : H - 1;
        for (std::int64_t x = 0; x < W; ++x) {
          const float c = at(ch, y, x);
          const float lap = at(ch, y, (x - 1 + W) % W) + at(ch, y, (x + 1) % W) +
                            at(ch, yd, x) + at(ch, yu, x) - 4.0f * c;
          acc[t][ch][y][x] = c + nu * lap;
        }
      }
    }
    if (!sources.empty() && kappa > 0.0f) {
      for (std::int64_t j = 0; j < cfg.key_channels; ++j) {
        const std::int64_t s = sources[static_cast<std::size_t>(j)];
        for (std::int64_t y = 0; y < H; ++y)
          for (std::int64_t x = 0; x < W; ++x) {
            // Source channel was diffused but not yet overwritten, so read the
            // post-diffusion values from acc[t].
            acc[t][j][y][x] = (1.0f - kappa) * acc[t][j][y][x] + kappa * acc[t][s][y][x];
          }
      }
    }
    if (cfg.forcing > 0) {
      const float f = static_cast<float>(cfg.forcing);
      for (std::int64_t ch = 0; ch < C; ++ch)
        for (std::int64_t y = 0; y < H; ++y)
          for (std::int64_t x = 0; x < W; ++x)
            acc[t][ch][y][x] += f * static_cast<float>(standard_normal(rng));
    }
  }

  return {std::move(field), make_catalog(cfg)};
}

}  // namespace latentcast
