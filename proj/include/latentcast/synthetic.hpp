#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "latentcast/catalog.hpp"
#include "latentcast/grid.hpp"

namespace latentcast {

/// Parameters of the synthetic dataset generator. Fields evolve by one-cell
/// zonal advection per step, explicit diffusion (periodic in longitude,
/// reflecting in latitude), and linear coupling that relaxes each key channel
/// toward a designated non-key source channel. With forcing > 0 a Gaussian
/// perturbation is added each step.
struct SyntheticConfig {
  std::int64_t channels = 12;      // C
  std::int64_t key_channels = 4;   // c, the first c channels
  std::int64_t height = 16;        // H
  std::int64_t width = 32;         // W
  std::int64_t steps = 2000;       // T
  double coupling = 0.35;          // relaxation rate toward the source channel
  double diffusion = 0.004;        // explicit Laplacian coefficient per step
  double forcing = 0.04;           // stddev of per-step Gaussian perturbation
  std::uint64_t seed = 7;
};

/// Source channel index for each key channel: key j couples to channel
/// c + (j mod (C - c)). Empty when every channel is a key.
std::vector<std::int64_t> synthetic_key_sources(const SyntheticConfig& cfg);

/// Generate a dataset plus its catalog. Bitwise reproducible for a fixed
/// config: the generator uses its own mt19937_64 stream and float32 stepping
/// with a fixed operation order, so no platform-dependent library
/// distributions are involved.
std::pair<GridField, VariableCatalog> generate_synthetic(const SyntheticConfig& cfg);

}  // namespace latentcast
