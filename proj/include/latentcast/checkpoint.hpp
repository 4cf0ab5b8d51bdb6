#pragma once

#include <torch/torch.h>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "latentcast/catalog.hpp"
#include "latentcast/dataset.hpp"
#include "latentcast/model.hpp"
#include "latentcast/optim.hpp"

namespace latentcast {

/// Everything needed to resume or serve a training run: model parameters and
/// buffers, optimizer slots, normalization stats, the catalog, both configs
/// (as canonical JSON), the sampler state, and the epoch reached.
struct Checkpoint {
  int version = 1;
  nlohmann::json model_config;
  nlohmann::json train_config;
  VariableCatalog catalog;
  NormalizationStats stats;
  int epoch = 0;
  std::string rng_state;                         // mt19937_64 stream
  std::map<std::string, std::int64_t> opt_t;     // per-parameter step counts
  std::map<std::string, torch::Tensor> tensors;  // model.*, opt.m.*, opt.v.*, torch_rng

  /// FNV-1a over the canonical config + catalog JSON.
  std::uint64_t config_hash() const;
};

/// Snapshot the full training state. Tensors are cloned.
Checkpoint make_checkpoint(ForecastModel& model, const AdamW& opt, const VariableCatalog& cat,
                           const NormalizationStats& stats, const nlohmann::json& model_cfg,
                           const nlohmann::json& train_cfg, int epoch,
                           const std::mt19937_64& rng);

/// Copy a checkpoint back into a model (and optionally optimizer and sampler).
/// The model must have been built from the same configuration.
void restore_training(const Checkpoint& ckpt, ForecastModel& model, AdamW* opt,
                      std::mt19937_64* rng);

/// Throw unless the checkpoint was produced by configs hashing to
/// `expected`, or force is set.
void require_matching_config(const Checkpoint& ckpt, std::uint64_t expected, bool force);

/// Single-file container: magic, JSON header, then raw little-endian arrays.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace latentcast
