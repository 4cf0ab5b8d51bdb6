#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "latentcast/checkpoint.hpp"
#include "latentcast/dataset.hpp"
#include "latentcast/grid.hpp"
#include "latentcast/losses.hpp"
#include "latentcast/model.hpp"
#include "latentcast/optim.hpp"

namespace latentcast {

/// Curriculum training schedule. `curriculum_boundaries[k]` is the first
/// epoch of stage k (so the stages tile [0, epochs)); `curriculum_iters[k]`
/// is how many times the chosen prediction model is iterated per sample in
/// that stage.
struct TrainConfig {
  int epochs = 65;
  std::vector<int> curriculum_iters = {2, 4, 6, 8};
  std::vector<int> curriculum_boundaries = {0, 50, 55, 60};
  double lr0 = 2e-4;
  double lr_decay = 0.5;
  int lr_decay_every = 10;
  int lr_freeze_epoch = 50;  // decay stops here; lr stays at its value
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 1.0;
  double clip_norm = 1.0;  // 0 disables clipping
  int batch = 32;
  int steps_per_epoch = 64;
  double val_fraction = 0.1;  // chronological tail split; 0 skips validation
  std::vector<int> intervals = {1, 2, 4};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Schedule for continuous integration: tiny batch, four epochs, one
/// curriculum switch at epoch 3.
TrainConfig desk_train_config();

/// Iterations per training sample at `epoch` (stage lookup). Pure; throws on
/// epoch outside [0, epochs).
int curriculum_iters(int epoch, const TrainConfig& cfg = TrainConfig{});

/// lr0 * lr_decay^floor(epoch / lr_decay_every), frozen from
/// lr_freeze_epoch onward. Pure; throws on epoch outside [0, epochs).
double learning_rate(int epoch, const TrainConfig& cfg = TrainConfig{});

/// One optimizer step's logged quantities.
struct StepRecord {
  std::int64_t step = 0;
  int epoch = 0;
  int interval = 0;
  int t_train = 0;
  double loss_key = 0, loss_recon = 0, loss_latent = 0, loss_total = 0, lr = 0;
};

/// One training step: choose a stride uniformly, sample a batch of windows
/// from the normalized training series, encode the two input steps, iterate
/// the chosen prediction model curriculum_iters(epoch) times on its own
/// outputs, decode, and apply one optimizer update (encoder, decoder,
/// embeddings, and the chosen model only).
StepRecord train_step(ForecastModel& model, AdamW& opt, const GridField& train_norm,
                      const VariableCatalog& cat, const LossWeights& wts,
                      const TrainConfig& cfg, int epoch, std::int64_t global_step,
                      std::mt19937_64& rng);

/// Deterministic validation metric: mean key loss over evenly spaced
/// two-step stride-1 windows of the normalized validation series (at most 64
/// windows). Read-only.
double validation_key_loss(ForecastModel& model, const GridField& val_norm,
                           const VariableCatalog& cat, const LossWeights& wts, int batch);

struct FitResult {
  Checkpoint checkpoint;
  std::vector<StepRecord> log;
  std::vector<double> val_key_loss;  // one entry per epoch (empty if no split)
};

/// Called after each epoch with a snapshot of the full training state and
/// that epoch's validation key loss (empty when there is no split).
using EpochFn = std::function<void(const Checkpoint&, std::optional<double> val_key_loss)>;

/// Full curriculum loop over a raw (unnormalized) series: split
/// chronologically, compute stats on the training part only, train, validate
/// each epoch, and snapshot the final state. `on_step` (optional) observes
/// every record as it is produced; `on_epoch` (optional) receives an
/// end-of-epoch checkpoint, enabling interruption-safe runs.
///
/// Passing `resume` restarts an interrupted run: model, optimizer, sampler
/// state, and normalization stats come from the checkpoint (stats are part of
/// the model contract and are NOT recomputed), the epoch loop continues at
/// `resume->epoch`, and step numbering continues without gaps. The
/// checkpoint's configs must hash-match the ones given here unless
/// `force_resume` is set; a checkpoint that already reached `tcfg.epochs` is
/// rejected.
FitResult fit(const GridField& raw, const VariableCatalog& cat, const ModelConfig& mcfg,
              const TrainConfig& tcfg, const torch::Tensor& constant_fields,
              const std::function<void(const StepRecord&)>& on_step = nullptr,
              const Checkpoint* resume = nullptr, bool force_resume = false,
              const EpochFn& on_epoch = nullptr);

/// CSV with columns step,epoch,interval,T_train,loss_key,loss_recon,
/// loss_latent,loss_total,lr.
void write_training_log(const std::vector<StepRecord>& log, const std::string& path);

}  // namespace latentcast
