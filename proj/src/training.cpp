#include "latentcast/training.hpp"

#include <torch/nn/utils/clip_grad.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "latentcast/common.hpp"
#include "latentcast/config.hpp"

namespace latentcast {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (curriculum_iters.empty() || curriculum_iters.size() != curriculum_boundaries.size())
    throw ConfigError("curriculum_iters and curriculum_boundaries must have equal length");
  if (curriculum_boundaries.front() != 0)
    throw ConfigError("the first curriculum stage must start at epoch 0");
  for (std::size_t i = 1; i < curriculum_boundaries.size(); ++i) {
    if (curriculum_boundaries[i] <= curriculum_boundaries[i - 1])
      throw ConfigError("curriculum boundaries must be strictly increasing");
    if (curriculum_iters[i] <= curriculum_iters[i - 1])
      throw ConfigError("curriculum iteration counts must be strictly increasing");
  }
  if (curriculum_boundaries.back() >= epochs)
    throw ConfigError("the last curriculum stage starts past the final epoch");
  for (int t : curriculum_iters)
    if (t < 1) throw ConfigError("curriculum iteration counts must be positive");
  if (lr0 <= 0 || lr_decay <= 0 || lr_decay > 1 || lr_decay_every < 1 || lr_freeze_epoch < 0)
    throw ConfigError("invalid learning-rate schedule");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1 || eps <= 0)
    throw ConfigError("invalid optimizer moments");
  if (weight_decay < 0 || clip_norm < 0) throw ConfigError("negative decay or clip norm");
  if (batch < 1 || steps_per_epoch < 1) throw ConfigError("batch and steps must be positive");
  if (val_fraction < 0 || val_fraction > 0.5)
    throw ConfigError("val_fraction must lie in [0, 0.5]");
  if (intervals.empty()) throw ConfigError("at least one prediction stride is required");
  for (int s : intervals)
    if (s != 1 && s != 2 && s != 4)
      throw ConfigError("prediction strides are limited to 1, 2, and 4");
}

TrainConfig desk_train_config() {
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.curriculum_iters = {2, 4};
  cfg.curriculum_boundaries = {0, 3};
  cfg.batch = 8;
  cfg.steps_per_epoch = 32;
  return cfg;
}

int curriculum_iters(int epoch, const TrainConfig& cfg) {
  cfg.validate();
  if (epoch < 0 || epoch >= cfg.epochs)
    throw ConfigError("epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(cfg.epochs) + ")");
  std::size_t stage = 0;
  for (std::size_t i = 0; i < cfg.curriculum_boundaries.size(); ++i)
    if (cfg.curriculum_boundaries[i] <= epoch) stage = i;
  return cfg.curriculum_iters[stage];
}

double learning_rate(int epoch, const TrainConfig& cfg) {
  cfg.validate();
  if (epoch < 0 || epoch >= cfg.epochs)
    throw ConfigError("epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(cfg.epochs) + ")");
  const int e = std::min(epoch, cfg.lr_freeze_epoch);
  return cfg.lr0 * std::pow(cfg.lr_decay, static_cast<double>(e / cfg.lr_decay_every));
}

namespace {

std::vector<std::pair<std::string, torch::Tensor>> named_params(ForecastModel& model) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& p : model->named_parameters()) out.emplace_back(p.key(), p.value());
  return out;
}

}  // namespace

StepRecord train_step(ForecastModel& model, AdamW& opt, const GridField& train_norm,
                      const VariableCatalog& cat, const LossWeights& wts,
                      const TrainConfig& cfg, int epoch, std::int64_t global_step,
                      std::mt19937_64& rng) {
  const int T = curriculum_iters(epoch, cfg);
  const int s = cfg.intervals[static_cast<std::size_t>(
      uniform_index(rng, static_cast<std::int64_t>(cfg.intervals.size())))];
  const std::int64_t lo = s;
  const std::int64_t hi = train_norm.steps() - 1 - static_cast<std::int64_t>(s) * T;
  if (hi < lo)
    throw DataError("training series of " + std::to_string(train_norm.steps()) +
                    " steps cannot fit stride " + std::to_string(s) + " with " +
                    std::to_string(T) + " iterations");
  std::vector<std::int64_t> inits(static_cast<std::size_t>(cfg.batch));
  for (auto& t : inits) t = lo + uniform_index(rng, hi - lo + 1);

  const torch::Tensor idx = torch::tensor(inits);
  const torch::Tensor& series = train_norm.data;
  torch::Tensor inputs =
      torch::stack({series.index_select(0, idx - s), series.index_select(0, idx)}, 1);
  std::vector<torch::Tensor> steps;
  for (int k = 1; k <= T; ++k) steps.push_back(series.index_select(0, idx + k * s));
  torch::Tensor targets = torch::stack(steps, 1);  // [B, T, C, H, W]

  torch::Tensor h_target = model->encode(targets).detach();
  torch::Tensor h_in = model->encode(inputs);  // [B, 2, d, H, W]

  torch::Tensor h_prev = h_in.select(1, 0);
  torch::Tensor h_curr = h_in.select(1, 1);
  std::vector<std::int64_t> prev_hours(inits.size()), curr_hours(inits.size());
  std::vector<torch::Tensor> preds;
  for (int k = 1; k <= T; ++k) {
    for (std::size_t b = 0; b < inits.size(); ++b) {
      prev_hours[b] = train_norm.time_at(inits[b] + static_cast<std::int64_t>(k - 2) * s);
      curr_hours[b] = train_norm.time_at(inits[b] + static_cast<std::int64_t>(k - 1) * s);
    }
    torch::Tensor p = model->lpm_step(s, h_prev, h_curr, prev_hours, curr_hours);
    preds.push_back(p);
    h_prev = h_curr;
    h_curr = p;
  }
  torch::Tensor h_pred = torch::stack(preds, 1);  // [B, T, d, H, W]

  const torch::Tensor kidx = torch::tensor(cat.key_indices);
  torch::Tensor loss_key = key_loss(model->decode(h_pred), targets.index_select(2, kidx), wts);
  torch::Tensor loss_recon =
      recon_loss(model->decode(h_in), inputs.index_select(2, kidx), wts.a);
  torch::Tensor loss_latent =
      latent_loss(h_pred, h_target, wts.a, torch::ones({T}, torch::kFloat64));
  torch::Tensor loss = total_loss(loss_key, loss_recon, loss_latent);

  opt.set_lr(learning_rate(epoch, cfg));
  opt.zero_grad();
  loss.backward();
  if (cfg.clip_norm > 0)
    torch::nn::utils::clip_grad_norm_(model->parameters(), cfg.clip_norm);
  opt.step();

  StepRecord rec;
  rec.step = global_step;
  rec.epoch = epoch;
  rec.interval = s;
  rec.t_train = T;
  rec.loss_key = loss_key.item<double>();
  rec.loss_recon = loss_recon.item<double>();
  rec.loss_latent = loss_latent.item<double>();
  rec.loss_total = loss.item<double>();
  rec.lr = opt.lr();
  return rec;
}

double validation_key_loss(ForecastModel& model, const GridField& val_norm,
                           const VariableCatalog& cat, const LossWeights& wts, int batch) {
  if (batch < 1) throw ConfigError("validation batch must be positive");
  torch::NoGradGuard guard;
  constexpr int kStride = 1, kSteps = 2;
  const std::int64_t lo = kStride;
  const std::int64_t hi = val_norm.steps() - 1 - kStride * kSteps;
  if (hi < lo)
    throw DataError("validation series of " + std::to_string(val_norm.steps()) +
                    " steps is too short for a two-step window");
  const std::int64_t count = hi - lo + 1;
  const std::int64_t take = std::min<std::int64_t>(64, count);
  std::vector<std::int64_t> inits(static_cast<std::size_t>(take));
  for (std::int64_t i = 0; i < take; ++i)
    inits[static_cast<std::size_t>(i)] =
        take == 1 ? lo : lo + (i * (count - 1)) / (take - 1);

  const torch::Tensor kidx = torch::tensor(cat.key_indices);
  const torch::Tensor& series = val_norm.data;
  double total = 0.0;
  std::int64_t seen = 0;
  for (std::int64_t at = 0; at < take; at += batch) {
    const std::int64_t n = std::min<std::int64_t>(batch, take - at);
    std::vector<std::int64_t> chunk(inits.begin() + at, inits.begin() + at + n);
    const torch::Tensor idx = torch::tensor(chunk);
    torch::Tensor inputs =
        torch::stack({series.index_select(0, idx - kStride), series.index_select(0, idx)}, 1);
    torch::Tensor h_in = model->encode(inputs);
    torch::Tensor h_prev = h_in.select(1, 0);
    torch::Tensor h_curr = h_in.select(1, 1);
    std::vector<std::int64_t> prev_hours(chunk.size()), curr_hours(chunk.size());
    std::vector<torch::Tensor> preds, truths;
    for (int k = 1; k <= kSteps; ++k) {
      for (std::size_t b = 0; b < chunk.size(); ++b) {
        prev_hours[b] = val_norm.time_at(chunk[b] + static_cast<std::int64_t>(k - 2) * kStride);
        curr_hours[b] = val_norm.time_at(chunk[b] + static_cast<std::int64_t>(k - 1) * kStride);
      }
      torch::Tensor p = model->lpm_step(kStride, h_prev, h_curr, prev_hours, curr_hours);
      preds.push_back(p);
      truths.push_back(series.index_select(0, idx + k * kStride));
      h_prev = h_curr;
      h_curr = p;
    }
    torch::Tensor key_t = torch::stack(truths, 1).index_select(2, kidx);
    torch::Tensor loss = key_loss(model->decode(torch::stack(preds, 1)), key_t, wts);
    total += loss.item<double>() * static_cast<double>(n);
    seen += n;
  }
  return total / static_cast<double>(seen);
}

FitResult fit(const GridField& raw, const VariableCatalog& cat, const ModelConfig& mcfg,
              const TrainConfig& tcfg, const torch::Tensor& constant_fields,
              const std::function<void(const StepRecord&)>& on_step, const Checkpoint* resume,
              bool force_resume, const EpochFn& on_epoch) {
  mcfg.validate();
  tcfg.validate();
  raw.validate();
  cat.validate();
  if (raw.channels() != mcfg.in_channels || raw.height() != mcfg.height ||
      raw.width() != mcfg.width)
    throw DataError("dataset shape [" + std::to_string(raw.channels()) + "," +
                    std::to_string(raw.height()) + "," + std::to_string(raw.width()) +
                    "] does not match the model configuration");
  if (cat.num_channels() != mcfg.in_channels || cat.key_indices != mcfg.key_indices)
    throw ConfigError("catalog channels/keys do not match the model configuration");

  const nlohmann::json mjson = model_config_to_json(mcfg);
  const nlohmann::json tjson = train_config_to_json(tcfg);
  if (resume) {
    Checkpoint probe;
    probe.model_config = mjson;
    probe.train_config = tjson;
    probe.catalog = cat;
    require_matching_config(*resume, probe.config_hash(), force_resume);
    if (resume->epoch >= tcfg.epochs)
      throw ConfigError("checkpoint already completed epoch " + std::to_string(resume->epoch) +
                        " of " + std::to_string(tcfg.epochs) + "; nothing left to train");
  }

  const std::int64_t total = raw.steps();
  const auto n_val = static_cast<std::int64_t>(std::llround(tcfg.val_fraction * total));
  if (tcfg.val_fraction > 0 && n_val < 4)
    throw ConfigError("validation split of " + std::to_string(n_val) +
                      " steps is too short; lower val_fraction or set it to 0");
  const GridField train_raw = n_val > 0 ? raw.slice_time(0, total - n_val) : raw;
  // Normalization is part of the model contract: a resumed run keeps the
  // stats its parameters were trained under instead of recomputing them.
  const NormalizationStats stats = resume ? resume->stats : compute_stats(train_raw);
  const GridField train = normalize(train_raw, stats);
  std::optional<GridField> val;
  if (n_val > 0) val = normalize(raw.slice_time(total - n_val, n_val), stats);
  const LossWeights wts = make_loss_weights(cat, stats, raw.lat);

  torch::manual_seed(tcfg.seed);
  ForecastModel model(mcfg, constant_fields);
  AdamW opt(named_params(model),
            AdamWOptions{learning_rate(0, tcfg), tcfg.beta1, tcfg.beta2, tcfg.eps,
                         tcfg.weight_decay});
  std::mt19937_64 rng(tcfg.seed);
  int start_epoch = 0;
  if (resume) {
    restore_training(*resume, model, &opt, &rng);
    start_epoch = resume->epoch;
  }

  FitResult res;
  for (int epoch = start_epoch; epoch < tcfg.epochs; ++epoch) {
    for (int k = 0; k < tcfg.steps_per_epoch; ++k) {
      const std::int64_t gstep =
          static_cast<std::int64_t>(epoch) * tcfg.steps_per_epoch + k;
      StepRecord rec = train_step(model, opt, train, cat, wts, tcfg, epoch, gstep, rng);
      if (on_step) on_step(rec);
      res.log.push_back(rec);
    }
    std::optional<double> v;
    if (val) {
      v = validation_key_loss(model, *val, cat, wts, tcfg.batch);
      res.val_key_loss.push_back(*v);
    }
    if (on_epoch)
      on_epoch(make_checkpoint(model, opt, cat, stats, mjson, tjson, epoch + 1, rng), v);
  }
  res.checkpoint = make_checkpoint(model, opt, cat, stats, mjson, tjson, tcfg.epochs, rng);
  return res;
}

void write_training_log(const std::vector<StepRecord>& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open training log '" + path + "' for writing");
  out << "step,epoch,interval,T_train,loss_key,loss_recon,loss_latent,loss_total,lr\n";
  char line[320];
  for (const StepRecord& r : log) {
    std::snprintf(line, sizeof(line), "%lld,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.step), r.epoch, r.interval, r.t_train, r.loss_key,
                  r.loss_recon, r.loss_latent, r.loss_total, r.lr);
    out << line;
  }
  if (!out) throw IoError("failed writing training log '" + path + "'");
}

}  // namespace latentcast
