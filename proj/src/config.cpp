#include "latentcast/config.hpp"

#include <string>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

using nlohmann::json;

template <typename T>
void get_field(const json& j, const char* ctx, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(ctx) + "." + key + ": " + e.what());
  }
}

}  // namespace

void require_allowed_keys(const json& obj, const char* ctx,
                          std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ConfigError(std::string(ctx) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(std::string(ctx) + ": unknown key '" + key + "'");
  }
}

json model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["in_channels"] = cfg.in_channels;
  j["key_channels"] = cfg.key_channels;
  j["latent_channels"] = cfg.latent_channels;
  j["height"] = cfg.height;
  j["width"] = cfg.width;
  j["key_indices"] = cfg.key_indices;
  j["encoder_channels"] = cfg.encoder_channels;
  j["decoder_channels"] = cfg.decoder_channels;
  j["lpm_pre_channels"] = cfg.lpm_pre_channels;
  j["lpm_post_channels"] = cfg.lpm_post_channels;
  j["vit"] = {{"patch", cfg.vit.patch},
              {"dim", cfg.vit.dim},
              {"depth", cfg.vit.depth},
              {"heads", cfg.vit.heads},
              {"mlp_ratio", cfg.vit.mlp_ratio}};
  j["time_cycles"] = cfg.time_cycles;
  j["embed_hidden"] = cfg.embed_hidden;
  j["time_channels"] = cfg.time_channels;
  j["const_channels"] = cfg.const_channels;
  j["const_in_channels"] = cfg.const_in_channels;
  j["normalize"] = cfg.normalize;
  return j;
}

ModelConfig model_config_from_json(const json& j, ModelConfig base) {
  require_allowed_keys(j, "model",
                       {"in_channels", "key_channels", "latent_channels", "height", "width",
                        "key_indices", "encoder_channels", "decoder_channels",
                        "lpm_pre_channels", "lpm_post_channels", "vit", "time_cycles",
                        "embed_hidden", "time_channels", "const_channels", "const_in_channels",
                        "normalize"});
  get_field(j, "model", "in_channels", base.in_channels);
  get_field(j, "model", "key_channels", base.key_channels);
  get_field(j, "model", "latent_channels", base.latent_channels);
  get_field(j, "model", "height", base.height);
  get_field(j, "model", "width", base.width);
  get_field(j, "model", "key_indices", base.key_indices);
  get_field(j, "model", "encoder_channels", base.encoder_channels);
  get_field(j, "model", "decoder_channels", base.decoder_channels);
  get_field(j, "model", "lpm_pre_channels", base.lpm_pre_channels);
  get_field(j, "model", "lpm_post_channels", base.lpm_post_channels);
  if (j.contains("vit")) {
    const json& v = j.at("vit");
    require_allowed_keys(v, "model.vit", {"patch", "dim", "depth", "heads", "mlp_ratio"});
    get_field(v, "model.vit", "patch", base.vit.patch);
    get_field(v, "model.vit", "dim", base.vit.dim);
    get_field(v, "model.vit", "depth", base.vit.depth);
    get_field(v, "model.vit", "heads", base.vit.heads);
    get_field(v, "model.vit", "mlp_ratio", base.vit.mlp_ratio);
  }
  get_field(j, "model", "time_cycles", base.time_cycles);
  get_field(j, "model", "embed_hidden", base.embed_hidden);
  get_field(j, "model", "time_channels", base.time_channels);
  get_field(j, "model", "const_channels", base.const_channels);
  get_field(j, "model", "const_in_channels", base.const_in_channels);
  get_field(j, "model", "normalize", base.normalize);
  return base;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["epochs"] = cfg.epochs;
  j["curriculum_iters"] = cfg.curriculum_iters;
  j["curriculum_boundaries"] = cfg.curriculum_boundaries;
  j["lr0"] = cfg.lr0;
  j["lr_decay"] = cfg.lr_decay;
  j["lr_decay_every"] = cfg.lr_decay_every;
  j["lr_freeze_epoch"] = cfg.lr_freeze_epoch;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["eps"] = cfg.eps;
  j["weight_decay"] = cfg.weight_decay;
  j["clip_norm"] = cfg.clip_norm;
  j["batch"] = cfg.batch;
  j["steps_per_epoch"] = cfg.steps_per_epoch;
  j["val_fraction"] = cfg.val_fraction;
  j["intervals"] = cfg.intervals;
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  require_allowed_keys(j, "train",
                       {"epochs", "curriculum_iters", "curriculum_boundaries", "lr0", "lr_decay",
                        "lr_decay_every", "lr_freeze_epoch", "beta1", "beta2", "eps",
                        "weight_decay", "clip_norm", "batch", "steps_per_epoch", "val_fraction",
                        "intervals", "seed"});
  get_field(j, "train", "epochs", base.epochs);
  get_field(j, "train", "curriculum_iters", base.curriculum_iters);
  get_field(j, "train", "curriculum_boundaries", base.curriculum_boundaries);
  get_field(j, "train", "lr0", base.lr0);
  get_field(j, "train", "lr_decay", base.lr_decay);
  get_field(j, "train", "lr_decay_every", base.lr_decay_every);
  get_field(j, "train", "lr_freeze_epoch", base.lr_freeze_epoch);
  get_field(j, "train", "beta1", base.beta1);
  get_field(j, "train", "beta2", base.beta2);
  get_field(j, "train", "eps", base.eps);
  get_field(j, "train", "weight_decay", base.weight_decay);
  get_field(j, "train", "clip_norm", base.clip_norm);
  get_field(j, "train", "batch", base.batch);
  get_field(j, "train", "steps_per_epoch", base.steps_per_epoch);
  get_field(j, "train", "val_fraction", base.val_fraction);
  get_field(j, "train", "intervals", base.intervals);
  get_field(j, "train", "seed", base.seed);
  return base;
}

json synthetic_config_to_json(const SyntheticConfig& cfg) {
  json j;
  j["channels"] = cfg.channels;
  j["key_channels"] = cfg.key_channels;
  j["height"] = cfg.height;
  j["width"] = cfg.width;
  j["steps"] = cfg.steps;
  j["coupling"] = cfg.coupling;
  j["diffusion"] = cfg.diffusion;
  j["forcing"] = cfg.forcing;
  j["seed"] = cfg.seed;
  return j;
}

SyntheticConfig synthetic_config_from_json(const json& j, SyntheticConfig base) {
  require_allowed_keys(j, "synthetic",
                       {"channels", "key_channels", "height", "width", "steps", "coupling",
                        "diffusion", "forcing", "seed"});
  get_field(j, "synthetic", "channels", base.channels);
  get_field(j, "synthetic", "key_channels", base.key_channels);
  get_field(j, "synthetic", "height", base.height);
  get_field(j, "synthetic", "width", base.width);
  get_field(j, "synthetic", "steps", base.steps);
  get_field(j, "synthetic", "coupling", base.coupling);
  get_field(j, "synthetic", "diffusion", base.diffusion);
  get_field(j, "synthetic", "forcing", base.forcing);
  get_field(j, "synthetic", "seed", base.seed);
  return base;
}

}  // namespace latentcast
