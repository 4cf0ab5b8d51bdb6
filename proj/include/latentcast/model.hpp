#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "latentcast/blocks.hpp"
#include "latentcast/catalog.hpp"
#include "latentcast/embeddings.hpp"
#include "latentcast/grid.hpp"

namespace latentcast {

/// Latent trajectory: data [T, d, H, W] with step labels aligned to the time
/// axis (labels <= 0 are history, >= 1 are forecast leads).
struct LatentState {
  torch::Tensor data;
  std::vector<int> step_labels;
};

struct VitConfig {
  std::int64_t patch = 4;
  std::int64_t dim = 768;
  std::int64_t depth = 8;
  std::int64_t heads = 12;
  std::int64_t mlp_ratio = 4;
};

/// Shape/architecture description of the full encode-predict-decode stack.
struct ModelConfig {
  std::int64_t in_channels = 104;   // C
  std::int64_t key_channels = 20;   // c
  std::int64_t latent_channels = 24;  // d
  std::int64_t height = 32;
  std::int64_t width = 64;
  std::vector<std::int64_t> key_indices;  // within [0, C)

  // Output widths of the four residual blocks in each stack. The encoder's
  // last width must equal d, the predictor trunk's 2d, its tail's d.
  std::vector<std::int64_t> encoder_channels = {64, 48, 32, 24};
  std::vector<std::int64_t> decoder_channels = {48, 64, 64, 64};
  std::vector<std::int64_t> lpm_pre_channels = {96, 64, 48, 48};
  std::vector<std::int64_t> lpm_post_channels = {48, 32, 24, 24};

  VitConfig vit;
  std::int64_t time_cycles = 15;
  std::int64_t embed_hidden = 128;
  std::int64_t time_channels = 12;
  std::int64_t const_channels = 12;
  std::int64_t const_in_channels = 2;
  bool normalize = true;  // GroupNorm in residual blocks

  void validate() const;
};

/// Full-scale configuration (104-variable catalog geometry).
ModelConfig paper_model_config();
/// Small configuration for the 12-channel synthetic dataset on a 16x32 grid.
ModelConfig desk_model_config();

/// Per-sample channel reweighting scores. corr = x_flat k_flat^T over the
/// grid; raw score is mean_c |corr|; the module applies sigmoid(gain*raw+b).
torch::Tensor channel_attention_raw(const torch::Tensor& x, const torch::Tensor& key_idx);

/// Channel-attention reweighting followed by four residual blocks down to d
/// latent channels. Time steps (and batch samples) are processed
/// independently and identically.
class EncoderImpl : public torch::nn::Module {
 public:
  explicit EncoderImpl(const ModelConfig& cfg);

  /// [C,H,W], [T,C,H,W] or [B,T,C,H,W] -> same leading dims with d channels.
  torch::Tensor forward(const torch::Tensor& x);

  /// (raw scores, sigmoid scores), each [N, C] for N flattened samples.
  std::pair<torch::Tensor, torch::Tensor> attention_scores(const torch::Tensor& x);

 private:
  torch::Tensor flat_forward(const torch::Tensor& x);  // [N, C, H, W]

  ModelConfig cfg_;
  torch::Tensor key_idx_;
  torch::Tensor gain_, bias_;
  std::vector<MsrBlock> blocks_;
};
TORCH_MODULE(Encoder);

/// Four residual blocks then a 1x1 projection (zero-initialized) to the key
/// channels. Per-step independent like the encoder.
class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const ModelConfig& cfg);

  /// [d,H,W], [T,d,H,W] or [B,T,d,H,W] -> key channels c.
  torch::Tensor forward(const torch::Tensor& h);

 private:
  std::vector<MsrBlock> blocks_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(Decoder);

/// One latent prediction model: residual trunk over the concatenated
/// [2d + time + const] channels, two-step temporal convolution, patchified
/// transformer, patch recovery, and a residual tail back to d channels.
class LpmImpl : public torch::nn::Module {
 public:
  LpmImpl(const ModelConfig& cfg, int interval);

  int interval() const { return interval_; }

  /// [B, 2d + time + const, H, W] -> [B, d, H, W].
  torch::Tensor forward(const torch::Tensor& x);

  /// Attention probabilities of each transformer block for one input,
  /// [depth][B, heads, N, N] (diagnostic pass, no grad).
  std::vector<torch::Tensor> attention_maps(const torch::Tensor& x);

 private:
  torch::Tensor trunk(const torch::Tensor& x, std::vector<torch::Tensor>* attn_out);

  int interval_;
  std::int64_t d_;
  std::vector<MsrBlock> pre_, post_;
  TemporalConv3d tconv_{nullptr};
  Patchify patchify_{nullptr};
  std::vector<VitBlock> vit_;
  PatchRecovery recovery_{nullptr};
};
TORCH_MODULE(Lpm);

/// The complete forecasting system: shared encoder/decoder, three interval
/// models (strides 1, 2, 4), shared time/constant embeddings, and the
/// constant fields as a buffer.
class ForecastModelImpl : public torch::nn::Module {
 public:
  ForecastModelImpl(const ModelConfig& cfg, torch::Tensor constant_fields);

  const ModelConfig& config() const { return cfg_; }

  torch::Tensor encode(const torch::Tensor& x) { return encoder_->forward(x); }
  torch::Tensor decode(const torch::Tensor& h) { return decoder_->forward(h); }
  Encoder& encoder() { return encoder_; }
  Decoder& decoder() { return decoder_; }
  Lpm& lpm(int interval);
  TimeEmbed& time_embed() { return time_embed_; }
  ConstEmbed& const_embed() { return const_embed_; }
  torch::Tensor constant_fields() const { return constants_; }

  /// One latent prediction with the stride-`interval` model. Latents are
  /// [B, d, H, W] (or [d, H, W] for one sample); hour stamps are per sample
  /// (size B, or size 1 broadcast).
  torch::Tensor lpm_step(int interval, const torch::Tensor& h_prev, const torch::Tensor& h_curr,
                         const std::vector<std::int64_t>& prev_hours,
                         const std::vector<std::int64_t>& curr_hours);

  /// Minimal-iteration rollout over the scheduled plan. history is
  /// [5, d, H, W] (labels -4..0, chronological; label 0 at t0_hours).
  /// Returns [n, d, H, W].
  torch::Tensor rollout_latents(const torch::Tensor& history, int n, std::int64_t t0_hours,
                                int dt_hours);

  /// Parameters that train together with a given interval model: encoder,
  /// decoder, embeddings, and that one model.
  std::vector<torch::Tensor> trainable_parameters(int interval);

  const std::map<int, std::int64_t>& lpm_call_counts() const { return lpm_calls_; }
  void reset_lpm_call_counts();

 private:
  ModelConfig cfg_;
  Encoder encoder_{nullptr};
  Decoder decoder_{nullptr};
  Lpm lpm1_{nullptr}, lpm2_{nullptr}, lpm4_{nullptr};
  TimeEmbed time_embed_{nullptr};
  ConstEmbed const_embed_{nullptr};
  torch::Tensor constants_;
  std::map<int, std::int64_t> lpm_calls_;
};
TORCH_MODULE(ForecastModel);

}  // namespace latentcast
