#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <utility>

namespace latentcast {

/// Pad the last dim circularly (longitude wraps) and the second-to-last dim
/// with zeros (latitude does not wrap). Works for any rank >= 2.
torch::Tensor pad_lon_circular_lat_zero(const torch::Tensor& x, std::int64_t pad);

/// GroupNorm group count rule: min(8, channels), falling back to 1 when that
/// does not divide the channel count.
std::int64_t norm_group_count(std::int64_t channels);

struct MsrBlockOptions {
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  // Normalization can be switched off; GroupNorm couples distant grid cells
  // through its spatial statistics, and the norm-free configuration keeps the
  // block strictly local (used by ablations and locality checks).
  bool normalize = true;
};

/// Multi-scale residual block: parallel 3x3 and 5x5 convolution branches
/// (each convolution + GroupNorm + SiLU, each producing out_channels),
/// concatenated and fused by a 1x1 convolution, plus a residual connection
/// (identity when channel counts match, else a 1x1 projection).
class MsrBlockImpl : public torch::nn::Module {
 public:
  explicit MsrBlockImpl(MsrBlockOptions opts);

  /// [B, Cin, H, W] -> [B, Cout, H, W]; a rank-3 input is treated as one sample.
  torch::Tensor forward(const torch::Tensor& x);

  const MsrBlockOptions& options() const { return opts_; }

 private:
  MsrBlockOptions opts_;
  torch::nn::Conv2d conv3_{nullptr}, conv5_{nullptr}, fuse_{nullptr}, proj_{nullptr};
  torch::nn::GroupNorm norm3_{nullptr}, norm5_{nullptr};
};
TORCH_MODULE(MsrBlock);

/// Two 3D convolutions (kernel 2x3x3 over time/lat/lon) with SiLU between,
/// mixing exactly two time steps while preserving shape. The first layer
/// replicates the trailing step, the second the leading step, so both output
/// steps depend on both input steps. Optional residual connection.
class TemporalConv3dImpl : public torch::nn::Module {
 public:
  explicit TemporalConv3dImpl(std::int64_t channels, bool residual = true);

  /// [B, 2, d, H, W] -> same shape; rank-4 input is one sample.
  torch::Tensor forward(const torch::Tensor& x);

 private:
  bool residual_;
  torch::nn::Conv3d conv1_{nullptr}, conv2_{nullptr};
};
TORCH_MODULE(TemporalConv3d);

/// Non-overlapping patch projection: strided convolution (kernel = stride =
/// patch) into embed_dim channels plus a learned per-position embedding.
class PatchifyImpl : public torch::nn::Module {
 public:
  PatchifyImpl(std::int64_t in_channels, std::int64_t embed_dim, std::int64_t token_h,
               std::int64_t token_w, std::int64_t patch = 4);

  /// [B, C, H, W] -> [B, embed_dim, H/patch, W/patch].
  torch::Tensor forward(const torch::Tensor& x);

  std::int64_t patch() const { return patch_; }

 private:
  std::int64_t patch_, token_h_, token_w_;
  torch::nn::Conv2d proj_{nullptr};
  torch::Tensor pos_embed_;
};
TORCH_MODULE(Patchify);

/// [B, D, h, w] token image -> [B, h*w, D] sequence, and back.
torch::Tensor tokens_to_seq(const torch::Tensor& tokens);
torch::Tensor seq_to_tokens(const torch::Tensor& seq, std::int64_t h, std::int64_t w);

/// Standard multi-head self-attention over [B, N, D] sequences, written out
/// explicitly so the attention probabilities are inspectable.
class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(std::int64_t dim, std::int64_t heads);

  torch::Tensor forward(const torch::Tensor& x);
  /// Returns (output, attention probabilities [B, heads, N, N]).
  std::pair<torch::Tensor, torch::Tensor> forward_attn(const torch::Tensor& x);

 private:
  std::int64_t heads_;
  torch::nn::Linear qkv_{nullptr}, out_{nullptr};
};
TORCH_MODULE(MultiHeadAttention);

/// Pre-norm transformer block: x + MHA(LN(x)), then x + MLP(LN(x)) with GELU
/// and hidden width mlp_ratio * dim.
class VitBlockImpl : public torch::nn::Module {
 public:
  VitBlockImpl(std::int64_t dim, std::int64_t heads, std::int64_t mlp_ratio);

  torch::Tensor forward(const torch::Tensor& x);
  std::pair<torch::Tensor, torch::Tensor> forward_attn(const torch::Tensor& x);

 private:
  torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
  MultiHeadAttention attn_{nullptr};
  torch::nn::Linear mlp_in_{nullptr}, mlp_out_{nullptr};
};
TORCH_MODULE(VitBlock);

/// Token-to-grid recovery: LayerNorm over the token dim, a linear map to
/// out_channels * patch^2 values per token, and a reshape back to the grid.
class PatchRecoveryImpl : public torch::nn::Module {
 public:
  PatchRecoveryImpl(std::int64_t embed_dim, std::int64_t out_channels, std::int64_t patch = 4);

  /// [B, D, h, w] -> [B, out_channels, h*patch, w*patch].
  torch::Tensor forward(const torch::Tensor& tokens);

 private:
  std::int64_t out_channels_, patch_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear linear_{nullptr};
};
TORCH_MODULE(PatchRecovery);

}  // namespace latentcast
