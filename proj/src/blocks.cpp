#include "latentcast/blocks.hpp"

#include <cmath>
#include <string>

#include "latentcast/common.hpp"

namespace latentcast {

namespace F = torch::nn::functional;

torch::Tensor pad_lon_circular_lat_zero(const torch::Tensor& x, std::int64_t pad) {
  if (pad <= 0) return x;
  const std::int64_t last = x.dim() - 1;
  const std::int64_t w = x.size(last);
  if (pad > w) throw ShapeError("pad " + std::to_string(pad) + " exceeds longitude size");
  torch::Tensor wrapped = torch::cat(
      {x.narrow(last, w - pad, pad), x, x.narrow(last, 0, pad)}, last);
  return F::pad(wrapped, F::PadFuncOptions({0, 0, pad, pad}).mode(torch::kConstant).value(0));
}

std::int64_t norm_group_count(std::int64_t channels) {
  const std::int64_t g = std::min<std::int64_t>(8, channels);
  return (channels % g == 0) ? g : 1;
}

namespace {

/// Runs fn on a batched view of x, adding/removing a leading batch dim when
/// the caller passes a single sample.
template <typename Fn>
torch::Tensor with_batch(const torch::Tensor& x, std::int64_t batched_rank, Fn&& fn) {
  if (x.dim() == batched_rank) return fn(x);
  if (x.dim() == batched_rank - 1) return fn(x.unsqueeze(0)).squeeze(0);
  throw ShapeError("expected rank " + std::to_string(batched_rank) + " (batched) or " +
                   std::to_string(batched_rank - 1) + " input, got rank " +
                   std::to_string(x.dim()));
}

}  // namespace

MsrBlockImpl::MsrBlockImpl(MsrBlockOptions opts) : opts_(opts) {
  if (opts_.in_channels < 1 || opts_.out_channels < 1)
    throw ConfigError("msr block needs positive channel counts");
  conv3_ = register_module(
      "conv3", torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.in_channels, opts_.out_channels, 3)));
  conv5_ = register_module(
      "conv5", torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.in_channels, opts_.out_channels, 5)));
  fuse_ = register_module(
      "fuse", torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * opts_.out_channels, opts_.out_channels, 1)));
  if (opts_.normalize) {
    const std::int64_t g = norm_group_count(opts_.out_channels);
    norm3_ = register_module("norm3", torch::nn::GroupNorm(g, opts_.out_channels));
    norm5_ = register_module("norm5", torch::nn::GroupNorm(g, opts_.out_channels));
  }
  if (opts_.in_channels != opts_.out_channels)
    proj_ = register_module(
        "proj", torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.in_channels, opts_.out_channels, 1)));
}

torch::Tensor MsrBlockImpl::forward(const torch::Tensor& x) {
  return with_batch(x, 4, [&](const torch::Tensor& xb) {
    torch::Tensor b3 = conv3_->forward(pad_lon_circular_lat_zero(xb, 1));
    torch::Tensor b5 = conv5_->forward(pad_lon_circular_lat_zero(xb, 2));
    if (opts_.normalize) {
      b3 = norm3_->forward(b3);
      b5 = norm5_->forward(b5);
    }
    b3 = torch::silu(b3);
    b5 = torch::silu(b5);
    torch::Tensor fused = fuse_->forward(torch::cat({b3, b5}, 1));
    torch::Tensor res = proj_ ? proj_->forward(xb) : xb;
    return fused + res;
  });
}

TemporalConv3dImpl::TemporalConv3dImpl(std::int64_t channels, bool residual)
    : residual_(residual) {
  if (channels < 1) throw ConfigError("temporal conv needs positive channel count");
  auto opts = torch::nn::Conv3dOptions(channels, channels, {2, 3, 3});
  conv1_ = register_module("conv1", torch::nn::Conv3d(opts));
  conv2_ = register_module("conv2", torch::nn::Conv3d(opts));
}

torch::Tensor TemporalConv3dImpl::forward(const torch::Tensor& x) {
  return with_batch(x, 5, [&](const torch::Tensor& xb) {
    if (xb.size(1) != 2)
      throw ShapeError("temporal conv expects exactly 2 time steps, got " +
                       std::to_string(xb.size(1)));
    // [B, T, d, H, W] -> [B, d, T, H, W] for the convolution's channel layout.
    torch::Tensor h = xb.permute({0, 2, 1, 3, 4});
    // Layer 1 replicates the trailing step, layer 2 the leading step, so the
    // pair of valid (time-kernel 2) convolutions preserves T=2 while letting
    // information flow in both temporal directions.
    torch::Tensor p1 = torch::cat({h, h.narrow(2, 1, 1)}, 2);
    torch::Tensor y = conv1_->forward(pad_lon_circular_lat_zero(p1, 1));
    y = torch::silu(y);
    torch::Tensor p2 = torch::cat({y.narrow(2, 0, 1), y}, 2);
    y = conv2_->forward(pad_lon_circular_lat_zero(p2, 1));
    y = y.permute({0, 2, 1, 3, 4});
    return residual_ ? xb + y : y;
  });
}

PatchifyImpl::PatchifyImpl(std::int64_t in_channels, std::int64_t embed_dim,
                           std::int64_t token_h, std::int64_t token_w, std::int64_t patch)
    : patch_(patch), token_h_(token_h), token_w_(token_w) {
  if (patch_ < 1 || token_h_ < 1 || token_w_ < 1)
    throw ConfigError("patchify needs positive patch and token grid sizes");
  proj_ = register_module(
      "proj", torch::nn::Conv2d(
                  torch::nn::Conv2dOptions(in_channels, embed_dim, patch_).stride(patch_)));
  pos_embed_ = register_parameter(
      "pos_embed", 0.02 * torch::randn({1, embed_dim, token_h_, token_w_}));
}

torch::Tensor PatchifyImpl::forward(const torch::Tensor& x) {
  return with_batch(x, 4, [&](const torch::Tensor& xb) {
    if (xb.size(2) != token_h_ * patch_ || xb.size(3) != token_w_ * patch_)
      throw ShapeError("patchify configured for " + std::to_string(token_h_ * patch_) + "x" +
                       std::to_string(token_w_ * patch_) + " grids, got " +
                       std::to_string(xb.size(2)) + "x" + std::to_string(xb.size(3)));
    return proj_->forward(xb) + pos_embed_;
  });
}

torch::Tensor tokens_to_seq(const torch::Tensor& tokens) {
  if (tokens.dim() != 4) throw ShapeError("tokens_to_seq expects [B, D, h, w]");
  return tokens.flatten(2).transpose(1, 2).contiguous();
}

torch::Tensor seq_to_tokens(const torch::Tensor& seq, std::int64_t h, std::int64_t w) {
  if (seq.dim() != 3 || seq.size(1) != h * w)
    throw ShapeError("seq_to_tokens expects [B, h*w, D]");
  return seq.transpose(1, 2).reshape({seq.size(0), seq.size(2), h, w}).contiguous();
}

MultiHeadAttentionImpl::MultiHeadAttentionImpl(std::int64_t dim, std::int64_t heads)
    : heads_(heads) {
  if (heads < 1 || dim % heads != 0)
    throw ConfigError("attention dim " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  qkv_ = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  out_ = register_module("out", torch::nn::Linear(dim, dim));
}

std::pair<torch::Tensor, torch::Tensor> MultiHeadAttentionImpl::forward_attn(
    const torch::Tensor& x) {
  if (x.dim() != 3) throw ShapeError("attention expects [B, N, D]");
  const std::int64_t B = x.size(0), N = x.size(1), D = x.size(2);
  const std::int64_t hd = D / heads_;
  torch::Tensor qkv = qkv_->forward(x).reshape({B, N, 3, heads_, hd}).permute({2, 0, 3, 1, 4});
  torch::Tensor q = qkv[0], k = qkv[1], v = qkv[2];  // [B, heads, N, hd]
  torch::Tensor scores = torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(hd));
  torch::Tensor attn = torch::softmax(scores, -1);  // [B, heads, N, N]
  torch::Tensor ctx = torch::matmul(attn, v);       // [B, heads, N, hd]
  ctx = ctx.transpose(1, 2).reshape({B, N, D});
  return {out_->forward(ctx), attn};
}

torch::Tensor MultiHeadAttentionImpl::forward(const torch::Tensor& x) {
  return forward_attn(x).first;
}

VitBlockImpl::VitBlockImpl(std::int64_t dim, std::int64_t heads, std::int64_t mlp_ratio) {
  norm1_ = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm2_ = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attn_ = register_module("attn", MultiHeadAttention(dim, heads));
  mlp_in_ = register_module("mlp_in", torch::nn::Linear(dim, mlp_ratio * dim));
  mlp_out_ = register_module("mlp_out", torch::nn::Linear(mlp_ratio * dim, dim));
}

std::pair<torch::Tensor, torch::Tensor> VitBlockImpl::forward_attn(const torch::Tensor& x) {
  auto [attended, attn] = attn_->forward_attn(norm1_->forward(x));
  torch::Tensor h = x + attended;
  h = h + mlp_out_->forward(torch::gelu(mlp_in_->forward(norm2_->forward(h))));
  return {h, attn};
}

torch::Tensor VitBlockImpl::forward(const torch::Tensor& x) { return forward_attn(x).first; }

PatchRecoveryImpl::PatchRecoveryImpl(std::int64_t embed_dim, std::int64_t out_channels,
                                     std::int64_t patch)
    : out_channels_(out_channels), patch_(patch) {
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({embed_dim})));
  linear_ = register_module(
      "linear", torch::nn::Linear(embed_dim, out_channels * patch * patch));
}

torch::Tensor PatchRecoveryImpl::forward(const torch::Tensor& tokens) {
  return with_batch(tokens, 4, [&](const torch::Tensor& tb) {
    const std::int64_t B = tb.size(0), h = tb.size(2), w = tb.size(3);
    torch::Tensor seq = tb.permute({0, 2, 3, 1});              // [B, h, w, D]
    torch::Tensor vals = linear_->forward(norm_->forward(seq));  // [B, h, w, C*p*p]
    vals = vals.reshape({B, h, w, out_channels_, patch_, patch_});
    return vals.permute({0, 3, 1, 4, 2, 5})
        .reshape({B, out_channels_, h * patch_, w * patch_})
        .contiguous();
  });
}

}  // namespace latentcast
