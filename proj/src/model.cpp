#include "latentcast/model.hpp"

#include <set>
#include <string>

#include "latentcast/common.hpp"
#include "latentcast/htami.hpp"

namespace latentcast {

namespace {

std::vector<int> cycle_days(std::int64_t n) {
  std::vector<int> out;
  for (int k = 1; k <= static_cast<int>(n); ++k) out.push_back(k);
  return out;
}

void check_schedule(const std::vector<std::int64_t>& s, std::int64_t last, const char* name) {
  if (s.size() != 4) throw ConfigError(std::string(name) + " must list 4 block widths");
  for (std::int64_t c : s)
    if (c < 1) throw ConfigError(std::string(name) + " widths must be positive");
  if (last > 0 && s.back() != last)
    throw ConfigError(std::string(name) + " must end at " + std::to_string(last) +
                      " channels, got " + std::to_string(s.back()));
}

}  // namespace

void ModelConfig::validate() const {
  if (in_channels < 1 || key_channels < 1 || latent_channels < 1)
    throw ConfigError("channel counts must be positive");
  if (key_channels > in_channels) throw ConfigError("more key channels than channels");
  if (latent_channels >= in_channels)
    throw ConfigError("latent width " + std::to_string(latent_channels) +
                      " does not compress " + std::to_string(in_channels) + " channels");
  if (static_cast<std::int64_t>(key_indices.size()) != key_channels)
    throw ConfigError("key_indices must list every key channel");
  std::set<std::int64_t> seen;
  for (std::int64_t k : key_indices) {
    if (k < 0 || k >= in_channels) throw ConfigError("key index out of range");
    if (!seen.insert(k).second) throw ConfigError("duplicate key index");
  }
  if (height < 1 || width < 1) throw ConfigError("grid must be positive");
  if (vit.patch < 1 || height % vit.patch != 0 || width % vit.patch != 0)
    throw ConfigError("grid " + std::to_string(height) + "x" + std::to_string(width) +
                      " not divisible by patch " + std::to_string(vit.patch));
  if (vit.dim < 1 || vit.depth < 1 || vit.heads < 1 || vit.mlp_ratio < 1)
    throw ConfigError("transformer sizes must be positive");
  if (vit.dim % vit.heads != 0) throw ConfigError("transformer dim not divisible by heads");
  check_schedule(encoder_channels, latent_channels, "encoder_channels");
  check_schedule(decoder_channels, 0, "decoder_channels");
  check_schedule(lpm_pre_channels, 2 * latent_channels, "lpm_pre_channels");
  check_schedule(lpm_post_channels, latent_channels, "lpm_post_channels");
  if (time_cycles < 1 || embed_hidden < 1 || time_channels < 1 || const_channels < 1 ||
      const_in_channels < 1)
    throw ConfigError("embedding sizes must be positive");
}

ModelConfig paper_model_config() {
  ModelConfig cfg;
  const VariableCatalog cat = era5_catalog();
  cfg.in_channels = cat.num_channels();
  cfg.key_channels = cat.num_keys();
  cfg.key_indices = cat.key_indices;
  return cfg;
}

ModelConfig desk_model_config() {
  ModelConfig cfg;
  cfg.in_channels = 12;
  cfg.key_channels = 4;
  cfg.latent_channels = 8;
  cfg.height = 16;
  cfg.width = 32;
  cfg.key_indices = {0, 1, 2, 3};
  cfg.encoder_channels = {32, 24, 16, 8};
  cfg.decoder_channels = {24, 32, 32, 32};
  cfg.lpm_pre_channels = {32, 24, 16, 16};
  cfg.lpm_post_channels = {16, 16, 8, 8};
  cfg.vit = VitConfig{4, 96, 2, 4, 4};
  return cfg;
}

torch::Tensor channel_attention_raw(const torch::Tensor& x, const torch::Tensor& key_idx) {
  if (x.dim() != 3 && x.dim() != 4)
    throw ShapeError("channel attention expects [C,H,W] or [B,C,H,W]");
  const bool batched = x.dim() == 4;
  torch::Tensor xb = batched ? x : x.unsqueeze(0);
  torch::Tensor flat = xb.reshape({xb.size(0), xb.size(1), -1});
  torch::Tensor keys = flat.index_select(1, key_idx);
  torch::Tensor raw = torch::bmm(flat, keys.transpose(1, 2)).abs().mean(-1);
  return batched ? raw : raw.squeeze(0);
}

EncoderImpl::EncoderImpl(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  key_idx_ = register_buffer(
      "key_idx", torch::tensor(cfg_.key_indices, torch::kInt64));
  const double scale = 1.0 / static_cast<double>(cfg_.height * cfg_.width);
  gain_ = register_parameter("gain", torch::full({}, scale, torch::kFloat32));
  bias_ = register_parameter("bias", torch::zeros({}, torch::kFloat32));
  std::int64_t in = cfg_.in_channels;
  for (std::size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
    MsrBlock b(MsrBlockOptions{in, cfg_.encoder_channels[i], cfg_.normalize});
    blocks_.push_back(register_module("block" + std::to_string(i + 1), b));
    in = cfg_.encoder_channels[i];
  }
}

torch::Tensor EncoderImpl::flat_forward(const torch::Tensor& x) {
  if (x.size(1) != cfg_.in_channels || x.size(2) != cfg_.height || x.size(3) != cfg_.width)
    throw ShapeError("encoder configured for [" + std::to_string(cfg_.in_channels) + "," +
                     std::to_string(cfg_.height) + "," + std::to_string(cfg_.width) + "] fields");
  if (!torch::isfinite(x).all().item<bool>())
    throw DataError("encoder input contains non-finite values");
  // One sample at a time: batched convolutions may pick different kernels
  // than single-sample ones, and per-step results must not depend on what
  // else shares the batch, bit for bit.
  std::vector<torch::Tensor> rows;
  rows.reserve(static_cast<std::size_t>(x.size(0)));
  for (std::int64_t i = 0; i < x.size(0); ++i) {
    torch::Tensor y = x.narrow(0, i, 1);
    torch::Tensor raw = channel_attention_raw(y, key_idx_);
    y = y * torch::sigmoid(gain_ * raw + bias_).unsqueeze(-1).unsqueeze(-1);
    for (auto& b : blocks_) y = b->forward(y);
    rows.push_back(y);
  }
  return rows.size() == 1 ? rows.front() : torch::cat(rows, 0);
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& x) {
  if (x.dim() == 3) return flat_forward(x.unsqueeze(0)).squeeze(0);
  if (x.dim() == 4) return flat_forward(x);
  if (x.dim() == 5) {
    const auto b = x.size(0), t = x.size(1);
    torch::Tensor y = flat_forward(x.reshape({b * t, x.size(2), x.size(3), x.size(4)}));
    return y.reshape({b, t, y.size(1), y.size(2), y.size(3)});
  }
  throw ShapeError("encoder expects rank 3, 4, or 5 input");
}

std::pair<torch::Tensor, torch::Tensor> EncoderImpl::attention_scores(const torch::Tensor& x) {
  torch::Tensor xb = x;
  if (x.dim() == 3) xb = x.unsqueeze(0);
  if (xb.dim() == 5) xb = xb.reshape({-1, xb.size(2), xb.size(3), xb.size(4)});
  if (xb.dim() != 4) throw ShapeError("attention scores expect rank 3, 4, or 5 input");
  torch::Tensor raw = channel_attention_raw(xb, key_idx_);
  return {raw, torch::sigmoid(gain_ * raw + bias_)};
}

DecoderImpl::DecoderImpl(const ModelConfig& cfg) {
  cfg.validate();
  std::int64_t in = cfg.latent_channels;
  for (std::size_t i = 0; i < cfg.decoder_channels.size(); ++i) {
    MsrBlock b(MsrBlockOptions{in, cfg.decoder_channels[i], cfg.normalize});
    blocks_.push_back(register_module("block" + std::to_string(i + 1), b));
    in = cfg.decoder_channels[i];
  }
  head_ = register_module("head", torch::nn::Conv2d(torch::nn::Conv2dOptions(
                                      in, cfg.key_channels, 1)));
  torch::NoGradGuard guard;
  head_->weight.zero_();
  head_->bias.zero_();
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& h) {
  // Same per-sample discipline as the encoder (see flat_forward).
  const auto run = [&](const torch::Tensor& hb) {
    std::vector<torch::Tensor> rows;
    rows.reserve(static_cast<std::size_t>(hb.size(0)));
    for (std::int64_t i = 0; i < hb.size(0); ++i) {
      torch::Tensor y = hb.narrow(0, i, 1);
      for (auto& b : blocks_) y = b->forward(y);
      rows.push_back(head_->forward(y));
    }
    return rows.size() == 1 ? rows.front() : torch::cat(rows, 0);
  };
  if (h.dim() == 3) return run(h.unsqueeze(0)).squeeze(0);
  if (h.dim() == 4) return run(h);
  if (h.dim() == 5) {
    const auto b = h.size(0), t = h.size(1);
    torch::Tensor y = run(h.reshape({b * t, h.size(2), h.size(3), h.size(4)}));
    return y.reshape({b, t, y.size(1), y.size(2), y.size(3)});
  }
  throw ShapeError("decoder expects rank 3, 4, or 5 input");
}

LpmImpl::LpmImpl(const ModelConfig& cfg, int interval)
    : interval_(interval), d_(cfg.latent_channels) {
  cfg.validate();
  if (interval != 1 && interval != 2 && interval != 4)
    throw ConfigError("prediction stride must be 1, 2, or 4");
  std::int64_t in = 2 * d_ + cfg.time_channels + cfg.const_channels;
  for (std::size_t i = 0; i < cfg.lpm_pre_channels.size(); ++i) {
    MsrBlock b(MsrBlockOptions{in, cfg.lpm_pre_channels[i], cfg.normalize});
    pre_.push_back(register_module("pre" + std::to_string(i + 1), b));
    in = cfg.lpm_pre_channels[i];
  }
  tconv_ = register_module("tconv", TemporalConv3d(d_));
  patchify_ = register_module(
      "patchify", Patchify(2 * d_, cfg.vit.dim, cfg.height / cfg.vit.patch,
                           cfg.width / cfg.vit.patch, cfg.vit.patch));
  for (std::int64_t i = 0; i < cfg.vit.depth; ++i) {
    VitBlock b(cfg.vit.dim, cfg.vit.heads, cfg.vit.mlp_ratio);
    vit_.push_back(register_module("vit" + std::to_string(i + 1), b));
  }
  recovery_ = register_module("recovery", PatchRecovery(cfg.vit.dim, 2 * d_, cfg.vit.patch));
  in = 2 * d_;
  for (std::size_t i = 0; i < cfg.lpm_post_channels.size(); ++i) {
    MsrBlock b(MsrBlockOptions{in, cfg.lpm_post_channels[i], cfg.normalize});
    post_.push_back(register_module("post" + std::to_string(i + 1), b));
    in = cfg.lpm_post_channels[i];
  }
}

torch::Tensor LpmImpl::trunk(const torch::Tensor& x, std::vector<torch::Tensor>* attn_out) {
  const bool batched = x.dim() == 4;
  if (x.dim() != 3 && x.dim() != 4) throw ShapeError("prediction input must be rank 3 or 4");
  torch::Tensor y = batched ? x : x.unsqueeze(0);
  const std::int64_t want = pre_.front()->options().in_channels;
  if (y.size(1) != want)
    throw ShapeError("prediction input has " + std::to_string(y.size(1)) + " channels, needs " +
                     std::to_string(want));
  for (auto& b : pre_) y = b->forward(y);
  const auto bsz = y.size(0), h = y.size(2), w = y.size(3);
  y = y.reshape({bsz, 2, d_, h, w});
  y = tconv_->forward(y);
  y = y.reshape({bsz, 2 * d_, h, w});
  y = patchify_->forward(y);
  const auto th = y.size(2), tw = y.size(3);
  torch::Tensor seq = tokens_to_seq(y);
  for (auto& blk : vit_) {
    if (attn_out != nullptr) {
      auto [out, attn] = blk->forward_attn(seq);
      seq = out;
      attn_out->push_back(attn);
    } else {
      seq = blk->forward(seq);
    }
  }
  y = recovery_->forward(seq_to_tokens(seq, th, tw));
  for (auto& b : post_) y = b->forward(y);
  return batched ? y : y.squeeze(0);
}

torch::Tensor LpmImpl::forward(const torch::Tensor& x) { return trunk(x, nullptr); }

std::vector<torch::Tensor> LpmImpl::attention_maps(const torch::Tensor& x) {
  torch::NoGradGuard guard;
  std::vector<torch::Tensor> maps;
  trunk(x, &maps);
  return maps;
}

ForecastModelImpl::ForecastModelImpl(const ModelConfig& cfg, torch::Tensor constant_fields)
    : cfg_(cfg) {
  cfg_.validate();
  if (constant_fields.dim() != 3 || constant_fields.size(0) != cfg_.const_in_channels ||
      constant_fields.size(1) != cfg_.height || constant_fields.size(2) != cfg_.width)
    throw ShapeError("constant fields must be [" + std::to_string(cfg_.const_in_channels) + "," +
                     std::to_string(cfg_.height) + "," + std::to_string(cfg_.width) + "]");
  if (!torch::isfinite(constant_fields).all().item<bool>())
    throw DataError("constant fields contain non-finite values");
  encoder_ = register_module("encoder", Encoder(cfg_));
  decoder_ = register_module("decoder", Decoder(cfg_));
  lpm1_ = register_module("lpm1", Lpm(cfg_, 1));
  lpm2_ = register_module("lpm2", Lpm(cfg_, 2));
  lpm4_ = register_module("lpm4", Lpm(cfg_, 4));
  time_embed_ = register_module(
      "time_embed", TimeEmbed(cfg_.time_cycles, cfg_.embed_hidden, cfg_.time_channels));
  const_embed_ = register_module(
      "const_embed", ConstEmbed(cfg_.const_in_channels, cfg_.const_channels));
  constants_ = register_buffer("constants", constant_fields.to(torch::kFloat32).clone());
  reset_lpm_call_counts();
}

Lpm& ForecastModelImpl::lpm(int interval) {
  switch (interval) {
    case 1: return lpm1_;
    case 2: return lpm2_;
    case 4: return lpm4_;
    default: throw ConfigError("no model for stride " + std::to_string(interval));
  }
}

torch::Tensor ForecastModelImpl::lpm_step(int interval, const torch::Tensor& h_prev,
                                          const torch::Tensor& h_curr,
                                          const std::vector<std::int64_t>& prev_hours,
                                          const std::vector<std::int64_t>& curr_hours) {
  if (h_prev.dim() != h_curr.dim() || (h_prev.dim() != 3 && h_prev.dim() != 4))
    throw ShapeError("latents must both be rank 3 or both rank 4");
  const bool batched = h_prev.dim() == 4;
  torch::Tensor hp = batched ? h_prev : h_prev.unsqueeze(0);
  torch::Tensor hc = batched ? h_curr : h_curr.unsqueeze(0);
  if (hp.sizes() != hc.sizes()) throw ShapeError("latent pair shapes differ");
  if (hp.size(1) != cfg_.latent_channels || hp.size(2) != cfg_.height ||
      hp.size(3) != cfg_.width)
    throw ShapeError("latents must be [" + std::to_string(cfg_.latent_channels) + "," +
                     std::to_string(cfg_.height) + "," + std::to_string(cfg_.width) + "]");
  if (!torch::isfinite(hp).all().item<bool>() || !torch::isfinite(hc).all().item<bool>())
    throw DataError("latent inputs contain non-finite values");
  const auto bsz = hp.size(0);
  if (prev_hours.size() != curr_hours.size() || prev_hours.empty() ||
      (prev_hours.size() != 1 && static_cast<std::int64_t>(prev_hours.size()) != bsz))
    throw ShapeError("hour stamps must match the batch (or be a single shared pair)");
  const auto cycles = cycle_days(cfg_.time_cycles);
  std::vector<torch::Tensor> rp, rc;
  for (std::size_t i = 0; i < prev_hours.size(); ++i) {
    rp.push_back(raw_time_features(prev_hours[i], cycles));
    rc.push_back(raw_time_features(curr_hours[i], cycles));
  }
  torch::Tensor t_emb =
      time_embed_->forward(torch::stack(rp), torch::stack(rc), cfg_.height, cfg_.width);
  if (t_emb.size(0) != bsz) t_emb = t_emb.expand({bsz, -1, -1, -1});
  torch::Tensor c_emb =
      const_embed_->forward(constants_).unsqueeze(0).expand({bsz, -1, -1, -1});
  torch::Tensor x = torch::cat({hp, hc, t_emb.to(hp.dtype()), c_emb}, 1);
  ++lpm_calls_[interval];
  torch::Tensor y = lpm(interval)->forward(x);
  return batched ? y : y.squeeze(0);
}

torch::Tensor ForecastModelImpl::rollout_latents(const torch::Tensor& history, int n,
                                                 std::int64_t t0_hours, int dt_hours) {
  if (history.dim() != 4 && history.dim() != 5)
    throw ShapeError("history must be [5,d,H,W] or [B,5,d,H,W]");
  const bool batched = history.dim() == 5;
  torch::Tensor hist = batched ? history : history.unsqueeze(0);
  std::vector<torch::Tensor> hvec;
  for (std::int64_t t = 0; t < hist.size(1); ++t) hvec.push_back(hist.select(1, t));
  std::map<int, LpmStepFn> fns;
  for (int s : {1, 2, 4})
    fns[s] = [this, s](const torch::Tensor& a, const torch::Tensor& b, std::int64_t ah,
                       std::int64_t bh) { return lpm_step(s, a, b, {ah}, {bh}); };
  std::vector<torch::Tensor> out = rollout(hvec, n, fns, t0_hours, dt_hours);
  torch::Tensor stacked = torch::stack(out, 1);
  return batched ? stacked : stacked.squeeze(0);
}

std::vector<torch::Tensor> ForecastModelImpl::trainable_parameters(int interval) {
  std::vector<torch::Tensor> out;
  const auto add = [&out](const std::vector<torch::Tensor>& ps) {
    out.insert(out.end(), ps.begin(), ps.end());
  };
  add(encoder_->parameters());
  add(decoder_->parameters());
  add(time_embed_->parameters());
  add(const_embed_->parameters());
  add(lpm(interval)->parameters());
  return out;
}

void ForecastModelImpl::reset_lpm_call_counts() {
  lpm_calls_ = {{1, 0}, {2, 0}, {4, 0}};
}

}  // namespace latentcast
