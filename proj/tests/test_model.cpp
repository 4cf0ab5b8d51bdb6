#include "latentcast/model.hpp"

#include <torch/torch.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "latentcast/catalog.hpp"
#include "latentcast/common.hpp"
#include "latentcast/dataset.hpp"
#include "latentcast/embeddings.hpp"
#include "latentcast/htami.hpp"
#include "latentcast/losses.hpp"
#include "latentcast/synthetic.hpp"

#include "doctest_compat.h"

namespace lc = latentcast;

namespace {

lc::ModelConfig mini_config() {
  lc::ModelConfig cfg;
  cfg.in_channels = 6;
  cfg.key_channels = 2;
  cfg.latent_channels = 4;
  cfg.height = 8;
  cfg.width = 16;
  cfg.key_indices = {0, 1};
  cfg.encoder_channels = {8, 8, 8, 4};
  cfg.decoder_channels = {8, 8, 8, 8};
  cfg.lpm_pre_channels = {8, 8, 8, 8};
  cfg.lpm_post_channels = {8, 8, 4, 4};
  cfg.vit = lc::VitConfig{4, 32, 1, 2, 2};
  return cfg;
}

lc::ForecastModel mini_model() {
  return lc::ForecastModel(mini_config(), lc::synthetic_constants(8, 16));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("full-scale configuration matches the published geometry") {
  const lc::ModelConfig cfg = lc::paper_model_config();
  cfg.validate();
  CHECK(cfg.in_channels == 104);
  CHECK(cfg.key_channels == 20);
  CHECK(cfg.latent_channels == 24);
  CHECK(cfg.height == 32);
  CHECK(cfg.width == 64);
  CHECK(cfg.encoder_channels == std::vector<std::int64_t>{64, 48, 32, 24});
  CHECK(cfg.decoder_channels == std::vector<std::int64_t>{48, 64, 64, 64});
  CHECK(cfg.vit.dim == 768);
  CHECK(cfg.vit.depth == 8);
  CHECK(cfg.vit.heads == 12);
  CHECK(cfg.vit.patch == 4);
  // Token width equals the per-patch value count of the two-step latent pair.
  CHECK(cfg.vit.dim == 2 * cfg.latent_channels * cfg.vit.patch * cfg.vit.patch);
  // The latent stack is a strict compression of the input channels.
  CHECK(cfg.latent_channels < cfg.in_channels);
}

TEST_CASE("configuration validation rejects inconsistent shapes") {
  lc::ModelConfig cfg = mini_config();
  CHECK_NOTHROW(cfg.validate());

  lc::ModelConfig wide = cfg;
  wide.latent_channels = cfg.in_channels;  // no compression
  CHECK_THROWS_AS(wide.validate(), lc::ConfigError);

  lc::ModelConfig dup = cfg;
  dup.key_indices = {0, 0};
  CHECK_THROWS_AS(dup.validate(), lc::ConfigError);

  lc::ModelConfig off = cfg;
  off.height = 10;  // not divisible by patch 4
  CHECK_THROWS_AS(off.validate(), lc::ConfigError);

  lc::ModelConfig heads = cfg;
  heads.vit.heads = 5;  // 32 % 5 != 0
  CHECK_THROWS_AS(heads.validate(), lc::ConfigError);

  lc::ModelConfig tail = cfg;
  tail.encoder_channels = {8, 8, 8, 6};  // must end at d
  CHECK_THROWS_AS(tail.validate(), lc::ConfigError);
}

TEST_CASE("channel correlation: a copy of a key scores its squared norm") {
  torch::Tensor x = torch::zeros({3, 2, 2});
  x[0] = torch::tensor({{1.0f, 2.0f}, {3.0f, 4.0f}});
  x[1] = x[0].clone();                                  // identical to the key
  x[2] = torch::tensor({{2.0f, -1.0f}, {0.0f, 0.0f}});  // orthogonal to it
  torch::Tensor raw = lc::channel_attention_raw(x, torch::tensor({0L}));
  CHECK(raw.size(0) == 3);
  CHECK(raw[0].item<double>() == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(raw[1].item<double>() == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(raw[2].item<double>() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("channel correlation matches a loop reference with two keys") {
  torch::manual_seed(11);
  torch::Tensor x = torch::randn({5, 4, 6});
  torch::Tensor keys = torch::tensor({1L, 3L});
  torch::Tensor raw = lc::channel_attention_raw(x, keys);
  for (std::int64_t j = 0; j < 5; ++j) {
    double acc = 0.0;
    for (std::int64_t m : {1, 3})
      acc += std::abs((x[j] * x[m]).sum().item<double>());
    CHECK(raw[j].item<double>() == doctest::Approx(acc / 2.0).epsilon(1e-5));
  }
}

TEST_CASE("swapping two non-key channels swaps their raw scores") {
  torch::manual_seed(12);
  const lc::ModelConfig cfg = mini_config();
  torch::Tensor x = torch::randn({cfg.in_channels, cfg.height, cfg.width});
  torch::Tensor keys = torch::tensor(cfg.key_indices);
  torch::Tensor raw = lc::channel_attention_raw(x, keys);

  torch::Tensor perm = x.clone();
  perm[3] = x[5];
  perm[5] = x[3];
  torch::Tensor raw_p = lc::channel_attention_raw(perm, keys);
  CHECK(torch::equal(raw_p[3], raw[5]));
  CHECK(torch::equal(raw_p[5], raw[3]));
  CHECK(torch::equal(raw_p[0], raw[0]));
  CHECK(torch::equal(raw_p[1], raw[1]));
  CHECK(torch::equal(raw_p[2], raw[2]));
  CHECK(torch::equal(raw_p[4], raw[4]));
}

TEST_CASE("attention scores are sigmoid-bounded and 0.5 for a dead channel") {
  torch::manual_seed(13);
  lc::Encoder enc(mini_config());
  torch::Tensor x = torch::randn({6, 8, 16});
  x[4].zero_();  // zero field: zero correlation with every key
  auto [raw, scores] = enc->attention_scores(x);
  CHECK(raw.sizes() == torch::IntArrayRef({1, 6}));
  CHECK(scores.sizes() == torch::IntArrayRef({1, 6}));
  CHECK(torch::all(scores > 0).item<bool>());
  CHECK(torch::all(scores < 1).item<bool>());
  CHECK(raw[0][4].item<double>() == doctest::Approx(0.0).epsilon(1e-12));
  // gain * 0 + bias = 0 at initialization -> sigmoid(0) = 1/2.
  CHECK(scores[0][4].item<double>() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("encoder maps each supported rank to d latent channels") {
  torch::manual_seed(14);
  lc::Encoder enc(mini_config());
  torch::NoGradGuard guard;
  CHECK(enc->forward(torch::randn({6, 8, 16})).sizes() ==
        torch::IntArrayRef({4, 8, 16}));
  CHECK(enc->forward(torch::randn({3, 6, 8, 16})).sizes() ==
        torch::IntArrayRef({3, 4, 8, 16}));
  CHECK(enc->forward(torch::randn({2, 3, 6, 8, 16})).sizes() ==
        torch::IntArrayRef({2, 3, 4, 8, 16}));
  CHECK_THROWS_AS(enc->forward(torch::randn({5, 8, 16})), lc::ShapeError);
  torch::Tensor bad = torch::randn({6, 8, 16});
  bad[2][4][7] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(enc->forward(bad), lc::DataError);
}

TEST_CASE("encoder processes time steps independently and identically") {
  torch::manual_seed(15);
  lc::Encoder enc(mini_config());
  torch::NoGradGuard guard;
  torch::Tensor x = torch::randn({1, 3, 6, 8, 16});
  torch::Tensor joint = enc->forward(x);
  for (std::int64_t t = 0; t < 3; ++t) {
    torch::Tensor single = enc->forward(x[0][t]);
    CHECK(torch::equal(joint[0][t], single));
  }
}

TEST_CASE("encoder batch entries do not mix") {
  torch::manual_seed(16);
  lc::Encoder enc(mini_config());
  torch::NoGradGuard guard;
  torch::Tensor a = torch::randn({1, 6, 8, 16});
  torch::Tensor b = torch::randn({1, 6, 8, 16});
  torch::Tensor joint = enc->forward(torch::cat({a, b}, 0));
  CHECK(torch::equal(joint[0], enc->forward(a)[0]));
  CHECK(torch::equal(joint[1], enc->forward(b)[0]));
}

TEST_CASE("decoder starts at exactly zero and learns to move") {
  torch::manual_seed(17);
  lc::Decoder dec(mini_config());
  torch::NoGradGuard guard;
  torch::Tensor h = torch::randn({4, 8, 16});
  torch::Tensor y = dec->forward(h);
  CHECK(y.sizes() == torch::IntArrayRef({2, 8, 16}));
  CHECK(y.abs().max().item<double>() == 0.0);
  CHECK(dec->forward(torch::randn({3, 4, 8, 16})).sizes() ==
        torch::IntArrayRef({3, 2, 8, 16}));
  CHECK(dec->forward(torch::randn({2, 3, 4, 8, 16})).sizes() ==
        torch::IntArrayRef({2, 3, 2, 8, 16}));

  for (auto& p : dec->named_parameters())
    if (p.key() == "head.weight") p.value().fill_(0.01);
  CHECK(dec->forward(h).abs().max().item<double>() > 0.0);
}

TEST_CASE("one prediction step keeps the latent shape and is deterministic") {
  torch::manual_seed(18);
  auto model = mini_model();
  torch::NoGradGuard guard;
  torch::Tensor hp = torch::randn({4, 8, 16});
  torch::Tensor hc = torch::randn({4, 8, 16});
  torch::Tensor y1 = model->lpm_step(1, hp, hc, {0}, {6});
  CHECK(y1.sizes() == torch::IntArrayRef({4, 8, 16}));
  CHECK(torch::isfinite(y1).all().item<bool>());
  torch::Tensor y2 = model->lpm_step(1, hp, hc, {0}, {6});
  CHECK(torch::equal(y1, y2));

  torch::Tensor yb = model->lpm_step(1, hp.unsqueeze(0), hc.unsqueeze(0), {0}, {6});
  CHECK(yb.sizes() == torch::IntArrayRef({1, 4, 8, 16}));
  CHECK(torch::equal(yb[0], y1));
}

TEST_CASE("prediction inputs are validated") {
  torch::manual_seed(19);
  auto model = mini_model();
  torch::NoGradGuard guard;
  torch::Tensor h = torch::randn({4, 8, 16});
  CHECK_THROWS_AS(model->lpm_step(3, h, h, {0}, {6}), lc::ConfigError);
  CHECK_THROWS_AS(model->lpm_step(1, h, torch::randn({4, 8, 8}), {0}, {6}), lc::ShapeError);
  CHECK_THROWS_AS(model->lpm_step(1, h, h, {0, 6}, {6}), lc::ShapeError);
  torch::Tensor bad = h.clone();
  bad[0][0][0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(model->lpm_step(1, h, bad, {0}, {6}), lc::DataError);
}

TEST_CASE("every input group moves the prediction") {
  torch::manual_seed(20);
  auto model = mini_model();
  torch::NoGradGuard guard;
  torch::Tensor hp = torch::randn({4, 8, 16});
  torch::Tensor hc = torch::randn({4, 8, 16});
  torch::Tensor base = model->lpm_step(1, hp, hc, {0}, {6});
  const double eps = 1e-2;

  torch::Tensor d_prev =
      model->lpm_step(1, hp + eps * torch::randn_like(hp), hc, {0}, {6});
  CHECK((d_prev - base).abs().max().item<double>() > 0.0);

  torch::Tensor d_curr =
      model->lpm_step(1, hp, hc + eps * torch::randn_like(hc), {0}, {6});
  CHECK((d_curr - base).abs().max().item<double>() > 0.0);

  torch::Tensor d_time = model->lpm_step(1, hp, hc, {0}, {18});
  CHECK((d_time - base).abs().max().item<double>() > 0.0);

  torch::Tensor saved = model->constant_fields().clone();
  model->constant_fields().add_(eps * torch::randn_like(saved));
  torch::Tensor d_const = model->lpm_step(1, hp, hc, {0}, {6});
  model->constant_fields().copy_(saved);
  CHECK((d_const - base).abs().max().item<double>() > 0.0);
}

TEST_CASE("per-stride call counters track usage") {
  torch::manual_seed(21);
  auto model = mini_model();
  torch::NoGradGuard guard;
  torch::Tensor h = torch::randn({4, 8, 16});
  model->lpm_step(1, h, h, {0}, {6});
  model->lpm_step(1, h, h, {0}, {6});
  model->lpm_step(4, h, h, {0}, {24});
  CHECK(model->lpm_call_counts().at(1) == 2);
  CHECK(model->lpm_call_counts().at(2) == 0);
  CHECK(model->lpm_call_counts().at(4) == 1);
  model->reset_lpm_call_counts();
  CHECK(model->lpm_call_counts().at(1) == 0);
  CHECK(model->lpm_call_counts().at(4) == 0);
}

TEST_CASE("rollout follows the scheduled plan") {
  torch::manual_seed(22);
  auto model = mini_model();
  torch::NoGradGuard guard;
  torch::Tensor history = torch::randn({5, 4, 8, 16});
  const std::int64_t t0 = 1000;
  const int dt = 6;
  torch::Tensor out = model->rollout_latents(history, 6, t0, dt);
  CHECK(out.sizes() == torch::IntArrayRef({6, 4, 8, 16}));
  CHECK(torch::isfinite(out).all().item<bool>());
  CHECK(model->lpm_call_counts().at(1) == 2);  // targets 1 and 3
  CHECK(model->lpm_call_counts().at(2) == 1);  // target 2
  CHECK(model->lpm_call_counts().at(4) == 3);  // targets 4..6

  // Re-run the plan by hand and compare step by step. Labels -4..6 live at
  // index label + 4.
  std::vector<torch::Tensor> latents(11);
  for (int t = 0; t < 5; ++t) latents[static_cast<std::size_t>(t)] = history[t];
  const auto at = [&](int label) -> torch::Tensor {
    return latents[static_cast<std::size_t>(label + 4)];
  };
  const lc::ForecastPlan plan = lc::build_plan(6);
  for (const lc::PlanStep& s : plan.steps) {
    torch::Tensor pred = model->lpm_step(
        s.interval, at(s.inputs[0]), at(s.inputs[1]),
        {t0 + static_cast<std::int64_t>(s.inputs[0]) * dt},
        {t0 + static_cast<std::int64_t>(s.inputs[1]) * dt});
    latents[static_cast<std::size_t>(s.target + 4)] = pred;
    CHECK(torch::equal(out[s.target - 1], pred));
  }

  CHECK_THROWS_AS(model->rollout_latents(torch::randn({4, 4, 8, 16}), 3, t0, dt),
                  lc::DataError);
}

TEST_CASE("transformer attention maps are inspectable and normalized") {
  torch::manual_seed(23);
  auto model = mini_model();
  torch::Tensor x = torch::randn({1, 32, 8, 16});
  std::vector<torch::Tensor> maps = model->lpm(2)->attention_maps(x);
  REQUIRE(maps.size() == 1);
  CHECK(maps[0].sizes() == torch::IntArrayRef({1, 2, 8, 8}));
  torch::Tensor rows = maps[0].sum(-1);
  CHECK(torch::allclose(rows, torch::ones_like(rows), 1e-5, 1e-5));
}

TEST_CASE("stride-specific parameter sets share the codec and embeddings") {
  auto model = mini_model();
  const auto count = [](const std::vector<torch::Tensor>& ps) {
    std::int64_t n = 0;
    for (const auto& p : ps) n += p.numel();
    return n;
  };
  const std::int64_t shared = count(model->encoder()->parameters()) +
                              count(model->decoder()->parameters()) +
                              count(model->time_embed()->parameters()) +
                              count(model->const_embed()->parameters());
  const std::int64_t one = count(model->lpm(1)->parameters());
  CHECK(count(model->trainable_parameters(1)) == shared + one);
  CHECK(count(model->trainable_parameters(2)) == shared + count(model->lpm(2)->parameters()));
  // The full module holds exactly the three stride models plus shared parts.
  const std::int64_t total = count(model->parameters());
  CHECK(total == shared + one + count(model->lpm(2)->parameters()) +
                     count(model->lpm(4)->parameters()));
}

TEST_CASE("outputs stay finite over 100 random parameter draws") {
  const lc::ModelConfig cfg = mini_config();
  torch::Tensor constants = lc::synthetic_constants(8, 16);
  torch::NoGradGuard guard;
  for (int trial = 0; trial < 100; ++trial) {
    torch::manual_seed(static_cast<std::uint64_t>(1000 + trial));
    lc::ForecastModel model(cfg, constants);
    torch::Tensor x = 3.0 * torch::randn({2, 6, 8, 16});
    torch::Tensor h = model->encode(x);
    CHECK(torch::isfinite(h).all().item<bool>());
    torch::Tensor y = model->lpm_step(2, h[0], h[1], {0}, {12});
    CHECK(torch::isfinite(y).all().item<bool>());
    CHECK(torch::isfinite(model->decode(y)).all().item<bool>());
  }
}

TEST_CASE("full-scale encoder compresses a two-step stack") {
  torch::manual_seed(24);
  lc::Encoder enc(lc::paper_model_config());
  torch::NoGradGuard guard;
  torch::Tensor x = torch::randn({2, 104, 32, 64});
  CHECK(enc->forward(x).sizes() == torch::IntArrayRef({2, 24, 32, 64}));
}

TEST_CASE("500 reconstruction steps halve the key L1") {
  torch::manual_seed(25);
  lc::SyntheticConfig scfg;
  scfg.channels = 6;
  scfg.key_channels = 2;
  scfg.height = 8;
  scfg.width = 16;
  scfg.steps = 48;
  scfg.seed = 3;
  auto [field, cat] = lc::generate_synthetic(scfg);
  const lc::NormalizationStats stats = lc::compute_stats(field);
  const lc::GridField norm = lc::normalize(field, stats);
  const lc::LatitudeWeights a = lc::latitude_weights(norm.lat);

  torch::Tensor x = norm.data.narrow(0, 0, 16).unsqueeze(0);  // [1, 16, C, H, W]
  torch::Tensor target = x.index_select(2, torch::tensor(cat.key_indices));

  lc::ModelConfig mcfg = mini_config();
  lc::Encoder enc(mcfg);
  lc::Decoder dec(mcfg);
  std::vector<torch::Tensor> params = enc->parameters();
  const auto dps = dec->parameters();
  params.insert(params.end(), dps.begin(), dps.end());
  torch::optim::Adam opt(params, torch::optim::AdamOptions(3e-3));

  double first = 0.0, last = 0.0;
  for (int step = 0; step < 500; ++step) {
    opt.zero_grad();
    torch::Tensor loss = lc::recon_loss(dec->forward(enc->forward(x)), target, a);
    loss.backward();
    opt.step();
    if (step == 0) first = loss.item<double>();
    last = loss.item<double>();
  }
  CHECK(first > 0.0);
  CHECK(last < 0.5 * first);
}

}  // TEST_SUITE
