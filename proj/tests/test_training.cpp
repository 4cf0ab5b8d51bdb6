#include "latentcast/training.hpp"

#include <torch/torch.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "latentcast/checkpoint.hpp"
#include "latentcast/common.hpp"
#include "latentcast/config.hpp"
#include "latentcast/embeddings.hpp"
#include "latentcast/model.hpp"
#include "latentcast/optim.hpp"
#include "latentcast/synthetic.hpp"

#include "doctest_compat.h"

namespace lc = latentcast;
namespace fs = std::filesystem;

namespace {

lc::ModelConfig mini_model_config() {
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

lc::SyntheticConfig mini_synth_config() {
  lc::SyntheticConfig cfg;
  cfg.channels = 6;
  cfg.key_channels = 2;
  cfg.height = 8;
  cfg.width = 16;
  cfg.steps = 64;
  cfg.seed = 3;
  return cfg;
}

lc::TrainConfig mini_train_config() {
  lc::TrainConfig cfg;
  cfg.epochs = 4;
  cfg.curriculum_iters = {2, 4};
  cfg.curriculum_boundaries = {0, 3};
  cfg.batch = 2;
  cfg.steps_per_epoch = 2;
  cfg.val_fraction = 0.0;
  cfg.seed = 5;
  return cfg;
}

struct TrainRig {
  lc::GridField train;
  lc::VariableCatalog cat;
  lc::LossWeights wts;
  lc::ForecastModel model{nullptr};
  std::unique_ptr<lc::AdamW> opt;
  std::mt19937_64 rng;
};

TrainRig make_rig(std::uint64_t seed) {
  auto [field, cat] = lc::generate_synthetic(mini_synth_config());
  const lc::NormalizationStats stats = lc::compute_stats(field);
  TrainRig rig{lc::normalize(field, stats),
               cat,
               lc::make_loss_weights(cat, stats, field.lat),
               lc::ForecastModel(nullptr),
               nullptr,
               std::mt19937_64(seed)};
  torch::manual_seed(seed);
  rig.model = lc::ForecastModel(mini_model_config(), lc::synthetic_constants(8, 16));
  std::vector<std::pair<std::string, torch::Tensor>> named;
  for (const auto& p : rig.model->named_parameters()) named.emplace_back(p.key(), p.value());
  rig.opt = std::make_unique<lc::AdamW>(named, lc::AdamWOptions{1e-3, 0.9, 0.95, 1e-8, 1.0});
  return rig;
}

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("published schedule constants") {
  const lc::TrainConfig cfg;
  CHECK(cfg.epochs == 65);
  CHECK(cfg.curriculum_iters == std::vector<int>{2, 4, 6, 8});
  CHECK(cfg.curriculum_boundaries == std::vector<int>{0, 50, 55, 60});
  CHECK(cfg.lr0 == 2e-4);
  CHECK(cfg.beta1 == 0.9);
  CHECK(cfg.beta2 == 0.95);
  CHECK(cfg.weight_decay == 1.0);
  CHECK(cfg.batch == 32);
  CHECK_NOTHROW(cfg.validate());
  CHECK_NOTHROW(lc::desk_train_config().validate());
}

TEST_CASE("schedule validation rejects malformed curricula") {
  lc::TrainConfig cfg;
  cfg.curriculum_boundaries = {0, 50, 50, 60};
  CHECK_THROWS_AS(cfg.validate(), lc::ConfigError);
  cfg = lc::TrainConfig{};
  cfg.curriculum_iters = {2, 4, 4, 8};
  CHECK_THROWS_AS(cfg.validate(), lc::ConfigError);
  cfg = lc::TrainConfig{};
  cfg.curriculum_boundaries = {1, 50, 55, 60};
  CHECK_THROWS_AS(cfg.validate(), lc::ConfigError);
  cfg = lc::TrainConfig{};
  cfg.curriculum_boundaries = {0, 50, 55, 65};
  CHECK_THROWS_AS(cfg.validate(), lc::ConfigError);
  cfg = lc::TrainConfig{};
  cfg.intervals = {1, 3};
  CHECK_THROWS_AS(cfg.validate(), lc::ConfigError);
  cfg = lc::TrainConfig{};
  cfg.val_fraction = 0.6;
  CHECK_THROWS_AS(cfg.validate(), lc::ConfigError);
}

TEST_CASE("iterations per stage follow the four-stage curriculum") {
  CHECK(lc::curriculum_iters(0) == 2);
  CHECK(lc::curriculum_iters(49) == 2);
  CHECK(lc::curriculum_iters(50) == 4);
  CHECK(lc::curriculum_iters(54) == 4);
  CHECK(lc::curriculum_iters(55) == 6);
  CHECK(lc::curriculum_iters(59) == 6);
  CHECK(lc::curriculum_iters(60) == 8);
  CHECK(lc::curriculum_iters(64) == 8);
  CHECK_THROWS_AS(lc::curriculum_iters(-1), lc::ConfigError);
  CHECK_THROWS_AS(lc::curriculum_iters(65), lc::ConfigError);
  CHECK(lc::curriculum_iters(42) == lc::curriculum_iters(42));
}

TEST_CASE("learning rate halves every ten epochs then freezes") {
  CHECK(lc::learning_rate(0) == 2e-4);
  CHECK(lc::learning_rate(9) == 2e-4);
  CHECK(lc::learning_rate(10) == 1e-4);
  CHECK(lc::learning_rate(25) == 5e-5);
  CHECK(lc::learning_rate(49) == 1.25e-5);
  CHECK(lc::learning_rate(50) == 6.25e-6);
  CHECK(lc::learning_rate(60) == 6.25e-6);
  CHECK(lc::learning_rate(64) == 6.25e-6);
  CHECK_THROWS_AS(lc::learning_rate(-1), lc::ConfigError);
  CHECK_THROWS_AS(lc::learning_rate(65), lc::ConfigError);
}

TEST_CASE("optimizer follows the hand-computed trajectory") {
  // Constant gradient 0.5, lr 0.1, no decay: each bias-corrected step moves
  // by lr * g/|g| (up to eps), so three steps take 1.0 to 0.7.
  torch::Tensor p = torch::ones({2, 2});
  lc::AdamW opt({{"p", p}}, lc::AdamWOptions{0.1, 0.9, 0.95, 1e-8, 0.0});
  for (int i = 0; i < 3; ++i) {
    p.mutable_grad() = torch::full({2, 2}, 0.5);
    opt.step();
  }
  CHECK(p.mean().item<double>() == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(opt.state().at("p").t == 3);

  // Decoupled decay shrinks the parameter before the update: one step with
  // wd 0.5 lands at 1*(1-0.1*0.5) - 0.1 = 0.85.
  torch::Tensor q = torch::ones({2, 2});
  lc::AdamW opt2({{"q", q}}, lc::AdamWOptions{0.1, 0.9, 0.95, 1e-8, 0.5});
  q.mutable_grad() = torch::full({2, 2}, 0.5);
  opt2.step();
  CHECK(q.mean().item<double>() == doctest::Approx(0.85).epsilon(1e-6));
}

TEST_CASE("optimizer decays matrices but not vectors or scalars") {
  torch::Tensor mat = torch::ones({3, 3});
  torch::Tensor vec = torch::ones({3});
  lc::AdamW opt({{"mat", mat}, {"vec", vec}}, lc::AdamWOptions{0.1, 0.9, 0.95, 1e-8, 0.5});
  mat.mutable_grad() = torch::zeros({3, 3});
  vec.mutable_grad() = torch::zeros({3});
  opt.step();
  CHECK(mat.mean().item<double>() == doctest::Approx(0.95).epsilon(1e-6));
  CHECK(vec.mean().item<double>() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimizer skips parameters without gradients entirely") {
  torch::Tensor a = torch::ones({2, 2});
  torch::Tensor b = torch::ones({2, 2});
  lc::AdamW opt({{"a", a}, {"b", b}}, lc::AdamWOptions{0.1, 0.9, 0.95, 1e-8, 1.0});
  a.mutable_grad() = torch::full({2, 2}, 1.0);
  opt.step();
  a.mutable_grad() = torch::full({2, 2}, 1.0);
  opt.step();
  opt.zero_grad();
  a.mutable_grad() = torch::full({2, 2}, 1.0);
  opt.step();
  CHECK(opt.state().at("a").t == 3);
  CHECK(opt.state().at("b").t == 0);
  CHECK(torch::equal(b, torch::ones({2, 2})));  // no update, no decay
}

TEST_CASE("one training step updates shared parts and one stride model only") {
  TrainRig rig = make_rig(7);
  const auto clone_params = [](lc::Lpm& m) {
    std::vector<torch::Tensor> out;
    for (const auto& p : m->parameters()) out.push_back(p.detach().clone());
    return out;
  };
  const auto equal_params = [](lc::Lpm& m, const std::vector<torch::Tensor>& saved) {
    const auto ps = m->parameters();
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (!torch::equal(ps[i], saved[i])) return false;
    return true;
  };
  std::vector<std::vector<torch::Tensor>> saved;
  for (int s : {1, 2, 4}) saved.push_back(clone_params(rig.model->lpm(s)));
  torch::Tensor enc_before = rig.model->encoder()->parameters()[2].detach().clone();

  lc::TrainConfig cfg = mini_train_config();
  rig.model->reset_lpm_call_counts();
  lc::StepRecord rec =
      lc::train_step(rig.model, *rig.opt, rig.train, rig.cat, rig.wts, cfg, 0, 0, rig.rng);

  CHECK(rec.t_train == 2);
  CHECK(std::isfinite(rec.loss_total));
  CHECK(rec.loss_total ==
        doctest::Approx(rec.loss_key + rec.loss_recon + rec.loss_latent).epsilon(1e-6));
  CHECK(rec.lr == lc::learning_rate(0, cfg));
  // Exactly T_train prediction calls, all on the chosen stride.
  CHECK(rig.model->lpm_call_counts().at(rec.interval) == 2);
  std::int64_t total_calls = 0;
  for (const auto& [s, n] : rig.model->lpm_call_counts()) total_calls += n;
  CHECK(total_calls == 2);

  const int strides[3] = {1, 2, 4};
  for (int i = 0; i < 3; ++i) {
    const bool chosen = strides[i] == rec.interval;
    CHECK(equal_params(rig.model->lpm(strides[i]), saved[static_cast<std::size_t>(i)]) ==
          !chosen);
  }
  CHECK_FALSE(torch::equal(rig.model->encoder()->parameters()[2], enc_before));
}

TEST_CASE("fixed seed reproduces the loss sequence exactly") {
  std::vector<double> runs[2];
  for (int run = 0; run < 2; ++run) {
    TrainRig rig = make_rig(11);
    lc::TrainConfig cfg = mini_train_config();
    for (int i = 0; i < 10; ++i)
      runs[run].push_back(
          lc::train_step(rig.model, *rig.opt, rig.train, rig.cat, rig.wts, cfg, 0, i, rig.rng)
              .loss_total);
  }
  for (int i = 0; i < 10; ++i) CHECK(runs[0][i] == runs[1][i]);
}

TEST_CASE("insufficient sequence margin raises a sampling error") {
  TrainRig rig = make_rig(13);
  lc::TrainConfig cfg = mini_train_config();
  cfg.intervals = {4};
  const lc::GridField small = rig.train.slice_time(0, 12);
  CHECK_THROWS_AS(
      lc::train_step(rig.model, *rig.opt, small, rig.cat, rig.wts, cfg, 0, 0, rig.rng),
      lc::DataError);
}

TEST_CASE("step-zero loss is finite across 20 random initializations") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TrainRig rig = make_rig(100 + seed);
    lc::StepRecord rec = lc::train_step(rig.model, *rig.opt, rig.train, rig.cat, rig.wts,
                                        mini_train_config(), 0, 0, rig.rng);
    CHECK(std::isfinite(rec.loss_key));
    CHECK(std::isfinite(rec.loss_recon));
    CHECK(std::isfinite(rec.loss_latent));
    CHECK(std::isfinite(rec.loss_total));
  }
}

TEST_CASE("checkpoints round-trip bit-exactly through disk") {
  TrainRig rig = make_rig(17);
  lc::TrainConfig cfg = mini_train_config();
  for (int i = 0; i < 3; ++i)
    lc::train_step(rig.model, *rig.opt, rig.train, rig.cat, rig.wts, cfg, 0, i, rig.rng);

  const lc::NormalizationStats stats{torch::randn({6}, torch::kFloat64),
                                     torch::rand({6}, torch::kFloat64) + 0.5};
  lc::Checkpoint ckpt = lc::make_checkpoint(
      rig.model, *rig.opt, rig.cat, stats, lc::model_config_to_json(mini_model_config()),
      lc::train_config_to_json(cfg), 1, rig.rng);
  const std::string path = temp_path("latentcast_ckpt_test.bin");
  lc::save_checkpoint(ckpt, path);
  const lc::Checkpoint back = lc::load_checkpoint(path);

  CHECK(back.version == ckpt.version);
  CHECK(back.epoch == 1);
  CHECK(back.rng_state == ckpt.rng_state);
  CHECK(back.model_config == ckpt.model_config);
  CHECK(back.train_config == ckpt.train_config);
  CHECK(back.config_hash() == ckpt.config_hash());
  CHECK(back.catalog.names == ckpt.catalog.names);
  CHECK(back.catalog.key_indices == ckpt.catalog.key_indices);
  CHECK(torch::equal(back.stats.mean, stats.mean));
  CHECK(torch::equal(back.stats.std, stats.std));
  REQUIRE(back.tensors.size() == ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    REQUIRE(back.tensors.count(name) == 1);
    CHECK(torch::equal(back.tensors.at(name), t));
  }
  CHECK(back.opt_t == ckpt.opt_t);
  fs::remove(path);
}

TEST_CASE("a resumed step matches an uninterrupted one") {
  lc::TrainConfig cfg = mini_train_config();
  TrainRig rig = make_rig(19);
  for (int i = 0; i < 4; ++i)
    lc::train_step(rig.model, *rig.opt, rig.train, rig.cat, rig.wts, cfg, 0, i, rig.rng);

  const lc::NormalizationStats stats = lc::compute_stats(rig.train);
  lc::Checkpoint ckpt = lc::make_checkpoint(
      rig.model, *rig.opt, rig.cat, stats, lc::model_config_to_json(mini_model_config()),
      lc::train_config_to_json(cfg), 0, rig.rng);
  const std::string path = temp_path("latentcast_resume_test.bin");
  lc::save_checkpoint(ckpt, path);

  // Uninterrupted continuation.
  lc::train_step(rig.model, *rig.opt, rig.train, rig.cat, rig.wts, cfg, 0, 4, rig.rng);

  // Resumed continuation from disk.
  TrainRig fresh = make_rig(999);  // different init, fully overwritten below
  const lc::Checkpoint loaded = lc::load_checkpoint(path);
  lc::restore_training(loaded, fresh.model, fresh.opt.get(), &fresh.rng);
  lc::train_step(fresh.model, *fresh.opt, fresh.train, fresh.cat, fresh.wts, cfg, 0, 4,
                 fresh.rng);

  const auto a = rig.model->named_parameters();
  const auto b = fresh.model->named_parameters();
  for (const auto& p : a) {
    const double gap = (p.value() - b[p.key()]).abs().max().item<double>();
    CHECK(gap <= 1e-7);
  }
  fs::remove(path);
}

TEST_CASE("checkpoint refuses mismatched configuration unless forced") {
  TrainRig rig = make_rig(23);
  lc::TrainConfig cfg = mini_train_config();
  const lc::NormalizationStats stats = lc::compute_stats(rig.train);
  lc::Checkpoint ckpt = lc::make_checkpoint(
      rig.model, *rig.opt, rig.cat, stats, lc::model_config_to_json(mini_model_config()),
      lc::train_config_to_json(cfg), 2, rig.rng);

  CHECK_NOTHROW(lc::require_matching_config(ckpt, ckpt.config_hash(), false));
  CHECK_THROWS_AS(lc::require_matching_config(ckpt, ckpt.config_hash() + 1, false),
                  lc::ConfigError);
  CHECK_NOTHROW(lc::require_matching_config(ckpt, ckpt.config_hash() + 1, true));
}

TEST_CASE("corrupt checkpoint files are rejected") {
  const std::string path = temp_path("latentcast_bad_ckpt.bin");
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(lc::load_checkpoint(path), lc::IoError);
  CHECK_THROWS_AS(lc::load_checkpoint(temp_path("latentcast_missing.bin")), lc::IoError);
  fs::remove(path);
}

TEST_CASE("fit runs the curriculum, validates per epoch, and logs every step") {
  auto [field, cat] = lc::generate_synthetic(mini_synth_config());
  lc::TrainConfig cfg = mini_train_config();
  cfg.epochs = 2;
  cfg.curriculum_iters = {2, 3};
  cfg.curriculum_boundaries = {0, 1};
  cfg.val_fraction = 0.15;
  int seen = 0;
  lc::FitResult res = lc::fit(field, cat, mini_model_config(), cfg,
                              lc::synthetic_constants(8, 16),
                              [&seen](const lc::StepRecord&) { ++seen; });
  CHECK(seen == 4);
  REQUIRE(res.log.size() == 4);
  CHECK(res.log[0].epoch == 0);
  CHECK(res.log[0].t_train == 2);
  CHECK(res.log[1].t_train == 2);
  CHECK(res.log[2].epoch == 1);
  CHECK(res.log[2].t_train == 3);
  CHECK(res.log[3].t_train == 3);
  for (const auto& r : res.log) CHECK(std::isfinite(r.loss_total));
  REQUIRE(res.val_key_loss.size() == 2);
  for (double v : res.val_key_loss) CHECK(std::isfinite(v));
  CHECK(res.checkpoint.epoch == 2);
  CHECK(res.checkpoint.tensors.count("model.encoder.gain") == 1);
}

TEST_CASE("fit resumes an interrupted run without step gaps") {
  auto [field, cat] = lc::generate_synthetic(mini_synth_config());
  lc::TrainConfig cfg = mini_train_config();
  cfg.val_fraction = 0.15;
  const lc::ModelConfig mcfg = mini_model_config();
  const torch::Tensor consts = lc::synthetic_constants(8, 16);

  lc::FitResult full = lc::fit(field, cat, mcfg, cfg, consts);

  std::vector<lc::Checkpoint> snaps;
  std::vector<std::optional<double>> snap_vals;
  lc::fit(field, cat, mcfg, cfg, consts, nullptr, nullptr, false,
          [&](const lc::Checkpoint& c, std::optional<double> v) {
            snaps.push_back(c);
            snap_vals.push_back(v);
          });
  REQUIRE(snaps.size() == 4);
  CHECK(snaps[1].epoch == 2);
  REQUIRE(snap_vals[1].has_value());
  CHECK(*snap_vals[1] == full.val_key_loss[1]);

  lc::FitResult resumed = lc::fit(field, cat, mcfg, cfg, consts, nullptr, &snaps[1]);
  REQUIRE(resumed.log.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK(resumed.log[i].step == full.log[4 + i].step);
    CHECK(resumed.log[i].epoch == full.log[4 + i].epoch);
    CHECK(resumed.log[i].interval == full.log[4 + i].interval);
    CHECK(resumed.log[i].loss_total == full.log[4 + i].loss_total);
  }
  REQUIRE(resumed.val_key_loss.size() == 2);
  CHECK(resumed.val_key_loss[0] == full.val_key_loss[2]);
  CHECK(resumed.val_key_loss[1] == full.val_key_loss[3]);
  CHECK(resumed.checkpoint.epoch == 4);
  for (const auto& [name, t] : full.checkpoint.tensors) {
    CAPTURE(name);
    CHECK(torch::equal(t, resumed.checkpoint.tensors.at(name)));
  }
  // Normalization travels with the checkpoint rather than being recomputed.
  CHECK(torch::equal(resumed.checkpoint.stats.mean, snaps[1].stats.mean));
  CHECK(torch::equal(resumed.checkpoint.stats.std, snaps[1].stats.std));
}

TEST_CASE("fit rejects unusable resume checkpoints unless forced") {
  auto [field, cat] = lc::generate_synthetic(mini_synth_config());
  const lc::ModelConfig mcfg = mini_model_config();
  const lc::TrainConfig cfg = mini_train_config();
  const torch::Tensor consts = lc::synthetic_constants(8, 16);
  lc::FitResult done = lc::fit(field, cat, mcfg, cfg, consts);

  // Already finished: nothing left to train.
  CHECK_THROWS_AS(lc::fit(field, cat, mcfg, cfg, consts, nullptr, &done.checkpoint),
                  lc::ConfigError);

  // A changed schedule no longer hashes to the checkpoint's configuration.
  lc::TrainConfig longer = cfg;
  longer.epochs = 6;
  longer.curriculum_boundaries = {0, 5};
  CHECK_THROWS_AS(lc::fit(field, cat, mcfg, longer, consts, nullptr, &done.checkpoint),
                  lc::ConfigError);
  lc::FitResult extended =
      lc::fit(field, cat, mcfg, longer, consts, nullptr, &done.checkpoint, true);
  REQUIRE(extended.log.size() == 4);
  CHECK(extended.log.front().step == 8);
  CHECK(extended.log.front().epoch == 4);
  CHECK(extended.checkpoint.epoch == 6);
}

TEST_CASE("fit rejects data that contradicts the configuration") {
  auto [field, cat] = lc::generate_synthetic(mini_synth_config());
  lc::ModelConfig wrong = mini_model_config();
  wrong.in_channels = 7;
  wrong.encoder_channels = {8, 8, 8, 4};
  CHECK_THROWS_AS(lc::fit(field, cat, wrong, mini_train_config(),
                          lc::synthetic_constants(8, 16)),
                  lc::DataError);
  lc::VariableCatalog other = cat;
  other.key_indices = {0, 2};
  CHECK_THROWS_AS(lc::fit(field, other, mini_model_config(), mini_train_config(),
                          lc::synthetic_constants(8, 16)),
                  lc::Error);
}

TEST_CASE("training log is valid CSV with the documented columns") {
  std::vector<lc::StepRecord> log(2);
  log[0] = {0, 0, 1, 2, 0.5, 0.25, 0.125, 0.875, 2e-4};
  log[1] = {1, 0, 4, 2, 0.4, 0.2, 0.1, 0.7, 2e-4};
  const std::string path = temp_path("latentcast_log_test.csv");
  lc::write_training_log(log, path);
  std::ifstream in(path);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(header == "step,epoch,interval,T_train,loss_key,loss_recon,loss_latent,loss_total,lr");
  CHECK(row0.rfind("0,0,1,2,0.5,0.25,0.125,0.875,", 0) == 0);
  CHECK(row1.rfind("1,0,4,2,", 0) == 0);
  fs::remove(path);
}

TEST_CASE("config json round-trips and rejects unknown keys") {
  const lc::ModelConfig paper = lc::paper_model_config();
  const lc::ModelConfig back =
      lc::model_config_from_json(lc::model_config_to_json(paper), mini_model_config());
  CHECK(back.in_channels == paper.in_channels);
  CHECK(back.key_indices == paper.key_indices);
  CHECK(back.vit.dim == paper.vit.dim);
  CHECK(back.encoder_channels == paper.encoder_channels);

  const lc::TrainConfig tback =
      lc::train_config_from_json(lc::train_config_to_json(lc::desk_train_config()));
  CHECK(tback.epochs == 4);
  CHECK(tback.curriculum_boundaries == std::vector<int>{0, 3});

  nlohmann::json patch = {{"latent_channels", 5}};
  const lc::ModelConfig patched = lc::model_config_from_json(patch, mini_model_config());
  CHECK(patched.latent_channels == 5);
  CHECK(patched.in_channels == 6);

  CHECK_THROWS_AS(lc::model_config_from_json({{"latent_chanels", 5}}, mini_model_config()),
                  lc::ConfigError);
  CHECK_THROWS_AS(lc::train_config_from_json({{"epoch", 3}}), lc::ConfigError);
  CHECK_THROWS_AS(lc::synthetic_config_from_json({{"step", 10}}), lc::ConfigError);
  CHECK_THROWS_AS(
      lc::model_config_from_json({{"vit", {{"dims", 96}}}}, mini_model_config()),
      lc::ConfigError);
}

}  // TEST_SUITE
