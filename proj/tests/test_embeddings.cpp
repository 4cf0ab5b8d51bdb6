#include <cmath>

#include "latentcast/common.hpp"
#include "latentcast/embeddings.hpp"
#include "latentcast/time_utils.hpp"

#include "doctest_compat.h"

using namespace latentcast;

TEST_SUITE_BEGIN("embeddings");

TEST_CASE("raw time features follow the sin/cos formula") {
  const auto& cycles = default_cycles_days();
  REQUIRE(cycles.size() == 15);
  REQUIRE(cycles.front() == 1);
  REQUIRE(cycles.back() == 15);

  SUBCASE("epoch start is phase zero for every cycle") {
    torch::Tensor f = raw_time_features(0, cycles);
    REQUIRE(f.numel() == 30);
    for (int i = 0; i < 15; ++i) {
      CHECK(f[2 * i].item<double>() == 0.0);
      CHECK(f[2 * i + 1].item<double>() == 1.0);
    }
  }
  SUBCASE("half a day through the one-day cycle") {
    torch::Tensor f = raw_time_features(12, {1});
    CHECK(f[0].item<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f[1].item<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("36 hours through the three-day cycle is half a cycle") {
    // 2*pi*36/72 = pi: the brute-force formula evaluation gives (0, -1).
    torch::Tensor f = raw_time_features(36, {3});
    CHECK(f[0].item<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f[1].item<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("quarter cycle") {
    torch::Tensor f = raw_time_features(18, {3});  // 2*pi*18/72 = pi/2
    CHECK(f[0].item<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[1].item<double>() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("raw time features are exactly periodic") {
  const auto& cycles = default_cycles_days();
  for (std::int64_t h : {std::int64_t(0), std::int64_t(7), std::int64_t(-123),
                         std::int64_t(98765)}) {
    torch::Tensor base = raw_time_features(h, cycles);
    for (std::size_t i = 0; i < cycles.size(); ++i) {
      const std::int64_t period = 24 * cycles[i];
      for (std::int64_t L : {std::int64_t(1), std::int64_t(-2), std::int64_t(40)}) {
        torch::Tensor shifted = raw_time_features(h + period * L, cycles);
        CHECK(shifted[2 * static_cast<std::int64_t>(i)].item<double>() ==
              base[2 * static_cast<std::int64_t>(i)].item<double>());
        CHECK(shifted[2 * static_cast<std::int64_t>(i) + 1].item<double>() ==
              base[2 * static_cast<std::int64_t>(i) + 1].item<double>());
      }
    }
  }
}

TEST_CASE("time embedding broadcasts uniformly over the grid") {
  torch::manual_seed(21);
  TimeEmbed embed(15, 128, 12);
  torch::Tensor out = embed->at_hours(-6, 0, 16, 32);
  CHECK(out.sizes() == torch::IntArrayRef({12, 16, 32}));
  // Zero spatial variance per channel.
  torch::Tensor flat = out.flatten(1);
  CHECK((std::get<0>(flat.max(1)) - std::get<0>(flat.min(1))).abs().max().item<float>() ==
        0.0f);
  // Determinism.
  CHECK(embed->at_hours(-6, 0, 16, 32).equal(out));
  // Different stamps give different embeddings.
  CHECK_FALSE(embed->at_hours(-12, -6, 16, 32).equal(out));
}

TEST_CASE("time embedding supports batches and checks lengths") {
  torch::manual_seed(22);
  TimeEmbed embed(15, 128, 12);
  const auto& cycles = default_cycles_days();
  torch::Tensor a = torch::stack({raw_time_features(0, cycles), raw_time_features(6, cycles)});
  torch::Tensor b = torch::stack({raw_time_features(6, cycles), raw_time_features(12, cycles)});
  torch::Tensor out = embed->forward(a, b, 8, 8);
  CHECK(out.sizes() == torch::IntArrayRef({2, 12, 8, 8}));
  // Row 0 of the batch equals the unbatched call.
  torch::Tensor solo = embed->forward(a[0], b[0], 8, 8);
  CHECK(torch::allclose(out[0], solo, 1e-6, 1e-7));
  CHECK_THROWS_AS(embed->forward(a, b.narrow(1, 0, 20), 8, 8), ShapeError);
  CHECK_THROWS_AS(embed->forward(raw_time_features(0, {1, 2}), raw_time_features(6, {1, 2}),
                                 8, 8),
                  ShapeError);
}

TEST_CASE("constant embedding maps K fields to 12 channels") {
  torch::manual_seed(23);
  ConstEmbed embed(2, 12);
  torch::Tensor constants = synthetic_constants(16, 32);
  torch::Tensor out = embed->forward(constants);
  CHECK(out.sizes() == torch::IntArrayRef({12, 16, 32}));
  CHECK(embed->forward(constants).equal(out));

  torch::Tensor bad = constants.clone();
  bad[0][3][3] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(embed->forward(bad), DataError);
}

TEST_CASE("constant embedding with zeroed parameters maps zero to zero") {
  ConstEmbed embed(2, 12);
  {
    torch::NoGradGuard guard;
    for (auto& p : embed->parameters()) p.zero_();
  }
  torch::Tensor out = embed->forward(torch::zeros({2, 8, 8}));
  CHECK(out.abs().max().item<float>() == 0.0f);
}

TEST_CASE("constant embedding commutes with longitude rotation") {
  torch::manual_seed(24);
  ConstEmbed embed(2, 12);
  torch::Tensor constants = synthetic_constants(8, 16);
  torch::Tensor rolled = torch::roll(constants, {3}, {2});
  torch::Tensor a = torch::roll(embed->forward(constants), {3}, {2});
  torch::Tensor b = embed->forward(rolled);
  CHECK(torch::allclose(a, b, 1e-5, 1e-6));
}

TEST_CASE("synthetic constants: blob mask plus latitude ramp") {
  torch::Tensor c = synthetic_constants(16, 32);
  CHECK(c.sizes() == torch::IntArrayRef({2, 16, 32}));
  // Mask is binary and nontrivial.
  torch::Tensor mask = c[0];
  CHECK(((mask == 0.0f) | (mask == 1.0f)).all().item<bool>());
  CHECK(mask.sum().item<float>() > 0.0f);
  CHECK(mask.sum().item<float>() < 16 * 32);
  // Latitude ramp is monotone south-to-north, constant along longitude.
  torch::Tensor ramp = c[1];
  for (std::int64_t y = 1; y < 16; ++y)
    CHECK(ramp[y][0].item<float>() > ramp[y - 1][0].item<float>());
  CHECK((ramp.amax(1) - ramp.amin(1)).abs().max().item<float>() == 0.0f);
  CHECK(ramp.min().item<float>() >= -1.0f);
  CHECK(ramp.max().item<float>() <= 1.0f);
}

TEST_SUITE_END();
