#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace latentcast {

struct AdamWOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 1.0;
};

/// Adam with decoupled weight decay over a fixed set of named parameters.
/// Only parameters holding a gradient are updated (and decayed), so a step
/// after a partial backward pass leaves the untouched parameter sets exactly
/// as they were. Each parameter keeps its own step counter for bias
/// correction, and the full state is exposed for checkpointing.
class AdamW {
 public:
  struct Slot {
    torch::Tensor m, v;
    std::int64_t t = 0;
  };

  AdamW(std::vector<std::pair<std::string, torch::Tensor>> params, AdamWOptions opts);

  void set_lr(double lr) { opts_.lr = lr; }
  double lr() const { return opts_.lr; }
  const AdamWOptions& options() const { return opts_; }

  void zero_grad();
  void step();

  /// Decay applies to matrices and convolution kernels, not to vectors or
  /// scalars (norm gains, biases, the attention affine).
  static bool decays(const torch::Tensor& p) { return p.dim() >= 2; }

  const std::map<std::string, Slot>& state() const { return state_; }
  void load_state(const std::map<std::string, Slot>& state);

 private:
  std::vector<std::pair<std::string, torch::Tensor>> params_;
  std::map<std::string, Slot> state_;
  AdamWOptions opts_;
};

}  // namespace latentcast
