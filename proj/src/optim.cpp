#include "latentcast/optim.hpp"

#include <cmath>

#include "latentcast/common.hpp"

namespace latentcast {

AdamW::AdamW(std::vector<std::pair<std::string, torch::Tensor>> params, AdamWOptions opts)
    : params_(std::move(params)), opts_(opts) {
  if (opts_.lr <= 0 || opts_.eps <= 0) throw ConfigError("optimizer lr and eps must be positive");
  if (opts_.beta1 < 0 || opts_.beta1 >= 1 || opts_.beta2 < 0 || opts_.beta2 >= 1)
    throw ConfigError("optimizer betas must lie in [0, 1)");
  if (opts_.weight_decay < 0) throw ConfigError("weight decay must be nonnegative");
  for (const auto& [name, p] : params_) {
    if (!p.defined()) throw ConfigError("undefined parameter '" + name + "'");
    if (state_.count(name) != 0) throw ConfigError("duplicate parameter name '" + name + "'");
    state_[name] = Slot{torch::zeros_like(p), torch::zeros_like(p), 0};
  }
}

void AdamW::zero_grad() {
  for (auto& [name, p] : params_) {
    (void)name;
    if (p.mutable_grad().defined()) p.mutable_grad().reset();
  }
}

void AdamW::step() {
  torch::NoGradGuard guard;
  for (auto& [name, p] : params_) {
    const torch::Tensor g = p.grad();
    if (!g.defined()) continue;
    Slot& s = state_[name];
    s.t += 1;
    s.m.mul_(opts_.beta1).add_(g, 1.0 - opts_.beta1);
    s.v.mul_(opts_.beta2).addcmul_(g, g, 1.0 - opts_.beta2);
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(s.t));
    if (opts_.weight_decay > 0 && decays(p)) p.mul_(1.0 - opts_.lr * opts_.weight_decay);
    torch::Tensor denom = (s.v / bc2).sqrt_().add_(opts_.eps);
    p.addcdiv_(s.m / bc1, denom, -opts_.lr);
  }
}

void AdamW::load_state(const std::map<std::string, Slot>& state) {
  torch::NoGradGuard guard;
  for (auto& [name, slot] : state_) {
    const auto it = state.find(name);
    if (it == state.end()) throw ConfigError("optimizer state missing parameter '" + name + "'");
    if (it->second.m.sizes() != slot.m.sizes() || it->second.v.sizes() != slot.v.sizes())
      throw ShapeError("optimizer state shape mismatch for '" + name + "'");
    slot.m.copy_(it->second.m);
    slot.v.copy_(it->second.v);
    slot.t = it->second.t;
  }
}

}  // namespace latentcast
