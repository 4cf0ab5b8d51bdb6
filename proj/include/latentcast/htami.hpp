#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace latentcast {

/// One scheduled prediction: the model with stride `interval` maps the two
/// latents at step labels `inputs` (chronological, spaced `interval` apart)
/// to the latent at step label `target`. Labels <= 0 are history steps.
struct PlanStep {
  int target = 0;
  int interval = 0;
  std::array<int, 2> inputs{0, 0};  // (target - 2*interval, target - interval)
};

/// The full schedule for targets 1..n plus the per-target iteration depth
/// (longest chain of model applications; history steps have depth 0).
struct ForecastPlan {
  std::vector<PlanStep> steps;
  std::vector<int> depth;  // depth[i - 1] is the depth of target i

  int max_depth() const;
};

/// The minimal-iteration schedule: target 1 from strides of 1 on (-1, 0),
/// target 2 from strides of 2 on (-2, 0), target 3 from (1, 2), and every
/// target i >= 4 from strides of 4 on (i-8, i-4).
ForecastPlan build_plan(int n);

/// Marker for targets no interval combination can reach.
inline constexpr int kUnreachableDepth = -1;

/// Dynamic-programming oracle for the minimal achievable depth per target:
/// depth(j) = 0 for history labels j in [-history+1, 0], and
/// depth(i) = min over strides s with i - 2s >= -history+1 of
///            1 + max(depth(i-s), depth(i-2s)).
std::vector<int> optimal_depth(int n, const std::vector<int>& intervals = {1, 2, 4},
                               int history = 5);

/// Applies the stride-s model to two latents with their wall-clock hour
/// stamps (chronological order) and returns the predicted latent.
using LpmStepFn = std::function<torch::Tensor(const torch::Tensor& earlier,
                                              const torch::Tensor& later,
                                              std::int64_t earlier_hours,
                                              std::int64_t later_hours)>;

/// Execute build_plan(n) over five history latents (step labels -4..0, in
/// chronological order). `t0_hours` stamps label 0; label k is at
/// t0 + k*dt. Returns the predicted latents for labels 1..n in order.
std::vector<torch::Tensor> rollout(const std::vector<torch::Tensor>& history, int n,
                                   const std::map<int, LpmStepFn>& lpms,
                                   std::int64_t t0_hours, int dt_hours);

}  // namespace latentcast
