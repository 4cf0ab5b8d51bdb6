#include "latentcast/htami.hpp"

#include <algorithm>
#include <string>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

constexpr int kHistorySteps = 5;  // step labels -4..0

int label_depth(const std::vector<int>& depth, int label) {
  return label <= 0 ? 0 : depth[static_cast<std::size_t>(label - 1)];
}

}  // namespace

int ForecastPlan::max_depth() const {
  return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
}

ForecastPlan build_plan(int n) {
  if (n < 1) throw DataError("build_plan: need at least one lead step, got " + std::to_string(n));
  ForecastPlan plan;
  plan.steps.reserve(static_cast<std::size_t>(n));
  plan.depth.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    PlanStep step;
    step.target = i;
    if (i == 1) {
      step.interval = 1;
      step.inputs = {-1, 0};
    } else if (i == 2) {
      step.interval = 2;
      step.inputs = {-2, 0};
    } else if (i == 3) {
      step.interval = 1;
      step.inputs = {1, 2};
    } else {
      step.interval = 4;
      step.inputs = {i - 8, i - 4};
    }
    if (step.inputs[0] < -(kHistorySteps - 1) || step.inputs[1] >= i)
      throw Error("build_plan: internal schedule violation at target " + std::to_string(i));
    plan.depth.push_back(1 + std::max(label_depth(plan.depth, step.inputs[0]),
                                      label_depth(plan.depth, step.inputs[1])));
    plan.steps.push_back(step);
  }
  return plan;
}

std::vector<int> optimal_depth(int n, const std::vector<int>& intervals, int history) {
  if (intervals.empty()) throw DataError("optimal_depth: interval set must be nonempty");
  if (history < 1) throw DataError("optimal_depth: need at least one history step");
  if (n < 1) throw DataError("optimal_depth: need at least one lead step");
  std::vector<int> depth(static_cast<std::size_t>(n), kUnreachableDepth);
  auto at = [&](int label) {
    return label <= 0 ? 0 : depth[static_cast<std::size_t>(label - 1)];
  };
  for (int i = 1; i <= n; ++i) {
    int best = kUnreachableDepth;
    for (int s : intervals) {
      if (s < 1) throw DataError("optimal_depth: intervals must be positive");
      if (i - 2 * s < -(history - 1)) continue;
      const int da = at(i - 2 * s);
      const int db = at(i - s);
      if (da == kUnreachableDepth || db == kUnreachableDepth) continue;
      const int d = 1 + std::max(da, db);
      if (best == kUnreachableDepth || d < best) best = d;
    }
    depth[static_cast<std::size_t>(i - 1)] = best;
  }
  return depth;
}

std::vector<torch::Tensor> rollout(const std::vector<torch::Tensor>& history, int n,
                                   const std::map<int, LpmStepFn>& lpms,
                                   std::int64_t t0_hours, int dt_hours) {
  if (static_cast<int>(history.size()) != kHistorySteps)
    throw DataError("rollout: expected exactly 5 history latents, got " +
                    std::to_string(history.size()));
  ForecastPlan plan = build_plan(n);
  std::vector<torch::Tensor> predicted(static_cast<std::size_t>(n));
  auto latent_at = [&](int label) -> const torch::Tensor& {
    if (label <= 0) return history[static_cast<std::size_t>(label + kHistorySteps - 1)];
    return predicted[static_cast<std::size_t>(label - 1)];
  };
  for (const PlanStep& step : plan.steps) {
    auto it = lpms.find(step.interval);
    if (it == lpms.end())
      throw ConfigError("rollout: no prediction model registered for interval " +
                        std::to_string(step.interval));
    const std::int64_t ta = t0_hours + static_cast<std::int64_t>(step.inputs[0]) * dt_hours;
    const std::int64_t tb = t0_hours + static_cast<std::int64_t>(step.inputs[1]) * dt_hours;
    predicted[static_cast<std::size_t>(step.target - 1)] =
        it->second(latent_at(step.inputs[0]), latent_at(step.inputs[1]), ta, tb);
  }
  return predicted;
}

}  // namespace latentcast
