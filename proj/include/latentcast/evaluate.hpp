#pragma once

#include <torch/torch.h>

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latentcast/catalog.hpp"
#include "latentcast/dataset.hpp"
#include "latentcast/grid.hpp"
#include "latentcast/model.hpp"

namespace latentcast {

/// Physical-unit forecast for one init time: given the raw series and the
/// init step index, return key-variable fields [horizon, c, H, W] for leads
/// 1..horizon.
using ForecastFn =
    std::function<torch::Tensor(const GridField& raw, std::int64_t init_t, int horizon)>;

/// Wrap a trained model: normalize the five-step history ending at the init,
/// encode, minimal-iteration rollout, decode, denormalize the key channels.
ForecastFn model_forecaster(ForecastModel& model, const NormalizationStats& stats);

/// The last observed key field repeated at every lead.
torch::Tensor persistence_forecast(const GridField& raw, const VariableCatalog& cat,
                                   std::int64_t init_t, int horizon);

struct LeadMetrics {
  int lead = 0;  // in steps
  double rmse = 0;
  std::optional<double> acc;
  double persistence_rmse = 0;
  std::optional<double> persistence_acc;
  int n_inits = 0;
};

struct MetricReport {
  std::vector<std::string> variables;          // key names, catalog order
  int dt_hours = 6;
  std::vector<std::vector<LeadMetrics>> rows;  // [variable][lead-1]
  std::vector<std::int64_t> init_hours;        // evaluated init timestamps
  int skipped_inits = 0;                       // matched the clock but lacked margin
  nlohmann::json metadata;
};

struct EvalOptions {
  int history = 5;
  std::vector<int> init_hours_utc = {0, 12};  // two inits per day
  nlohmann::json metadata;                    // merged into the report
};

/// Score every key variable at every lead over all init times whose history
/// and horizon fit inside the series. Climatology for the correlation metric
/// is the per-cell mean of the evaluated series; per-init RMSE/ACC values are
/// averaged across inits.
MetricReport evaluate(const ForecastFn& forecast, const GridField& test_raw,
                      const VariableCatalog& cat, int horizon,
                      const EvalOptions& opts = {});

/// CSV columns: variable,lead_hours,rmse,acc,persistence_rmse,persistence_acc,
/// n_inits. Undefined correlations are empty cells.
void write_metric_csv(const MetricReport& r, const std::string& path);
void write_metric_json(const MetricReport& r, const std::string& path);

}  // namespace latentcast
