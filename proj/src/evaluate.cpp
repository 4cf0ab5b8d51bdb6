#include "latentcast/evaluate.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "latentcast/common.hpp"
#include "latentcast/metrics.hpp"

namespace latentcast {

namespace {

torch::Tensor key_index_tensor(const std::vector<std::int64_t>& keys, std::int64_t channels,
                               const char* ctx) {
  std::vector<std::int64_t> k;
  for (std::int64_t i : keys) {
    if (i < 0 || i >= channels)
      throw DataError(std::string(ctx) + ": key index out of range");
    k.push_back(i);
  }
  if (k.empty()) throw DataError(std::string(ctx) + ": empty key set");
  return torch::tensor(k, torch::TensorOptions().dtype(torch::kInt64));
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_number(const std::optional<double>& v) {
  return v ? csv_number(*v) : std::string();
}

}  // namespace

ForecastFn model_forecaster(ForecastModel& model, const NormalizationStats& stats) {
  ForecastModel m = model;  // shared implementation, keeps the wrapper copyable
  return [m, stats](const GridField& raw, std::int64_t init_t, int horizon) mutable {
    const ModelConfig& cfg = m->config();
    if (init_t + 1 < 5)
      throw DataError("model_forecaster: init needs five history steps");
    const GridField window = normalize(raw.slice_time(init_t - 4, 5), stats);
    torch::NoGradGuard ng;
    const torch::Tensor h = m->encode(window.data);
    const torch::Tensor latents =
        m->rollout_latents(h, horizon, raw.time_at(init_t), raw.dt_hours);
    const torch::Tensor decoded = m->decode(latents);
    const torch::Tensor ki =
        key_index_tensor(cfg.key_indices, raw.channels(), "model_forecaster");
    const torch::Tensor sd =
        stats.std.index_select(0, ki).to(torch::kFloat32).reshape({1, -1, 1, 1});
    const torch::Tensor mean =
        stats.mean.index_select(0, ki).to(torch::kFloat32).reshape({1, -1, 1, 1});
    return decoded * sd + mean;
  };
}

torch::Tensor persistence_forecast(const GridField& raw, const VariableCatalog& cat,
                                   std::int64_t init_t, int horizon) {
  if (init_t < 0 || init_t >= raw.steps())
    throw DataError("persistence_forecast: init outside the series");
  const torch::Tensor ki =
      key_index_tensor(cat.key_indices, raw.channels(), "persistence_forecast");
  const torch::Tensor last = raw.data[init_t].index_select(0, ki);
  return last.unsqueeze(0).expand({horizon, -1, -1, -1}).contiguous();
}

MetricReport evaluate(const ForecastFn& forecast, const GridField& test_raw,
                      const VariableCatalog& cat, int horizon, const EvalOptions& opts) {
  if (horizon < 1) throw ConfigError("evaluate: horizon must be positive");
  if (opts.history < 1) throw ConfigError("evaluate: history must be positive");
  for (int h : opts.init_hours_utc)
    if (h < 0 || h >= 24) throw ConfigError("evaluate: init hour outside [0, 24)");
  if (static_cast<std::int64_t>(cat.names.size()) != test_raw.channels())
    throw DataError("evaluate: catalog does not match the series channels");

  const torch::Tensor ki = key_index_tensor(cat.key_indices, test_raw.channels(), "evaluate");
  const std::int64_t c = ki.numel();
  const LatitudeWeights a = latitude_weights(test_raw.lat);
  const torch::Tensor clim_keys =
      compute_climatology(test_raw).mean_field.index_select(0, ki);

  const std::set<int> clock(opts.init_hours_utc.begin(), opts.init_hours_utc.end());
  std::vector<std::int64_t> inits;
  int skipped = 0;
  for (std::int64_t t = 0; t < test_raw.steps(); ++t) {
    const std::int64_t hours = test_raw.time_at(t);
    const int hod = static_cast<int>(((hours % 24) + 24) % 24);
    if (!clock.count(hod)) continue;
    if (t < opts.history - 1 || t + horizon >= test_raw.steps()) {
      ++skipped;
      continue;
    }
    inits.push_back(t);
  }
  if (inits.empty())
    throw DataError("evaluate: no init time has full history and horizon in the series");

  std::vector<torch::Tensor> preds, pers, truths;
  for (std::int64_t t : inits) {
    torch::Tensor p = forecast(test_raw, t, horizon);
    if (p.dim() != 4 || p.size(0) != horizon || p.size(1) != c ||
        p.size(2) != test_raw.height() || p.size(3) != test_raw.width())
      throw ShapeError("evaluate: forecast returned an unexpected shape");
    preds.push_back(p);
    pers.push_back(persistence_forecast(test_raw, cat, t, horizon));
    truths.push_back(test_raw.data.narrow(0, t + 1, horizon).index_select(1, ki));
  }
  const torch::Tensor P = torch::stack(preds);   // [N, horizon, c, H, W]
  const torch::Tensor Q = torch::stack(pers);
  const torch::Tensor T = torch::stack(truths);

  MetricReport report;
  report.dt_hours = test_raw.dt_hours;
  report.init_hours.reserve(inits.size());
  for (std::int64_t t : inits) report.init_hours.push_back(test_raw.time_at(t));
  report.skipped_inits = skipped;
  report.rows.resize(static_cast<std::size_t>(c));
  for (std::int64_t v = 0; v < c; ++v) {
    report.variables.push_back(cat.names[static_cast<std::size_t>(cat.key_indices[v])]);
    const torch::Tensor clim_v = clim_keys[v];
    auto& row = report.rows[static_cast<std::size_t>(v)];
    row.resize(static_cast<std::size_t>(horizon));
    for (int lead = 1; lead <= horizon; ++lead) {
      const torch::Tensor pv = P.select(1, lead - 1).select(1, v);
      const torch::Tensor qv = Q.select(1, lead - 1).select(1, v);
      const torch::Tensor tv = T.select(1, lead - 1).select(1, v);
      LeadMetrics& cell = row[static_cast<std::size_t>(lead - 1)];
      cell.lead = lead;
      cell.rmse = rmse_lat(pv, tv, a);
      cell.acc = acc_lat(pv, tv, clim_v, a);
      cell.persistence_rmse = rmse_lat(qv, tv, a);
      cell.persistence_acc = acc_lat(qv, tv, clim_v, a);
      cell.n_inits = static_cast<int>(inits.size());
    }
  }

  report.metadata = {{"rmse_aggregation", "mean_of_per_init_rmse"},
                     {"climatology", "mean_over_evaluated_series"},
                     {"history_steps", opts.history},
                     {"horizon", horizon}};
  if (opts.metadata.is_object())
    for (const auto& [k, v] : opts.metadata.items()) report.metadata[k] = v;
  return report;
}

void write_metric_csv(const MetricReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path);
  out << "variable,lead_hours,rmse,acc,persistence_rmse,persistence_acc,n_inits\n";
  for (std::size_t v = 0; v < r.rows.size(); ++v)
    for (const LeadMetrics& cell : r.rows[v])
      out << r.variables[v] << ',' << cell.lead * r.dt_hours << ',' << csv_number(cell.rmse)
          << ',' << csv_number(cell.acc) << ',' << csv_number(cell.persistence_rmse) << ','
          << csv_number(cell.persistence_acc) << ',' << cell.n_inits << '\n';
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

void write_metric_json(const MetricReport& r, const std::string& path) {
  nlohmann::json metrics = nlohmann::json::object();
  for (std::size_t v = 0; v < r.rows.size(); ++v) {
    nlohmann::json rows = nlohmann::json::array();
    for (const LeadMetrics& cell : r.rows[v]) {
      nlohmann::json j = {{"lead_hours", cell.lead * r.dt_hours},
                          {"rmse", cell.rmse},
                          {"persistence_rmse", cell.persistence_rmse},
                          {"n_inits", cell.n_inits}};
      j["acc"] = cell.acc ? nlohmann::json(*cell.acc) : nlohmann::json();
      j["persistence_acc"] =
          cell.persistence_acc ? nlohmann::json(*cell.persistence_acc) : nlohmann::json();
      rows.push_back(std::move(j));
    }
    metrics[r.variables[v]] = std::move(rows);
  }
  const nlohmann::json doc = {{"variables", r.variables},
                              {"dt_hours", r.dt_hours},
                              {"init_hours", r.init_hours},
                              {"skipped_inits", r.skipped_inits},
                              {"metadata", r.metadata},
                              {"metrics", metrics}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace latentcast
