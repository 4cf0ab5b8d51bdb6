// Command-line front end: dataset synthesis, training, forecasting,
// evaluation, plan inspection, and input attribution, each writing its
// artifacts into a timestamp+config-hash run directory.
#include <torch/torch.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "latentcast/attribution.hpp"
#include "latentcast/catalog.hpp"
#include "latentcast/checkpoint.hpp"
#include "latentcast/common.hpp"
#include "latentcast/config.hpp"
#include "latentcast/dataset.hpp"
#include "latentcast/dataset_io.hpp"
#include "latentcast/evaluate.hpp"
#include "latentcast/grid.hpp"
#include "latentcast/htami.hpp"
#include "latentcast/metrics.hpp"
#include "latentcast/model.hpp"
#include "latentcast/svg_plot.hpp"
#include "latentcast/synthetic.hpp"
#include "latentcast/time_utils.hpp"
#include "latentcast/training.hpp"

namespace lc = latentcast;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// configuration composition: profile defaults <- config file <- flags
// ---------------------------------------------------------------------------

struct GlobalOpts {
  std::string config;
  std::string out = "runs";
  std::string profile = "desk";
  std::string stamp;  // run-directory prefix; current UTC time when empty
  std::optional<std::int64_t> seed;
  bool force = false;
};

struct EvalConfig {
  int horizon = 8;
  int history = 5;
  std::vector<int> init_hours_utc = {0, 12};
};

json eval_config_to_json(const EvalConfig& e) {
  return {{"horizon", e.horizon},
          {"history", e.history},
          {"init_hours_utc", e.init_hours_utc}};
}

EvalConfig eval_config_from_json(const json& j, EvalConfig base) {
  lc::require_allowed_keys(j, "evaluate", {"horizon", "history", "init_hours_utc"});
  if (j.contains("horizon")) base.horizon = j.at("horizon").get<int>();
  if (j.contains("history")) base.history = j.at("history").get<int>();
  if (j.contains("init_hours_utc"))
    base.init_hours_utc = j.at("init_hours_utc").get<std::vector<int>>();
  return base;
}

struct Composed {
  lc::ModelConfig model;
  lc::TrainConfig train;
  lc::SyntheticConfig synth;
  EvalConfig eval;
  json full;  // canonical dump of all four sections
};

struct ProfileBase {
  lc::ModelConfig m;
  lc::TrainConfig t;
  lc::SyntheticConfig s;
  EvalConfig e;
};

ProfileBase profile_base(const std::string& p) {
  if (p == "desk")
    return {lc::desk_model_config(), lc::desk_train_config(), lc::SyntheticConfig{},
            EvalConfig{}};
  if (p == "paper") {
    lc::SyntheticConfig s;
    s.channels = 104;
    s.key_channels = 20;
    s.height = 32;
    s.width = 64;
    EvalConfig e;
    e.horizon = 60;
    return {lc::paper_model_config(), lc::TrainConfig{}, s, e};
  }
  throw lc::ConfigError("unknown profile '" + p + "' (expected 'desk' or 'paper')");
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw lc::ConfigError("cannot open config file '" + path + "'");
  json file;
  try {
    file = json::parse(in);
  } catch (const json::exception& e) {
    throw lc::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  lc::require_allowed_keys(file, "config file", {"model", "train", "synthetic", "evaluate"});
  return file;
}

json section(const json& file, const char* name) {
  return file.contains(name) ? file.at(name) : json::object();
}

Composed compose(const GlobalOpts& g) {
  const ProfileBase base = profile_base(g.profile);
  const json file = load_config_file(g.config);
  Composed c;
  try {
    c.model = lc::model_config_from_json(section(file, "model"), base.m);
    c.train = lc::train_config_from_json(section(file, "train"), base.t);
    c.synth = lc::synthetic_config_from_json(section(file, "synthetic"), base.s);
    c.eval = eval_config_from_json(section(file, "evaluate"), base.e);
  } catch (const json::exception& e) {
    throw lc::ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  if (g.seed) {
    c.synth.seed = static_cast<std::uint64_t>(*g.seed);
    c.train.seed = static_cast<std::uint64_t>(*g.seed);
  }
  c.full = {{"model", lc::model_config_to_json(c.model)},
            {"train", lc::train_config_to_json(c.train)},
            {"synthetic", lc::synthetic_config_to_json(c.synth)},
            {"evaluate", eval_config_to_json(c.eval)}};
  return c;
}

// ---------------------------------------------------------------------------
// run directories
// ---------------------------------------------------------------------------

std::string utc_stamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

fs::path open_run_dir(const GlobalOpts& g, const json& full, const char* cmd) {
  const std::uint64_t h = lc::fnv1a64(std::string(cmd) + "\n" + full.dump());
  const std::string stamp = g.stamp.empty() ? utc_stamp_now() : g.stamp;
  const fs::path dir = fs::path(g.out) / (stamp + "-" + lc::to_hex(h).substr(0, 8));
  if (fs::exists(dir) && !g.force)
    throw lc::ConfigError("run directory '" + dir.string() +
                          "' already exists; pass --force to reuse it");
  fs::create_directories(dir);
  return dir;
}

void write_run_config(const fs::path& dir, const Composed& c, const GlobalOpts& g,
                      const char* cmd) {
  json out = c.full;
  out["command"] = cmd;
  out["profile"] = g.profile;
  std::ofstream f(dir / "config.json", std::ios::trunc);
  if (!f) throw lc::IoError("cannot write " + (dir / "config.json").string());
  f << out.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

struct LoadedModel {
  lc::Checkpoint ckpt;
  lc::ModelConfig mcfg;
  lc::ForecastModel model{nullptr};
};

LoadedModel load_model(const std::string& path) {
  LoadedModel lm{lc::load_checkpoint(path), lc::ModelConfig{}, lc::ForecastModel(nullptr)};
  lm.mcfg = lc::model_config_from_json(lm.ckpt.model_config);
  lm.mcfg.validate();
  lm.model = lc::ForecastModel(lm.mcfg, lc::synthetic_constants(lm.mcfg.height, lm.mcfg.width));
  lc::restore_training(lm.ckpt, lm.model, nullptr, nullptr);
  lm.model->eval();
  return lm;
}

void require_compatible(const lc::GridField& field, const lc::VariableCatalog& cat,
                        const lc::ModelConfig& mcfg) {
  if (field.channels() != mcfg.in_channels || field.height() != mcfg.height ||
      field.width() != mcfg.width)
    throw lc::DataError("dataset shape [" + std::to_string(field.channels()) + "," +
                        std::to_string(field.height()) + "," + std::to_string(field.width()) +
                        "] does not match the checkpoint's model [" +
                        std::to_string(mcfg.in_channels) + "," + std::to_string(mcfg.height) +
                        "," + std::to_string(mcfg.width) + "]");
  if (cat.key_indices != mcfg.key_indices)
    throw lc::DataError("dataset catalog key indices differ from the checkpoint's");
}

// --init accepts a step index (possibly negative, counted from the end) or an
// ISO-8601 timestamp on the dataset's clock.
std::int64_t resolve_init(const std::string& s, const lc::GridField& field) {
  if (s.empty()) return field.steps() - 1;
  const std::size_t digits_from = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  const bool numeric = s.size() > digits_from &&
                       s.find_first_not_of("0123456789", digits_from) == std::string::npos;
  std::int64_t idx = 0;
  if (numeric) {
    idx = std::stoll(s);
    if (idx < 0) idx += field.steps();
  } else {
    const std::int64_t hours = lc::parse_iso_hours(s);
    const std::int64_t rel = hours - field.t0_hours;
    if (rel % field.dt_hours != 0)
      throw lc::DataError("init time " + s + " does not fall on the dataset's " +
                          std::to_string(field.dt_hours) + "-hour grid");
    idx = rel / field.dt_hours;
  }
  if (idx < 0 || idx >= field.steps())
    throw lc::DataError("init step " + std::to_string(idx) + " outside the dataset [0, " +
                        std::to_string(field.steps()) + ")");
  return idx;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const fs::path& path, const torch::Tensor& m,
                      const std::vector<std::string>& rows,
                      const std::vector<std::string>& cols) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw lc::IoError("cannot write " + path.string());
  out << "variable";
  for (const auto& c : cols) out << "," << c;
  out << "\n";
  const auto acc = m.accessor<double, 2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i];
    for (std::int64_t j = 0; j < m.size(1); ++j) {
      const double v = acc[static_cast<std::int64_t>(i)][j];
      out << ",";
      if (std::isfinite(v)) out << fmt(v);
    }
    out << "\n";
  }
}

std::string join_ints(const std::vector<int>& v, const char* open, const char* close) {
  std::string s = open;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + close;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_synth(const GlobalOpts& g) {
  const Composed c = compose(g);
  const fs::path run = open_run_dir(g, c.full, "synth");
  write_run_config(run, c, g, "synth");
  auto [field, cat] = lc::generate_synthetic(c.synth);
  const fs::path out = run / "dataset";
  lc::write_dataset(out, field, cat);
  std::cout << "dataset: " << out.string() << " (C=" << c.synth.channels
            << " c=" << c.synth.key_channels << " " << c.synth.height << "x" << c.synth.width
            << " T=" << c.synth.steps << " seed=" << c.synth.seed << ")\n";
  std::cout << "run_dir: " << run.string() << "\n";
  return 0;
}

void print_schedule(const lc::TrainConfig& t) {
  std::cout << "schedule: " << t.epochs << " epochs, curriculum "
            << join_ints(t.curriculum_iters, "[", "]") << " at epochs "
            << join_ints(t.curriculum_boundaries, "{", "}") << ", lr " << t.lr0 << " x"
            << t.lr_decay << " every " << t.lr_decay_every << " epochs until epoch "
            << t.lr_freeze_epoch << ", batch " << t.batch << ", " << t.steps_per_epoch
            << " steps/epoch\n";
}

int cmd_train(const GlobalOpts& g, const std::string& data_dir, const std::string& resume_path,
              bool dry_run) {
  Composed c = compose(g);
  std::optional<lc::Checkpoint> resume;
  if (!resume_path.empty()) {
    resume = lc::load_checkpoint(resume_path);
    // A resumed run continues the checkpoint's own plan; config-file sections
    // and --seed still apply on top (a changed plan then needs --force).
    const json file = load_config_file(g.config);
    try {
      c.model = lc::model_config_from_json(section(file, "model"),
                                           lc::model_config_from_json(resume->model_config));
      c.train = lc::train_config_from_json(section(file, "train"),
                                           lc::train_config_from_json(resume->train_config));
    } catch (const json::exception& e) {
      throw lc::ConfigError(std::string("config value has the wrong type: ") + e.what());
    }
    if (g.seed) c.train.seed = static_cast<std::uint64_t>(*g.seed);
    c.full["model"] = lc::model_config_to_json(c.model);
    c.full["train"] = lc::train_config_to_json(c.train);
  }
  print_schedule(c.train);
  if (dry_run) {
    std::cout << "dry run: configuration is valid; no artifacts written\n";
    return 0;
  }
  if (data_dir.empty())
    throw lc::ConfigError("train needs --data pointing at a dataset directory");

  auto [field, cat] = lc::load_dataset(data_dir);
  const fs::path run = open_run_dir(g, c.full, "train");
  write_run_config(run, c, g, "train");

  const fs::path log_path = run / "train_log.csv";
  std::ofstream log_out(log_path, std::ios::trunc);
  if (!log_out) throw lc::IoError("cannot write " + log_path.string());
  log_out << "step,epoch,interval,T_train,loss_key,loss_recon,loss_latent,loss_total,lr\n";
  log_out.flush();

  const fs::path ckpt_path = run / "checkpoint.bin";
  const auto t_start = std::chrono::steady_clock::now();
  auto on_step = [&](const lc::StepRecord& r) {
    char line[320];
    std::snprintf(line, sizeof(line), "%lld,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.step), r.epoch, r.interval, r.t_train, r.loss_key,
                  r.loss_recon, r.loss_latent, r.loss_total, r.lr);
    log_out << line;
    log_out.flush();
    if (r.step % 10 == 0) {
      std::snprintf(line, sizeof(line), "step %6lld  epoch %3d  interval %d  loss %.5f\n",
                    static_cast<long long>(r.step), r.epoch, r.interval, r.loss_total);
      std::cout << line << std::flush;
    }
  };
  auto on_epoch = [&](const lc::Checkpoint& ck, std::optional<double> val) {
    lc::save_checkpoint(ck, ckpt_path.string());
    std::cout << "epoch " << ck.epoch << "/" << c.train.epochs << " done";
    if (val) std::cout << "  val_key_loss " << *val;
    std::cout << "\n" << std::flush;
  };

  const torch::Tensor consts = lc::synthetic_constants(c.model.height, c.model.width);
  lc::FitResult res = lc::fit(field, cat, c.model, c.train, consts, on_step,
                              resume ? &*resume : nullptr, g.force, on_epoch);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  lc::save_checkpoint(res.checkpoint, ckpt_path.string());
  std::cout << "trained " << res.log.size() << " steps in " << fmt(secs) << " s\n";
  std::cout << "checkpoint: " << ckpt_path.string() << "\n";
  std::cout << "log: " << log_path.string() << "\n";
  std::cout << "run_dir: " << run.string() << "\n";
  return 0;
}

int cmd_forecast(const GlobalOpts& g, const std::string& ckpt_path, const std::string& data_dir,
                 const std::string& init_str, int steps) {
  if (steps < 1) throw lc::ConfigError("forecast needs --steps >= 1");
  const Composed c = compose(g);
  LoadedModel lm = load_model(ckpt_path);
  auto [field, cat] = lc::load_dataset(data_dir);
  require_compatible(field, cat, lm.mcfg);

  const std::int64_t init_t = resolve_init(init_str, field);
  const int history = 5;
  if (init_t < history - 1)
    throw lc::DataError("init step " + std::to_string(init_t) + " has fewer than " +
                        std::to_string(history) + " history steps");

  const fs::path run = open_run_dir(g, c.full, "forecast");
  write_run_config(run, c, g, "forecast");

  lc::ForecastFn fn = lc::model_forecaster(lm.model, lm.ckpt.stats);
  torch::NoGradGuard ng;
  const torch::Tensor pred = fn(field, init_t, steps);  // [steps, c, H, W] physical

  lc::GridField out;
  out.data = pred.contiguous();
  out.lat = field.lat;
  out.lon = field.lon;
  out.dt_hours = field.dt_hours;
  out.t0_hours = field.time_at(init_t) + field.dt_hours;
  lc::VariableCatalog kcat;
  for (std::int64_t k : lm.ckpt.catalog.key_indices) {
    const auto i = static_cast<std::size_t>(k);
    kcat.names.push_back(lm.ckpt.catalog.names[i]);
    kcat.levels.push_back(lm.ckpt.catalog.levels[i]);
    kcat.surface_flags.push_back(lm.ckpt.catalog.surface_flags[i]);
  }
  for (std::int64_t j = 0; j < lm.mcfg.key_channels; ++j) kcat.key_indices.push_back(j);
  const fs::path out_dir = run / "forecast";
  lc::write_dataset(out_dir, out, kcat);

  json meta = {{"init_time", lc::format_iso_hours(field.time_at(init_t))},
               {"init_index", init_t},
               {"steps", steps},
               {"checkpoint", ckpt_path},
               {"checkpoint_config_hash", lc::to_hex(lm.ckpt.config_hash())}};
  std::ofstream(run / "metadata.json") << meta.dump(2) << "\n";

  std::cout << "forecast: " << out_dir.string() << " (init "
            << lc::format_iso_hours(field.time_at(init_t)) << ", " << steps << " steps of "
            << field.dt_hours << " h)\n";
  std::cout << "run_dir: " << run.string() << "\n";
  return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& ckpt_path, const std::string& data_dir,
                 int horizon_flag) {
  Composed c = compose(g);
  if (horizon_flag > 0) {
    c.eval.horizon = horizon_flag;
    c.full["evaluate"] = eval_config_to_json(c.eval);
  }
  LoadedModel lm = load_model(ckpt_path);
  auto [field, cat] = lc::load_dataset(data_dir);
  require_compatible(field, cat, lm.mcfg);

  const fs::path run = open_run_dir(g, c.full, "evaluate");
  write_run_config(run, c, g, "evaluate");

  lc::EvalOptions opts;
  opts.history = c.eval.history;
  opts.init_hours_utc = c.eval.init_hours_utc;
  opts.metadata = {{"checkpoint", ckpt_path},
                   {"checkpoint_config_hash", lc::to_hex(lm.ckpt.config_hash())},
                   {"dataset", data_dir}};
  lc::ForecastFn fn = lc::model_forecaster(lm.model, lm.ckpt.stats);
  const lc::MetricReport rep = lc::evaluate(fn, field, cat, c.eval.horizon, opts);

  lc::write_metric_csv(rep, (run / "metrics.csv").string());
  lc::write_metric_json(rep, (run / "metrics.json").string());

  const fs::path plots = run / "plots";
  fs::create_directories(plots);
  const double nan = std::nan("");
  for (std::size_t v = 0; v < rep.variables.size(); ++v) {
    lc::PlotSeries mr{"model", {}, {}}, pr{"persistence", {}, {}};
    lc::PlotSeries ma{"model", {}, {}}, pa{"persistence", {}, {}};
    for (const lc::LeadMetrics& L : rep.rows[v]) {
      const double h = static_cast<double>(L.lead) * rep.dt_hours;
      mr.x.push_back(h);
      mr.y.push_back(L.rmse);
      pr.x.push_back(h);
      pr.y.push_back(L.persistence_rmse);
      ma.x.push_back(h);
      ma.y.push_back(L.acc ? *L.acc : nan);
      pa.x.push_back(h);
      pa.y.push_back(L.persistence_acc ? *L.persistence_acc : nan);
    }
    const std::string& name = rep.variables[v];
    lc::write_line_chart_svg((plots / ("rmse_" + name + ".svg")).string(),
                             "latitude-weighted RMSE - " + name, "lead (hours)", "RMSE",
                             {mr, pr});
    lc::write_line_chart_svg((plots / ("acc_" + name + ".svg")).string(),
                             "anomaly correlation - " + name, "lead (hours)", "ACC", {ma, pa});
  }

  const lc::CorrelationMatrices corr = lc::correlation_matrix(field, cat);
  write_matrix_csv(run / "corr_self.csv", corr.self, rep.variables, rep.variables);
  write_matrix_csv(run / "corr_cross.csv", corr.cross, rep.variables, cat.names);
  lc::write_heatmap_svg((plots / "corr_self.svg").string(), "key-key correlation", corr.self,
                        rep.variables, rep.variables);
  lc::write_heatmap_svg((plots / "corr_cross.svg").string(), "key-input correlation",
                        corr.cross, rep.variables, cat.names);

  std::cout << "variable  lead1_rmse  persistence_rmse  lead1_acc\n";
  for (std::size_t v = 0; v < rep.variables.size(); ++v) {
    const lc::LeadMetrics& L = rep.rows[v][0];
    char line[160];
    std::snprintf(line, sizeof(line), "%-9s %.6f    %.6f          %s\n",
                  rep.variables[v].c_str(), L.rmse, L.persistence_rmse,
                  L.acc ? fmt(*L.acc).c_str() : "-");
    std::cout << line;
  }
  std::cout << "inits: " << rep.init_hours.size() << " (skipped " << rep.skipped_inits
            << ")\n";
  std::cout << "metrics: " << (run / "metrics.csv").string() << "\n";
  std::cout << "run_dir: " << run.string() << "\n";
  return 0;
}

int cmd_plan(int n, bool as_json) {
  if (n < 1) throw lc::ConfigError("plan needs a target count n >= 1");
  const lc::ForecastPlan plan = lc::build_plan(n);
  const std::vector<int> oracle = lc::optimal_depth(n);
  if (as_json) {
    json steps = json::array();
    for (const lc::PlanStep& s : plan.steps)
      steps.push_back({{"target", s.target},
                       {"interval", s.interval},
                       {"inputs", {s.inputs[0], s.inputs[1]}}});
    json out = {{"n", n},
                {"steps", steps},
                {"depth", plan.depth},
                {"optimal_depth", oracle},
                {"max_depth", plan.max_depth()}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "target  interval  inputs        depth\n";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const lc::PlanStep& s = plan.steps[i];
    char line[96];
    std::snprintf(line, sizeof(line), "%6d  %8d  (%4d,%4d)  %5d\n", s.target, s.interval,
                  s.inputs[0], s.inputs[1], plan.depth[i]);
    std::cout << line;
  }
  std::cout << "max_depth: " << plan.max_depth() << "  (" << plan.steps.size()
            << " model calls for " << n << " targets)\n";
  return 0;
}

int cmd_attribute(const GlobalOpts& g, const std::string& ckpt_path, const std::string& data_dir,
                  const std::string& init_str, int m, const std::string& baseline_mode) {
  if (baseline_mode != "zero" && baseline_mode != "self" && baseline_mode != "prev")
    throw lc::ConfigError("--baseline must be 'zero', 'prev', or 'self'");
  const Composed c = compose(g);
  LoadedModel lm = load_model(ckpt_path);
  auto [field, cat] = lc::load_dataset(data_dir);
  require_compatible(field, cat, lm.mcfg);

  const std::int64_t init_t = resolve_init(init_str, field);
  if (init_t < 1)
    throw lc::DataError("attribution needs one step of history before the init");

  const fs::path run = open_run_dir(g, c.full, "attribute");
  write_run_config(run, c, g, "attribute");
  const fs::path plots = run / "plots";
  fs::create_directories(plots);

  // Normalized current state x and fixed previous state; the attributed
  // scalar is the latitude-weighted area mean of the decoded lead-1 forecast
  // of one key variable as a function of x.
  const lc::GridField window = field.slice_time(init_t - 1, 2);
  const lc::GridField norm = lc::normalize(window, lm.ckpt.stats);
  const torch::Tensor x_prev = norm.data[0];
  const torch::Tensor x_curr = norm.data[1];
  const std::vector<std::int64_t> hp = {norm.time_at(0)};
  const std::vector<std::int64_t> hc = {norm.time_at(1)};
  const torch::Tensor wlat =
      lc::latitude_weights(field.lat).broadcast().squeeze(0);  // [1,H,1] float32
  // "zero" is the per-channel climatological mean (degenerate for the
  // normalization layers, so midpoint completeness needs large m); "prev" is
  // the state one step earlier (stays on the data manifold; tight
  // completeness at small m); "self" gives the all-zero sanity attribution.
  const torch::Tensor baseline = baseline_mode == "self"   ? x_curr.clone()
                                 : baseline_mode == "prev" ? x_prev.clone()
                                                           : torch::zeros_like(x_curr);

  const std::int64_t n_keys = lm.mcfg.key_channels;
  torch::Tensor table = torch::zeros({n_keys, lm.mcfg.in_channels}, torch::kFloat64);
  std::ofstream csv(run / "attribution.csv", std::ios::trunc);
  if (!csv) throw lc::IoError("cannot write " + (run / "attribution.csv").string());
  csv << "target";
  for (const auto& nme : cat.names) csv << "," << nme;
  csv << "\n";

  for (std::int64_t k = 0; k < n_keys; ++k) {
    const std::string target = cat.names[static_cast<std::size_t>(cat.key_indices[k])];
    lc::ScalarFn f = [&, k](const torch::Tensor& x) {
      torch::Tensor hprev = lm.model->encode(x_prev.unsqueeze(0));
      torch::Tensor hcurr = lm.model->encode(x.unsqueeze(0));
      torch::Tensor hnext = lm.model->lpm_step(1, hprev, hcurr, hp, hc);
      return (lm.model->decode(hnext).select(1, k) * wlat).mean();
    };
    const lc::IgResult r = lc::integrated_gradients(f, x_curr, baseline, m);
    const torch::Tensor ch = lc::channel_attribution(r.attributions);  // [C] float64
    table[k] = ch;
    csv << target;
    const auto acc = ch.accessor<double, 1>();
    for (std::int64_t j = 0; j < ch.numel(); ++j) csv << "," << fmt(acc[j]);
    csv << "\n";

    const torch::Tensor order = ch.argsort(0, /*descending=*/true);
    const auto i0 = order[0].item<std::int64_t>();
    const auto i1 = order[1].item<std::int64_t>();
    std::cout << "target " << target << ": delta " << fmt(r.delta) << " completeness_gap "
              << fmt(r.completeness_gap);
    if (std::abs(r.delta) > 0)
      std::cout << " (" << fmt(100.0 * r.completeness_gap / std::abs(r.delta))
                << "% of |delta|)";
    std::cout << "  top-2: " << cat.names[static_cast<std::size_t>(i0)] << ", "
              << cat.names[static_cast<std::size_t>(i1)] << "\n";

    std::vector<std::string> labels(cat.names.begin(), cat.names.end());
    std::vector<double> values(acc.data(), acc.data() + ch.numel());
    lc::write_bar_chart_svg((plots / ("attribution_" + target + ".svg")).string(),
                            "mean |IG| by input channel - " + target, labels, values);
  }

  json meta = {{"init_time", lc::format_iso_hours(field.time_at(init_t))},
               {"init_index", init_t},
               {"m", m},
               {"baseline", baseline_mode},
               {"checkpoint", ckpt_path}};
  std::ofstream(run / "metadata.json") << meta.dump(2) << "\n";
  std::cout << "attribution: " << (run / "attribution.csv").string() << "\n";
  std::cout << "run_dir: " << run.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent-space key-variable forecaster"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config, "JSON config file (sections: model, train, synthetic, evaluate)");
  app.add_option("--out", g.out, "parent directory for run directories")->capture_default_str();
  app.add_option("--seed", g.seed, "override synthetic and training seeds");
  app.add_option("--profile", g.profile, "configuration profile: desk or paper")
      ->capture_default_str();
  app.add_option("--stamp", g.stamp, "run-directory prefix (default: current UTC time)");
  app.add_flag("--force", g.force, "reuse an existing run directory / resume across a changed plan");

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->fallthrough();

  std::string data_dir, resume_path;
  bool dry_run = false;
  auto* train = app.add_subcommand("train", "train a model on a dataset");
  train->fallthrough();
  train->add_option("--data", data_dir, "dataset directory (from synth or ingestion)");
  train->add_option("--resume", resume_path, "checkpoint to resume from");
  train->add_flag("--dry-run", dry_run, "print the composed schedule and exit");

  std::string fc_ckpt, fc_data, fc_init;
  int fc_steps = 1;
  auto* forecast = app.add_subcommand("forecast", "roll out a forecast from a checkpoint");
  forecast->fallthrough();
  forecast->add_option("--checkpoint", fc_ckpt, "trained checkpoint")->required();
  forecast->add_option("--data", fc_data, "dataset directory supplying the history")->required();
  forecast->add_option("--init", fc_init, "init step index or ISO-8601 time (default: last)");
  forecast->add_option("--steps", fc_steps, "lead steps to emit")->capture_default_str();

  std::string ev_ckpt, ev_data;
  int ev_horizon = 0;
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint against a dataset");
  evaluate->fallthrough();
  evaluate->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
  evaluate->add_option("--data", ev_data, "dataset directory with truth")->required();
  evaluate->add_option("--horizon", ev_horizon, "lead steps to score (overrides config)");

  int plan_n = 0;
  bool plan_json = false;
  auto* plan = app.add_subcommand("plan", "print the minimal-iteration schedule");
  plan->fallthrough();
  plan->add_option("n", plan_n, "number of forecast targets")->required();
  plan->add_flag("--json", plan_json, "emit JSON instead of a table");

  std::string at_ckpt, at_data, at_init, at_baseline = "zero";
  int at_m = 64;
  auto* attribute = app.add_subcommand("attribute", "integrated-gradients input attribution");
  attribute->fallthrough();
  attribute->add_option("--checkpoint", at_ckpt, "trained checkpoint")->required();
  attribute->add_option("--data", at_data, "dataset directory supplying the state")->required();
  attribute->add_option("--init", at_init, "init step index or ISO-8601 time (default: last)");
  attribute->add_option("--m", at_m, "integration resolution")->capture_default_str();
  attribute->add_option("--baseline", at_baseline,
                        "baseline: zero (climatology), prev (previous state), self")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    torch::set_num_threads(std::max(1u, std::thread::hardware_concurrency()));
    if (synth->parsed()) return cmd_synth(g);
    if (train->parsed()) return cmd_train(g, data_dir, resume_path, dry_run);
    if (forecast->parsed()) return cmd_forecast(g, fc_ckpt, fc_data, fc_init, fc_steps);
    if (evaluate->parsed()) return cmd_evaluate(g, ev_ckpt, ev_data, ev_horizon);
    if (plan->parsed()) return cmd_plan(plan_n, plan_json);
    if (attribute->parsed()) return cmd_attribute(g, at_ckpt, at_data, at_init, at_m, at_baseline);
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const lc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
