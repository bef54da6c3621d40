#pragma once

// Evaluation matrix (regimes x models x seeds), aggregation, and the
// versioned benchmark report.
//
// Output layout under BenchOptions::out_dir:
//   report.json
//   summary.csv
//   datasets/<regime>/seed-<s>/{data.csv,manifest.json}
//   runs/<regime>/<model>/seed-<s>/{checkpoint.json,telemetry.csv,predictions.csv}

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "paraqnn/baselines.hpp"
#include "paraqnn/dataset.hpp"
#include "paraqnn/errors.hpp"
#include "paraqnn/io.hpp"
#include "paraqnn/runner.hpp"
#include "paraqnn/stamp.hpp"
#include "paraqnn/training.hpp"

namespace paraqnn {

inline constexpr const char* kReportSchema = "paraqnn.bench_report";
inline constexpr int kReportSchemaVersion = 1;

/// Published baselines with no implementation here; listed in every summary.
inline const std::vector<std::string> kNotReproduced = {"random-forest", "xgboost", "gan"};

struct CellResult {
  Regime regime = Regime::rabi;
  ModelKind model = ModelKind::paraqnn;
  std::uint64_t seed = 42;
  bool ok = false;
  std::string error;
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  double test_mse_noisy = std::numeric_limits<double>::quiet_NaN();
  double contradiction_rate = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> phase_mse;
  double final_train_loss = std::numeric_limits<double>::quiet_NaN();
  double final_alpha = std::numeric_limits<double>::quiet_NaN();
  std::optional<PhysicsCoefficients> physics;
  std::string run_dir;  // relative to the report directory
  double wall_clock_s = 0.0;
};

struct Aggregate {
  Regime regime = Regime::rabi;
  ModelKind model = ModelKind::paraqnn;
  std::size_t n = 0;  // successful seeds
  std::size_t failed = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  double mean_noisy = std::numeric_limits<double>::quiet_NaN();
};

/// Per regime: does ParaQNN's mean test MSE sit strictly below each
/// baseline's mean? Absent when either side has no successful seed.
struct Ordering {
  Regime regime = Regime::rabi;
  std::map<ModelKind, std::optional<bool>> paraqnn_below;
  std::optional<bool> paraqnn_lowest;
};

struct BenchReport {
  std::vector<Regime> regimes;
  std::vector<ModelKind> models;
  std::vector<std::uint64_t> seeds;
  double scale = 1.0;
  SplitMode split_mode = SplitMode::random;
  std::vector<CellResult> cells;
  std::vector<Aggregate> aggregates;
  std::vector<Ordering> orderings;
  nlohmann::json datasets = nlohmann::json::array();
  nlohmann::json train_configs = nlohmann::json::object();
  Stamp stamp;

  const CellResult* find(Regime r, ModelKind m, std::uint64_t s) const {
    for (const auto& c : cells)
      if (c.regime == r && c.model == m && c.seed == s) return &c;
    return nullptr;
  }
  const Aggregate* aggregate(Regime r, ModelKind m) const {
    for (const auto& a : aggregates)
      if (a.regime == r && a.model == m) return &a;
    return nullptr;
  }
  const Ordering* ordering(Regime r) const {
    for (const auto& o : orderings)
      if (o.regime == r) return &o;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Aggregation

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1); 0 for a single value.
inline double sample_std(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (v.size() == 1) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline std::vector<Aggregate> aggregate_cells(const std::vector<CellResult>& cells,
                                              const std::vector<Regime>& regimes,
                                              const std::vector<ModelKind>& models) {
  std::vector<Aggregate> out;
  for (auto r : regimes) {
    for (auto m : models) {
      Aggregate a;
      a.regime = r;
      a.model = m;
      std::vector<double> v, vn;
      for (const auto& c : cells) {
        if (c.regime != r || c.model != m) continue;
        if (c.ok) {
          v.push_back(c.test_mse);
          vn.push_back(c.test_mse_noisy);
        } else {
          ++a.failed;
        }
      }
      a.n = v.size();
      a.mean = mean_of(v);
      a.std = sample_std(v);
      a.mean_noisy = mean_of(vn);
      out.push_back(a);
    }
  }
  return out;
}

inline std::vector<Ordering> order_models(const std::vector<Aggregate>& aggs,
                                          const std::vector<Regime>& regimes) {
  std::vector<Ordering> out;
  for (auto r : regimes) {
    Ordering o;
    o.regime = r;
    const Aggregate* para = nullptr;
    for (const auto& a : aggs)
      if (a.regime == r && a.model == ModelKind::paraqnn && a.n > 0) para = &a;
    bool complete = para != nullptr;
    bool all = true;
    for (const auto& a : aggs) {
      if (a.regime != r || a.model == ModelKind::paraqnn) continue;
      if (!para || a.n == 0) {
        o.paraqnn_below[a.model] = std::nullopt;
        complete = false;
        continue;
      }
      const bool below = para->mean < a.mean;
      o.paraqnn_below[a.model] = below;
      all = all && below;
    }
    if (complete && !o.paraqnn_below.empty()) o.paraqnn_lowest = all;
    out.push_back(o);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json num_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline double num_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline nlohmann::json to_json(const PhysicsCoefficients& c) {
  return {{"gamma", c.gamma}, {"zeta", c.zeta}, {"omega", c.omega}, {"p_eq", c.p_eq}};
}

}  // namespace detail

inline nlohmann::json to_json(const CellResult& c) {
  nlohmann::json phases = nlohmann::json::array();
  for (double p : c.phase_mse) phases.push_back(detail::num_or_null(p));
  nlohmann::json j = {{"regime", to_string(c.regime)},
                      {"model", to_string(c.model)},
                      {"seed", c.seed},
                      {"status", c.ok ? "ok" : "failed"},
                      {"test_mse", detail::num_or_null(c.test_mse)},
                      {"test_mse_noisy", detail::num_or_null(c.test_mse_noisy)},
                      {"contradiction_rate", detail::num_or_null(c.contradiction_rate)},
                      {"phase_mse", phases},
                      {"final_train_loss", detail::num_or_null(c.final_train_loss)},
                      {"final_alpha", detail::num_or_null(c.final_alpha)},
                      {"run_dir", c.run_dir},
                      {"wall_clock_s", c.wall_clock_s}};
  if (!c.ok) j["error"] = c.error;
  if (c.physics) j["physics"] = detail::to_json(*c.physics);
  return j;
}

inline CellResult cell_from_json(const nlohmann::json& j) {
  CellResult c;
  const auto regime = parse_regime(j.at("regime").get<std::string>());
  const auto model = parse_model_kind(j.at("model").get<std::string>());
  if (!regime || !model) throw DataError("report cell names an unknown regime or model");
  c.regime = *regime;
  c.model = *model;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.ok = j.at("status").get<std::string>() == "ok";
  if (j.contains("error")) c.error = j["error"].get<std::string>();
  c.test_mse = detail::num_from(j.at("test_mse"));
  c.test_mse_noisy = detail::num_from(j.at("test_mse_noisy"));
  c.contradiction_rate = detail::num_from(j.at("contradiction_rate"));
  for (const auto& p : j.at("phase_mse")) c.phase_mse.push_back(detail::num_from(p));
  c.final_train_loss = detail::num_from(j.at("final_train_loss"));
  c.final_alpha = detail::num_from(j.at("final_alpha"));
  if (j.contains("physics")) {
    const auto& p = j["physics"];
    c.physics = PhysicsCoefficients{p.at("gamma").get<double>(), p.at("zeta").get<double>(),
                                    p.at("omega").get<double>(), p.at("p_eq").get<double>()};
  }
  c.run_dir = j.at("run_dir").get<std::string>();
  c.wall_clock_s = j.at("wall_clock_s").get<double>();
  return c;
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["schema_version"] = kReportSchemaVersion;
  for (auto g : r.regimes) j["regimes"].push_back(to_string(g));
  for (auto m : r.models) j["models"].push_back(to_string(m));
  j["seeds"] = r.seeds;
  j["scale"] = r.scale;
  j["split_mode"] = to_string(r.split_mode);
  j["scalar"] = "float32";
  j["mse_target"] = "y_clean";
  j["not_reproduced"] = kNotReproduced;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : r.cells) j["cells"].push_back(to_json(c));
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : r.aggregates)
    j["aggregates"].push_back({{"regime", to_string(a.regime)},
                               {"model", to_string(a.model)},
                               {"n", a.n},
                               {"failed", a.failed},
                               {"mean", detail::num_or_null(a.mean)},
                               {"std", detail::num_or_null(a.std)},
                               {"mean_noisy", detail::num_or_null(a.mean_noisy)}});
  j["orderings"] = nlohmann::json::array();
  for (const auto& o : r.orderings) {
    nlohmann::json below = nlohmann::json::object();
    for (const auto& [m, v] : o.paraqnn_below)
      below[to_string(m)] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    j["orderings"].push_back(
        {{"regime", to_string(o.regime)},
         {"paraqnn_below", below},
         {"paraqnn_lowest",
          o.paraqnn_lowest ? nlohmann::json(*o.paraqnn_lowest) : nlohmann::json(nullptr)}});
  }
  j["datasets"] = r.datasets;
  j["train_configs"] = r.train_configs;
  j["stamp"] = to_json(r.stamp);
  return j;
}

/// Aggregates and orderings are recomputed from the cells rather than
/// trusted from the file.
inline BenchReport report_from_json(const nlohmann::json& j) {
  BenchReport r;
  try {
    if (j.at("schema").get<std::string>() != kReportSchema)
      throw DataError("not a benchmark report");
    const int version = j.at("schema_version").get<int>();
    if (version != kReportSchemaVersion)
      throw DataError("unsupported report schema_version " + std::to_string(version) +
                      " (expected " + std::to_string(kReportSchemaVersion) + ")");
    r.stamp = stamp_from_json(j);
    for (const auto& g : j.at("regimes")) {
      const auto p = parse_regime(g.get<std::string>());
      if (!p) throw DataError("report lists an unknown regime");
      r.regimes.push_back(*p);
    }
    for (const auto& m : j.at("models")) {
      const auto p = parse_model_kind(m.get<std::string>());
      if (!p) throw DataError("report lists an unknown model");
      r.models.push_back(*p);
    }
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.scale = j.at("scale").get<double>();
    r.split_mode = j.at("split_mode").get<std::string>() == "temporal" ? SplitMode::temporal
                                                                       : SplitMode::random;
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
    r.datasets = j.at("datasets");
    r.train_configs = j.at("train_configs");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  r.aggregates = aggregate_cells(r.cells, r.regimes, r.models);
  r.orderings = order_models(r.aggregates, r.regimes);
  return r;
}

inline void save_report(const BenchReport& r, const std::filesystem::path& path) {
  io::write_file(path, to_json(r).dump(2) + "\n");
}

inline BenchReport load_report(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return report_from_json(j);
}

/// One row per (regime, model), plus "not reproduced" rows for the published
/// baselines without an implementation.
inline std::string format_summary(const BenchReport& r) {
  std::string out = "regime,model,n,failed,mean_test_mse,std_test_mse,mean_test_mse_noisy,status\n";
  for (const auto& a : r.aggregates) {
    out += to_string(a.regime) + "," + to_string(a.model) + "," + std::to_string(a.n) + "," +
           std::to_string(a.failed) + "," + io::format_double(a.mean) + "," +
           io::format_double(a.std) + "," + io::format_double(a.mean_noisy) + "," +
           (a.n > 0 ? "ok" : "failed") + "\n";
  }
  for (auto g : r.regimes)
    for (const auto& name : kNotReproduced)
      out += to_string(g) + "," + name + ",0,0,nan,nan,nan,not reproduced\n";
  return out;
}

// ---------------------------------------------------------------------------
// Run artifacts

inline std::string format_predictions(const Dataset& ds, const TrainOutcome& o) {
  std::vector<double> split(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) split[i] = static_cast<double>(ds.split[i]);
  if (o.f_hat.empty())
    return io::format_columns({"time_us", "y_clean", "y_noisy", "split", "t_hat"},
                              {ds.times, ds.y_clean, ds.y_noisy, split, o.t_hat});
  return io::format_columns({"time_us", "y_clean", "y_noisy", "split", "t_hat", "f_hat"},
                            {ds.times, ds.y_clean, ds.y_noisy, split, o.t_hat, o.f_hat});
}

/// Writes checkpoint.json, telemetry.csv and predictions.csv into `dir`.
inline void write_run(const std::filesystem::path& dir, const Dataset& ds, const TrainOutcome& o) {
  io::write_file(dir / "checkpoint.json", o.checkpoint.dump(2) + "\n");
  io::write_file(dir / "telemetry.csv", format_telemetry(o.telemetry));
  io::write_file(dir / "predictions.csv", format_predictions(ds, o));
}

// ---------------------------------------------------------------------------
// Matrix

struct BenchOptions {
  double scale = 1.0;
  SplitMode split_mode = SplitMode::random;
  bool clip = false;
  std::size_t workers = 1;
  std::filesystem::path out_dir;
  std::function<void(RegimeConfig&)> dataset_override;
  std::function<void(TrainConfig&)> train_override;
  std::function<void(const CellResult&, std::size_t done, std::size_t total)> on_cell;
};

/// The seed drives both the dataset realization and the model
/// initialization of a cell.
inline RegimeConfig bench_dataset_config(Regime r, std::uint64_t seed, const BenchOptions& opt) {
  auto c = preset_config(r, seed, opt.scale);
  c.split_mode = opt.split_mode;
  c.noise.clip_output = opt.clip;
  if (opt.dataset_override) opt.dataset_override(c);
  c.data_seed = seed;
  return c;
}

inline TrainConfig bench_train_config(Regime r, std::uint64_t seed, const BenchOptions& opt) {
  auto c = preset_train_config(r, seed, opt.scale);
  if (opt.train_override) opt.train_override(c);
  c.model_seed = seed;
  return c;
}

inline BenchReport run_matrix(const std::vector<Regime>& regimes,
                              const std::vector<ModelKind>& models,
                              const std::vector<std::uint64_t>& seeds, const BenchOptions& opt) {
  if (regimes.empty() || models.empty() || seeds.empty())
    throw InputError("run_matrix: regimes, models and seeds must be non-empty");
  if (opt.workers == 0) throw InputError("run_matrix: workers must be >= 1");
  if (opt.out_dir.empty()) throw InputError("run_matrix: output directory required");

  BenchReport report;
  report.regimes = regimes;
  report.models = models;
  report.seeds = seeds;
  report.scale = opt.scale;
  report.split_mode = opt.split_mode;

  // Datasets first, sequentially; every cell of a (regime, seed) pair
  // trains on the same realization.
  std::map<std::pair<Regime, std::uint64_t>, Dataset> datasets;
  nlohmann::json run_configs = nlohmann::json::array();
  for (auto r : regimes) {
    for (auto s : seeds) {
      auto ds = build_dataset(bench_dataset_config(r, s, opt));
      const auto rel = std::filesystem::path("datasets") / to_string(r) / ("seed-" + std::to_string(s));
      save(ds, opt.out_dir / rel);
      report.datasets.push_back({{"regime", to_string(r)},
                                 {"seed", s},
                                 {"path", rel.generic_string()},
                                 {"manifest", manifest_json(ds, format_data_csv(ds))}});
      datasets.emplace(std::make_pair(r, s), std::move(ds));
    }
    report.train_configs[to_string(r)] = to_json(bench_train_config(r, seeds.front(), opt));
  }

  struct Job {
    Regime regime;
    ModelKind model;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto r : regimes)
    for (auto m : models)
      for (auto s : seeds) jobs.push_back({r, m, s});

  std::vector<CellResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      CellResult c;
      c.regime = job.regime;
      c.model = job.model;
      c.seed = job.seed;
      const auto rel = std::filesystem::path("runs") / to_string(job.regime) / to_string(job.model) /
                       ("seed-" + std::to_string(job.seed));
      c.run_dir = rel.generic_string();
      try {
        const auto& ds = datasets.at({job.regime, job.seed});
        const auto cfg = bench_train_config(job.regime, job.seed, opt);
        const auto o = train_model<float>(job.model, ds, cfg);
        write_run(opt.out_dir / rel, ds, o);
        c.ok = true;
        c.test_mse = o.metrics.test_mse;
        c.test_mse_noisy = o.metrics.test_mse_noisy;
        c.contradiction_rate = o.metrics.contradiction_rate;
        c.phase_mse = o.metrics.phase_mse;
        c.final_train_loss = o.telemetry.train_loss.back();
        c.final_alpha = o.telemetry.alpha.back();
        if (job.model == ModelKind::pinn_incomplete || job.model == ModelKind::pinn_known)
          c.physics = o.physics;
        c.wall_clock_s = o.telemetry.wall_clock_s;
      } catch (const std::exception& e) {
        c.ok = false;
        c.error = e.what();
      }
      std::lock_guard lock(mu);
      results[i] = std::move(c);
      ++done;
      if (opt.on_cell) opt.on_cell(results[i], done, jobs.size());
    }
  };

  const std::size_t nthreads = std::min(opt.workers, jobs.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  report.cells = std::move(results);
  report.aggregates = aggregate_cells(report.cells, regimes, models);
  report.orderings = order_models(report.aggregates, regimes);

  nlohmann::json stamped = {{"regimes", nlohmann::json::array()},
                            {"models", nlohmann::json::array()},
                            {"scale", opt.scale},
                            {"split_mode", to_string(opt.split_mode)},
                            {"train_configs", report.train_configs}};
  for (auto r : regimes) stamped["regimes"].push_back(to_string(r));
  for (auto m : models) stamped["models"].push_back(to_string(m));
  for (const auto& d : report.datasets) stamped["dataset_hashes"].push_back(d["manifest"]["stamp"]["config_hash"]);
  report.stamp = version_stamp(stamped, seeds);

  save_report(report, opt.out_dir / "report.json");
  io::write_file(opt.out_dir / "summary.csv", format_summary(report));
  return report;
}

}  // namespace paraqnn
