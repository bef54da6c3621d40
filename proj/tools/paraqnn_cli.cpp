// paraqnn: generate datasets, train models, run the benchmark matrix, and
// render figures.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training failure.
// Failures print a single line "error[<category>]: <message>" on stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paraqnn/paraqnn.hpp"

namespace fs = std::filesystem;
using namespace paraqnn;

namespace {

constexpr const char* kOutRootEnv = "PARAQNN_OUT_ROOT";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problems found while validating flags; reported together.
struct Problems {
  std::vector<std::string> items;

  void add(std::string s) { items.push_back(std::move(s)); }
  void raise_if_any() const {
    if (items.empty()) return;
    std::string msg;
    for (std::size_t i = 0; i < items.size(); ++i) msg += (i ? "; " : "") + items[i];
    throw UsageError(msg);
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : io::split(s, ',')) {
    std::string p(part);
    const auto b = p.find_first_not_of(' ');
    const auto e = p.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(p.substr(b, e - b + 1));
  }
  return out;
}

std::optional<Regime> regime_arg(const std::string& s, Problems& p) {
  const auto r = parse_regime(s);
  if (!r) p.add("unknown regime '" + s + "' (valid: rabi, lindblad, mixed)");
  return r;
}

std::optional<ModelKind> model_arg(const std::string& s, Problems& p) {
  const auto m = parse_model_kind(s);
  if (!m) p.add("unknown model '" + s + "' (valid: paraqnn, pinn-incomplete, pinn-known, mlp)");
  return m;
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

/// "42..46" (inclusive), "42,44,46", or a single seed.
std::vector<std::uint64_t> parse_seeds(const std::string& s, Problems& p) {
  std::vector<std::uint64_t> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const auto lo = parse_u64(s.substr(0, dots));
    const auto hi = parse_u64(s.substr(dots + 2));
    if (!lo || !hi || *lo > *hi) {
      p.add("invalid seed range '" + s + "' (expected A..B with A <= B)");
      return out;
    }
    for (auto v = *lo; v <= *hi; ++v) out.push_back(v);
    return out;
  }
  for (const auto& part : split_list(s)) {
    const auto v = parse_u64(part);
    if (!v) {
      p.add("invalid seed '" + part + "'");
      continue;
    }
    out.push_back(*v);
  }
  if (out.empty()) p.add("no seeds given");
  return out;
}

fs::path output_dir(const std::string& flag, const fs::path& default_rel, Problems& p) {
  if (!flag.empty()) return flag;
  if (const char* root = std::getenv(kOutRootEnv); root && *root) return fs::path(root) / default_rel;
  p.add(std::string("missing --out (or set ") + kOutRootEnv + ")");
  return {};
}

// ---------------------------------------------------------------------------
// Value overrides

struct DataOverrides {
  std::optional<std::size_t> n_points;
  std::optional<double> omega, t1, t2;
  std::optional<double> mixed_omega_strong, mixed_omega_weak;
  std::optional<double> gaussian_sigma, telegraph_amplitude, telegraph_switch_prob;
  std::optional<double> pink_sigma, spam_epsilon;
  std::optional<double> dt_internal, test_fraction, val_fraction, holdout_fraction;
  bool temporal_holdout = false;
  bool clip = false;

  void add_to(CLI::App* app) {
    app->add_flag("--temporal-holdout", temporal_holdout,
                  "Hold out the last 15% of the time axis as the test split (default: random 20% test)");
    app->add_flag("--clip", clip, "Clip noisy observations to [0, 1] (default: off)");
    app->add_option("--n-points", n_points,
                    "Samples on the time grid (preset: rabi 10000, lindblad 25000, mixed 50000)");
    app->add_option("--omega", omega,
                    "Rabi frequency in rad/us, single-segment regimes (preset: rabi 2*pi*1.25, lindblad 2.0)");
    app->add_option("--t1", t1, "T1 in us (preset: rabi 12, lindblad 10, mixed 6)");
    app->add_option("--t2", t2, "T2 in us (preset: rabi 15, lindblad 8, mixed 4)");
    app->add_option("--mixed-omega-strong", mixed_omega_strong,
                    "Mixed regime drive on [0,4) us in rad/us (preset: 2.5)");
    app->add_option("--mixed-omega-weak", mixed_omega_weak,
                    "Mixed regime drive on [7,10] us in rad/us (preset: 0.6)");
    app->add_option("--gaussian-sigma", gaussian_sigma,
                    "Gaussian noise std (preset: rabi/lindblad 0.08, mixed 0)");
    app->add_option("--telegraph-amplitude", telegraph_amplitude,
                    "Telegraph noise amplitude (preset: rabi/lindblad 0.1, mixed 0)");
    app->add_option("--telegraph-switch", telegraph_switch_prob,
                    "Telegraph flip probability per sample (preset: 0.02)");
    app->add_option("--pink-sigma", pink_sigma, "1/f noise std (preset: mixed 0.06, others 0)");
    app->add_option("--spam-epsilon", spam_epsilon, "SPAM confusion probability (preset: mixed 0.02, others 0)");
    app->add_option("--dt", dt_internal, "Integrator step in us (preset: 1e-3)");
    app->add_option("--test-fraction", test_fraction, "Random-split test fraction (preset: 0.2)");
    app->add_option("--val-fraction", val_fraction, "Validation fraction of the non-test points (preset: 0.1)");
    app->add_option("--holdout-fraction", holdout_fraction,
                    "Temporal holdout fraction of the time axis (preset: 0.15)");
  }

  void check(const std::optional<Regime>& regime, Problems& p) const {
    if (!regime) return;
    if (*regime == Regime::mixed && omega)
      p.add("--omega does not apply to the mixed regime (use --mixed-omega-strong/--mixed-omega-weak)");
    if (*regime != Regime::mixed && (mixed_omega_strong || mixed_omega_weak))
      p.add("--mixed-omega-* flags apply only to the mixed regime");
  }

  bool any_schedule() const { return omega || t1 || t2 || mixed_omega_strong || mixed_omega_weak; }

  void apply(RegimeConfig& c) const {
    c.split_mode = temporal_holdout ? SplitMode::temporal : SplitMode::random;
    c.noise.clip_output = clip;
    if (n_points) c.n_points = *n_points;
    if (mixed_omega_strong) c.mixed_drive.omega_strong = *mixed_omega_strong;
    if (mixed_omega_weak) c.mixed_drive.omega_weak = *mixed_omega_weak;
    if (any_schedule()) {
      const auto base = make_regime_schedule(c.regime, c.mixed_drive);
      std::vector<DriveSegment> segs;
      for (const auto& s : base.segments()) {
        const auto& ph = s.physics;
        segs.push_back({s.start, s.end,
                        QubitPhysics(c.regime == Regime::mixed ? ph.omega() : omega.value_or(ph.omega()),
                                     t1.value_or(ph.t1()), t2.value_or(ph.t2()))});
      }
      c.schedule = DriveSchedule(std::move(segs));
    }
    if (gaussian_sigma) c.noise.gaussian_sigma = *gaussian_sigma;
    if (telegraph_amplitude) c.noise.telegraph_amplitude = *telegraph_amplitude;
    if (telegraph_switch_prob) c.noise.telegraph_switch_prob = *telegraph_switch_prob;
    if (pink_sigma) c.noise.pink_sigma = *pink_sigma;
    if (spam_epsilon) c.noise.spam_epsilon = *spam_epsilon;
    if (dt_internal) c.dt_internal = *dt_internal;
    if (test_fraction) c.test_fraction = *test_fraction;
    if (val_fraction) c.val_fraction = *val_fraction;
    if (holdout_fraction) c.holdout_fraction = *holdout_fraction;
  }
};

struct TrainOverrides {
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> lr, lambda_s, lambda_n, lambda_c, lambda_physics, k, alpha0;
  std::optional<std::string> hidden;
  std::optional<std::size_t> collocation_points, collocation_batch;

  void add_to(CLI::App* app) {
    app->add_option("--epochs", epochs, "Training epochs (preset: rabi 1500, lindblad 2000, mixed 4000)");
    app->add_option("--batch-size", batch_size, "Mini-batch size (preset: rabi/lindblad 256, mixed 512)");
    app->add_option("--lr", lr, "Adam learning rate (preset: 1e-3)");
    app->add_option("--lambda-s", lambda_s, "Signal loss weight (preset: 1.0)");
    app->add_option("--lambda-n", lambda_n, "Noise loss weight (preset: 0.5, mixed 0.8)");
    app->add_option("--lambda-c", lambda_c, "Contradiction loss weight (preset: 0.5)");
    app->add_option("--lambda-physics", lambda_physics, "PINN residual weight (preset: 0.1)");
    app->add_option("--k", k, "PIAF steepness (preset: 1)");
    app->add_option("--alpha0", alpha0, "Initial alpha (preset: 6)");
    app->add_option("--hidden", hidden, "Hidden widths, comma separated (preset: 128,128,128)");
    app->add_option("--collocation-points", collocation_points, "PINN collocation grid size (preset: 1024)");
    app->add_option("--collocation-batch", collocation_batch,
                    "Collocation stencils sampled per step (preset: 64)");
  }

  void check(Problems& p) const {
    if (!hidden) return;
    for (const auto& w : split_list(*hidden))
      if (!parse_u64(w) || *parse_u64(w) == 0) p.add("invalid --hidden width '" + w + "'");
  }

  void apply(TrainConfig& c) const {
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (lr) c.adam.learning_rate = *lr;
    if (lambda_s) c.weights.lambda_s = *lambda_s;
    if (lambda_n) c.weights.lambda_n = *lambda_n;
    if (lambda_c) c.weights.lambda_c = *lambda_c;
    if (lambda_physics) c.lambda_physics = *lambda_physics;
    if (k) c.k = *k;
    if (alpha0) c.alpha0 = *alpha0;
    if (hidden) {
      c.shape.hidden.clear();
      for (const auto& w : split_list(*hidden)) c.shape.hidden.push_back(*parse_u64(w));
    }
    if (collocation_points) c.collocation_points = *collocation_points;
    if (collocation_batch) c.collocation_batch = *collocation_batch;
  }
};

/// Construction-time validation errors count as usage errors.
template <typename Fn>
auto as_usage(Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
}

void print_metrics(const EvalMetrics& m) {
  std::cout << "test_mse " << io::format_double(m.test_mse) << "\n"
            << "test_mse_noisy " << io::format_double(m.test_mse_noisy) << "\n";
  if (std::isfinite(m.contradiction_rate))
    std::cout << "contradiction_rate " << io::format_double(m.contradiction_rate) << "\n";
}

ProgressFn progress_printer(const std::string& label) {
  return [label](const EpochRecord& r) {
    const std::size_t every = std::max<std::size_t>(1, r.epochs / 10);
    if (r.epoch % every != 0 && r.epoch != r.epochs) return;
    std::cerr << label << " epoch " << r.epoch << "/" << r.epochs << " train " << r.train_loss
              << " val " << r.val_loss;
    if (std::isfinite(r.alpha)) std::cerr << " alpha " << r.alpha;
    std::cerr << "\n";
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ParaQNN: paraconsistent reconstruction of noisy qubit dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kCodeVersion));
  app.set_config("--config", "", "Read option values from a TOML/INI file (flags on the command line win)");

  // generate
  auto* gen = app.add_subcommand("generate", "Simulate a regime, add noise, and write data.csv + manifest.json");
  std::string gen_regime, gen_out;
  std::uint64_t gen_seed = 42;
  double gen_scale = 1.0;
  DataOverrides gen_data;
  gen->add_option("--regime", gen_regime, "rabi | lindblad | mixed")->required();
  gen->add_option("--seed", gen_seed, "Dataset seed (default: 42)");
  gen->add_option("--out", gen_out, std::string("Output directory (default: $") + kOutRootEnv +
                                        "/datasets/<regime>/seed-<seed>)");
  gen->add_option("--scale", gen_scale, "Multiply the preset point count (default: 1)");
  gen_data.add_to(gen);

  // train
  auto* train = app.add_subcommand("train", "Train one model on a generated dataset");
  std::string tr_model = "paraqnn", tr_data, tr_out, tr_mode = "benchmark";
  std::uint64_t tr_seed = 42;
  double tr_scale = 1.0;
  TrainOverrides tr_over;
  train->add_option("--model", tr_model, "paraqnn | pinn-incomplete | pinn-known | mlp (default: paraqnn)");
  train->add_option("--data", tr_data, "Dataset directory written by generate")->required();
  train->add_option("--seed", tr_seed, "Model seed (default: 42)");
  train->add_option("--mode", tr_mode,
                    "benchmark (signal loss against y_clean) | experimental (ParaQNN only, y_noisy only)");
  train->add_option("--scale", tr_scale, "Multiply the preset epoch count (default: 1)");
  train->add_option("--out", tr_out, std::string("Output directory (default: $") + kOutRootEnv +
                                         "/runs/<regime>/<model>/seed-<seed>)");
  tr_over.add_to(train);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Run the regimes x models x seeds matrix");
  std::string b_regimes = "rabi,lindblad,mixed", b_models = "paraqnn,pinn-incomplete,pinn-known,mlp",
              b_seeds = "42..46", b_out;
  double b_scale = 1.0;
  std::size_t b_workers = 1;
  DataOverrides b_data;
  TrainOverrides b_train;
  bench->add_option("--regimes", b_regimes, "Comma list (default: rabi,lindblad,mixed)");
  bench->add_option("--models", b_models,
                    "Comma list (default: paraqnn,pinn-incomplete,pinn-known,mlp)");
  bench->add_option("--seeds", b_seeds, "A..B or comma list; drives data and model seeds (default: 42..46)");
  bench->add_option("--scale", b_scale, "Multiply preset point and epoch counts (default: 1)");
  bench->add_option("--workers", b_workers, "Concurrent training jobs (default: 1)");
  bench->add_option("--out", b_out, std::string("Output directory (default: $") + kOutRootEnv + "/bench)");
  b_data.add_to(bench);
  b_train.add_to(bench);

  // plot
  auto* plot = app.add_subcommand("plot", "Write figure tables and SVG charts for a benchmark report");
  std::string p_report, p_out;
  plot->add_option("--report", p_report, "report.json, or the benchmark directory holding it")->required();
  plot->add_option("--out", p_out, "Output directory (default: <report dir>/figures)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error[usage]: " << msg << "\n";
    return 1;
  }

  try {
    if (*gen) {
      Problems p;
      const auto regime = regime_arg(gen_regime, p);
      if (!(gen_scale > 0.0)) p.add("--scale must be > 0");
      gen_data.check(regime, p);
      const auto out = output_dir(gen_out, fs::path("datasets") / gen_regime / ("seed-" + std::to_string(gen_seed)), p);
      p.raise_if_any();
      const auto cfg = as_usage([&] {
        auto c = preset_config(*regime, gen_seed, gen_scale);
        gen_data.apply(c);
        c.validate();
        return c;
      });
      const auto ds = build_dataset(cfg);
      save(ds, out);
      std::cout << "wrote " << ds.size() << " samples to " << out.string() << "\n";
      return 0;
    }

    if (*train) {
      Problems p;
      const auto kind = model_arg(tr_model, p);
      const auto mode = parse_train_mode(tr_mode);
      if (!mode) p.add("unknown mode '" + tr_mode + "' (valid: benchmark, experimental)");
      if (kind && mode && *mode == TrainMode::experimental && *kind != ModelKind::paraqnn)
        p.add("--mode experimental applies only to --model paraqnn");
      if (!(tr_scale > 0.0)) p.add("--scale must be > 0");
      if (!fs::exists(fs::path(tr_data) / "manifest.json"))
        p.add("--data " + tr_data + " has no manifest.json");
      tr_over.check(p);
      p.raise_if_any();
      const auto ds = load(tr_data);
      const auto out = [&] {
        Problems q;
        auto o = output_dir(tr_out,
                            fs::path("runs") / to_string(ds.config.regime) / tr_model /
                                ("seed-" + std::to_string(tr_seed)),
                            q);
        q.raise_if_any();
        return o;
      }();
      const auto cfg = as_usage([&] {
        auto c = preset_train_config(ds.config.regime, tr_seed, tr_scale);
        c.mode = *mode;
        tr_over.apply(c);
        c.validate();
        return c;
      });
      const auto o = train_model<float>(*kind, ds, cfg, progress_printer(tr_model));
      write_run(out, ds, o);
      nlohmann::json summary = {{"model", to_string(*kind)},
                                {"seed", tr_seed},
                                {"test_mse", detail::num_or_null(o.metrics.test_mse)},
                                {"test_mse_noisy", detail::num_or_null(o.metrics.test_mse_noisy)},
                                {"contradiction_rate", detail::num_or_null(o.metrics.contradiction_rate)},
                                {"final_alpha", detail::num_or_null(o.telemetry.alpha.back())},
                                {"wall_clock_s", o.telemetry.wall_clock_s},
                                {"stamp", o.checkpoint["stamp"]}};
      io::write_file(out / "summary.json", summary.dump(2) + "\n");
      print_metrics(o.metrics);
      std::cout << "wrote " << out.string() << "\n";
      return 0;
    }

    if (*bench) {
      Problems p;
      std::vector<Regime> regimes;
      std::vector<ModelKind> models;
      for (const auto& r : split_list(b_regimes))
        if (const auto v = regime_arg(r, p)) regimes.push_back(*v);
      for (const auto& m : split_list(b_models))
        if (const auto v = model_arg(m, p)) models.push_back(*v);
      if (regimes.empty() && p.items.empty()) p.add("--regimes is empty");
      if (models.empty() && p.items.empty()) p.add("--models is empty");
      const auto seeds = parse_seeds(b_seeds, p);
      if (!(b_scale > 0.0)) p.add("--scale must be > 0");
      if (b_workers == 0) p.add("--workers must be >= 1");
      for (auto r : regimes) b_data.check(r, p);
      b_train.check(p);
      const auto out = output_dir(b_out, "bench", p);
      p.raise_if_any();

      BenchOptions opt;
      opt.scale = b_scale;
      opt.split_mode = b_data.temporal_holdout ? SplitMode::temporal : SplitMode::random;
      opt.clip = b_data.clip;
      opt.workers = b_workers;
      opt.out_dir = out;
      opt.dataset_override = [&](RegimeConfig& c) { b_data.apply(c); };
      opt.train_override = [&](TrainConfig& c) { b_train.apply(c); };
      opt.on_cell = [](const CellResult& c, std::size_t done, std::size_t total) {
        std::cerr << "[" << done << "/" << total << "] " << to_string(c.regime) << " "
                  << to_string(c.model) << " seed " << c.seed << ": "
                  << (c.ok ? "test_mse " + io::format_double(c.test_mse) : "FAILED " + c.error) << "\n";
      };
      // Validate every cell's configuration before any training starts.
      as_usage([&] {
        for (auto r : regimes)
          for (auto s : seeds) {
            bench_dataset_config(r, s, opt).validate();
            bench_train_config(r, s, opt).validate();
          }
        return 0;
      });
      const auto report = run_matrix(regimes, models, seeds, opt);
      std::cout << format_summary(report);
      for (const auto& o : report.orderings)
        if (o.paraqnn_lowest)
          std::cout << "ordering " << to_string(o.regime) << " paraqnn_lowest "
                    << (*o.paraqnn_lowest ? "true" : "false") << "\n";
      std::cout << "wrote " << (out / "report.json").string() << "\n";
      for (const auto& c : report.cells)
        if (!c.ok) return 3;
      return 0;
    }

    if (*plot) {
      fs::path report_path = p_report;
      if (fs::is_directory(report_path)) report_path /= "report.json";
      if (!fs::exists(report_path)) throw UsageError("--report " + report_path.string() + " does not exist");
      const auto out = p_out.empty() ? report_path.parent_path() / "figures" : fs::path(p_out);
      const auto report = load_report(report_path);
      const auto figs = emit_figures(report, load_artifacts(report, report_path.parent_path()), out);
      for (const auto& f : figs.files) std::cout << "wrote " << f.string() << "\n";
      for (const auto& g : figs.gaps) std::cerr << "gap: " << g << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "error[training]: " << e.what() << "\n";
    return 3;
  } catch (const ContractError& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
