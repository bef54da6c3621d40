#pragma once

// Figure data and charts for a benchmark report. Per regime, four panels:
//   <regime>_data            noisy observations and clean trajectory
//   <regime>_loss            train/val loss per model (log scale)
//   <regime>_alpha           ParaQNN alpha trajectory
//   <regime>_reconstruction  model outputs over the clean trajectory
// each as a .csv table and an .svg chart. Panels use the report's first seed.

#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "paraqnn/bench.hpp"
#include "paraqnn/io.hpp"
#include "paraqnn/svg.hpp"
#include "paraqnn/training.hpp"

namespace paraqnn {

struct RunArtifacts {
  std::optional<Telemetry> telemetry;
  std::optional<io::CsvTable> predictions;
};

using ArtifactKey = std::tuple<Regime, ModelKind, std::uint64_t>;
using ArtifactMap = std::map<ArtifactKey, RunArtifacts>;

/// Reads telemetry.csv and predictions.csv for every cell, relative to the
/// report directory. Missing or unreadable files are left empty.
inline ArtifactMap load_artifacts(const BenchReport& report, const std::filesystem::path& report_dir) {
  ArtifactMap out;
  for (const auto& c : report.cells) {
    RunArtifacts a;
    const auto dir = report_dir / c.run_dir;
    try {
      a.telemetry = parse_telemetry(io::read_file(dir / "telemetry.csv"));
    } catch (const std::exception&) {
    }
    try {
      a.predictions = io::parse_csv(io::read_file(dir / "predictions.csv"));
    } catch (const std::exception&) {
    }
    out[{c.regime, c.model, c.seed}] = std::move(a);
  }
  return out;
}

struct FigureOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> gaps;
};

namespace detail {

inline const char* model_color(ModelKind m) {
  switch (m) {
    case ModelKind::paraqnn: return "#d62728";
    case ModelKind::pinn_incomplete: return "#2ca02c";
    case ModelKind::pinn_known: return "#9467bd";
    case ModelKind::mlp: return "#ff7f0e";
  }
  return "#000000";
}

inline std::vector<double> column(const io::CsvTable& t, const std::string& name) {
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] != name) continue;
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (const auto& r : t.rows) v.push_back(io::parse_double(r[c]));
    return v;
  }
  throw DataError("predictions table lacks column '" + name + "'");
}

inline std::vector<double> padded(const std::vector<double>& v, std::size_t n) {
  auto out = v;
  out.resize(n, std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace detail

inline FigureOutput emit_figures(const BenchReport& report, const ArtifactMap& artifacts,
                                 const std::filesystem::path& out_dir) {
  if (report.cells.empty() || report.seeds.empty())
    throw DataError("emit_figures: report has no cells");
  FigureOutput out;
  const auto seed = report.seeds.front();

  auto write_panel = [&](const std::string& stem, const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& cols, const svg::Chart& chart) {
    io::write_file(out_dir / (stem + ".csv"), io::format_columns(header, cols));
    io::write_file(out_dir / (stem + ".svg"), svg::render(chart));
    out.files.push_back(out_dir / (stem + ".csv"));
    out.files.push_back(out_dir / (stem + ".svg"));
  };

  for (auto regime : report.regimes) {
    const std::string rname = to_string(regime);
    auto find = [&](ModelKind m) -> const RunArtifacts* {
      const auto it = artifacts.find({regime, m, seed});
      return it == artifacts.end() ? nullptr : &it->second;
    };

    // Predictions of the first model that has them supply the data panel.
    const io::CsvTable* base = nullptr;
    for (auto m : report.models) {
      const auto* a = find(m);
      if (a && a->predictions) {
        base = &*a->predictions;
        break;
      }
    }

    if (base) {
      const auto t = detail::column(*base, "time_us");
      const auto yn = detail::column(*base, "y_noisy");
      const auto yc = detail::column(*base, "y_clean");
      auto c = svg::make_chart(rname + ": measurements", "time (us)", "P(excited)");
      c.series = {{"y_noisy", t, yn, "#7f7f7f", true}, {"y_clean", t, yc, "#000000"}};
      write_panel(rname + "_data", {"time_us", "y_noisy", "y_clean"}, {t, yn, yc}, c);

      std::vector<std::string> header{"time_us", "y_clean"};
      std::vector<std::vector<double>> cols{t, yc};
      auto r = svg::make_chart(rname + ": reconstruction", "time (us)", "P(excited)");
      r.series.push_back({"y_clean", t, yc, "#000000"});
      for (auto m : report.models) {
        const auto* a = find(m);
        if (!a || !a->predictions) {
          out.gaps.push_back(rname + ": predictions for " + to_string(m) + " seed " +
                             std::to_string(seed) + " missing");
          continue;
        }
        const auto th = detail::column(*a->predictions, "t_hat");
        header.push_back(std::string(to_string(m)) + "_t_hat");
        cols.push_back(th);
        r.series.push_back({std::string(to_string(m)) + " t_hat", t, th, detail::model_color(m)});
        if (m == ModelKind::paraqnn) {
          header.push_back("paraqnn_f_hat");
          cols.push_back(detail::column(*a->predictions, "f_hat"));
        }
      }
      write_panel(rname + "_reconstruction", header, cols, r);
    } else {
      out.gaps.push_back(rname + ": no predictions for seed " + std::to_string(seed) +
                         "; data and reconstruction panels skipped");
    }

    std::size_t n_epochs = 0;
    for (auto m : report.models)
      if (const auto* a = find(m); a && a->telemetry) n_epochs = std::max(n_epochs, a->telemetry->size());
    if (n_epochs == 0) {
      out.gaps.push_back(rname + ": no telemetry for seed " + std::to_string(seed) +
                         "; loss and alpha panels skipped");
      continue;
    }
    std::vector<double> epochs(n_epochs);
    for (std::size_t i = 0; i < n_epochs; ++i) epochs[i] = static_cast<double>(i);

    std::vector<std::string> header{"epoch"};
    std::vector<std::vector<double>> cols{epochs};
    auto loss = svg::make_chart(rname + ": loss", "epoch", "loss", true);
    for (auto m : report.models) {
      const auto* a = find(m);
      if (!a || !a->telemetry) {
        out.gaps.push_back(rname + ": telemetry for " + std::string(to_string(m)) + " seed " +
                           std::to_string(seed) + " missing");
        continue;
      }
      const std::string name = to_string(m);
      const auto tr = detail::padded(a->telemetry->train_loss, n_epochs);
      const auto va = detail::padded(a->telemetry->val_loss, n_epochs);
      header.push_back(name + "_train");
      header.push_back(name + "_val");
      cols.push_back(tr);
      cols.push_back(va);
      loss.series.push_back({name + " train", epochs, tr, detail::model_color(m)});
    }
    write_panel(rname + "_loss", header, cols, loss);

    const auto* para = find(ModelKind::paraqnn);
    if (para && para->telemetry) {
      const auto al = detail::padded(para->telemetry->alpha, n_epochs);
      auto c = svg::make_chart(rname + ": alpha", "epoch", "alpha");
      c.series = {{"alpha", epochs, al, detail::model_color(ModelKind::paraqnn)}};
      write_panel(rname + "_alpha", {"epoch", "alpha"}, {epochs, al}, c);
    } else {
      out.gaps.push_back(rname + ": no ParaQNN telemetry; alpha panel skipped");
    }
  }

  if (!out.gaps.empty()) {
    std::string text;
    for (const auto& g : out.gaps) text += g + "\n";
    io::write_file(out_dir / "gaps.txt", text);
    out.files.push_back(out_dir / "gaps.txt");
  }
  return out;
}

}  // namespace paraqnn
