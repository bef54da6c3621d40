#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "paraqnn/bench.hpp"
#include "paraqnn/figures.hpp"

using namespace paraqnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("paraqnn_test_" + name);
  fs::remove_all(p);
  return p;
}

BenchOptions tiny_options(const fs::path& out) {
  BenchOptions o;
  o.scale = 0.01;  // 100 rabi points, 15 epochs
  o.out_dir = out;
  o.train_override = [](TrainConfig& c) {
    c.shape.hidden = {4};
    c.epochs = 3;
  };
  return o;
}

CellResult cell(Regime r, ModelKind m, std::uint64_t s, double mse) {
  CellResult c;
  c.regime = r;
  c.model = m;
  c.seed = s;
  c.ok = true;
  c.test_mse = mse;
  c.test_mse_noisy = 2 * mse;
  return c;
}

std::string strip_wall_clock(nlohmann::json j) {
  for (auto& c : j["cells"]) c.erase("wall_clock_s");
  return j.dump();
}

}  // namespace

TEST(Aggregation, SampleStatistics) {
  EXPECT_EQ(sample_std({0.3}), 0.0);
  EXPECT_NEAR(mean_of({1.0, 2.0, 3.0, 4.0}), 2.5, 1e-15);
  EXPECT_NEAR(sample_std({1.0, 2.0, 3.0, 4.0}), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_TRUE(std::isnan(mean_of({})));
}

TEST(Aggregation, FailedCellsAreCountedNotAveraged) {
  std::vector<CellResult> cells = {cell(Regime::rabi, ModelKind::mlp, 1, 0.1),
                                   cell(Regime::rabi, ModelKind::mlp, 2, 0.3)};
  auto bad = cell(Regime::rabi, ModelKind::mlp, 3, 100.0);
  bad.ok = false;
  cells.push_back(bad);
  const auto a = aggregate_cells(cells, {Regime::rabi}, {ModelKind::mlp});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].n, 2u);
  EXPECT_EQ(a[0].failed, 1u);
  EXPECT_NEAR(a[0].mean, 0.2, 1e-15);
  EXPECT_NEAR(a[0].mean_noisy, 0.4, 1e-15);
}

TEST(Aggregation, OrderingIsStrict) {
  const std::vector<CellResult> cells = {cell(Regime::rabi, ModelKind::paraqnn, 1, 0.1),
                                         cell(Regime::rabi, ModelKind::mlp, 1, 0.1),
                                         cell(Regime::rabi, ModelKind::pinn_known, 1, 0.2)};
  const std::vector<ModelKind> models = {ModelKind::paraqnn, ModelKind::mlp, ModelKind::pinn_known};
  const auto o = order_models(aggregate_cells(cells, {Regime::rabi}, models), {Regime::rabi});
  EXPECT_EQ(o[0].paraqnn_below.at(ModelKind::mlp), false);
  EXPECT_EQ(o[0].paraqnn_below.at(ModelKind::pinn_known), true);
  EXPECT_EQ(o[0].paraqnn_lowest, false);
}

TEST(Aggregation, OrderingUndefinedWithoutData) {
  auto p = cell(Regime::mixed, ModelKind::paraqnn, 1, 0.1);
  p.ok = false;
  const std::vector<ModelKind> models = {ModelKind::paraqnn, ModelKind::mlp};
  const auto o = order_models(
      aggregate_cells({p, cell(Regime::mixed, ModelKind::mlp, 1, 0.2)}, {Regime::mixed}, models),
      {Regime::mixed});
  EXPECT_FALSE(o[0].paraqnn_below.at(ModelKind::mlp).has_value());
  EXPECT_FALSE(o[0].paraqnn_lowest.has_value());
}

TEST(Report, RejectsMissingStampAndWrongVersion) {
  BenchReport r;
  r.regimes = {Regime::rabi};
  r.models = {ModelKind::mlp};
  r.seeds = {1};
  r.cells = {cell(Regime::rabi, ModelKind::mlp, 1, 0.1)};
  r.stamp = version_stamp({{"x", 1}}, {1});
  auto j = to_json(r);
  EXPECT_NO_THROW(report_from_json(j));
  auto no_stamp = j;
  no_stamp.erase("stamp");
  EXPECT_THROW(report_from_json(no_stamp), DataError);
  auto old = j;
  old["schema_version"] = kReportSchemaVersion + 1;
  EXPECT_THROW(report_from_json(old), DataError);
  auto other = j;
  other["schema"] = "something.else";
  EXPECT_THROW(report_from_json(other), DataError);
}

class TinyMatrix : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(scratch("matrix"));
    report_ = new BenchReport(run_matrix({Regime::rabi}, {ModelKind::paraqnn, ModelKind::mlp}, {1},
                                         tiny_options(*dir_)));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete report_;
    delete dir_;
  }
  static fs::path* dir_;
  static BenchReport* report_;
};

fs::path* TinyMatrix::dir_ = nullptr;
BenchReport* TinyMatrix::report_ = nullptr;

TEST_F(TinyMatrix, SingleSeedHasZeroStd) {
  for (const auto& a : report_->aggregates) {
    EXPECT_EQ(a.n, 1u);
    EXPECT_EQ(a.std, 0.0);
    EXPECT_EQ(a.mean, report_->find(a.regime, a.model, 1)->test_mse);
  }
  EXPECT_TRUE(report_->ordering(Regime::rabi)->paraqnn_lowest.has_value());
}

TEST_F(TinyMatrix, WritesArtifacts) {
  for (const char* f : {"report.json", "summary.csv", "datasets/rabi/seed-1/manifest.json",
                        "runs/rabi/paraqnn/seed-1/checkpoint.json",
                        "runs/rabi/mlp/seed-1/telemetry.csv", "runs/rabi/mlp/seed-1/predictions.csv"})
    EXPECT_TRUE(fs::exists(*dir_ / f)) << f;
  const auto summary = io::read_file(*dir_ / "summary.csv");
  EXPECT_NE(summary.find("rabi,xgboost,0,0,nan,nan,nan,not reproduced"), std::string::npos);
}

TEST_F(TinyMatrix, ReportRoundTripRecomputesAggregates) {
  const auto back = load_report(*dir_ / "report.json");
  EXPECT_EQ(back.stamp, report_->stamp);
  ASSERT_EQ(back.cells.size(), report_->cells.size());
  for (const auto& a : report_->aggregates) {
    const auto* b = back.aggregate(a.regime, a.model);
    ASSERT_NE(b, nullptr);
    EXPECT_NEAR(b->mean, a.mean, 1e-12);
    EXPECT_EQ(b->n, a.n);
  }
  EXPECT_EQ(strip_wall_clock(to_json(back)), strip_wall_clock(to_json(*report_)));
}

TEST_F(TinyMatrix, RerunIsIdenticalApartFromTiming) {
  const auto dir = scratch("matrix_rerun");
  const auto again = run_matrix({Regime::rabi}, {ModelKind::paraqnn, ModelKind::mlp}, {1},
                                tiny_options(dir));
  EXPECT_EQ(strip_wall_clock(to_json(again)), strip_wall_clock(to_json(*report_)));
  EXPECT_EQ(io::read_file(dir / "runs/rabi/paraqnn/seed-1/predictions.csv"),
            io::read_file(*dir_ / "runs/rabi/paraqnn/seed-1/predictions.csv"));
  fs::remove_all(dir);
}

TEST_F(TinyMatrix, PredictionsCsvRoundTrips) {
  const auto t = io::parse_csv(io::read_file(*dir_ / "runs/rabi/paraqnn/seed-1/predictions.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"time_us", "y_clean", "y_noisy", "split", "t_hat", "f_hat"}));
  const auto ds = load(*dir_ / "datasets/rabi/seed-1");
  ASSERT_EQ(t.rows.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(io::parse_double(t.rows[i][0]), ds.times[i]);
    EXPECT_EQ(io::parse_double(t.rows[i][2]), ds.y_noisy[i]);
  }
}

TEST_F(TinyMatrix, FiguresFromCompleteRun) {
  const auto out = scratch("figures");
  const auto fig = emit_figures(*report_, load_artifacts(*report_, *dir_), out);
  EXPECT_TRUE(fig.gaps.empty());
  EXPECT_EQ(fig.files.size(), 8u);
  for (const auto& f : fig.files) EXPECT_TRUE(fs::exists(f)) << f;
  EXPECT_TRUE(fs::exists(out / "rabi_alpha.svg"));
  fs::remove_all(out);
}

TEST_F(TinyMatrix, MissingTelemetryIsReportedAsGap) {
  auto artifacts = load_artifacts(*report_, *dir_);
  artifacts[{Regime::rabi, ModelKind::mlp, 1}].telemetry.reset();
  const auto out = scratch("figures_gap");
  const auto fig = emit_figures(*report_, artifacts, out);
  EXPECT_FALSE(fig.gaps.empty());
  EXPECT_TRUE(fs::exists(out / "gaps.txt"));
  fs::remove_all(out);
}

TEST(Figures, EmptyReportIsAnError) {
  EXPECT_THROW(emit_figures(BenchReport{}, {}, scratch("figures_empty")), DataError);
}

TEST(Matrix, RejectsEmptyAxes) {
  BenchOptions o;
  o.out_dir = scratch("matrix_bad");
  EXPECT_THROW(run_matrix({}, {ModelKind::mlp}, {1}, o), InputError);
  o.workers = 0;
  EXPECT_THROW(run_matrix({Regime::rabi}, {ModelKind::mlp}, {1}, o), InputError);
}

TEST(Matrix, WorkerCountDoesNotChangeResults) {
  const auto a_dir = scratch("matrix_w1"), b_dir = scratch("matrix_w3");
  auto a_opt = tiny_options(a_dir), b_opt = tiny_options(b_dir);
  b_opt.workers = 3;
  const auto a = run_matrix({Regime::lindblad}, {ModelKind::pinn_incomplete, ModelKind::mlp}, {1, 2}, a_opt);
  const auto b = run_matrix({Regime::lindblad}, {ModelKind::pinn_incomplete, ModelKind::mlp}, {1, 2}, b_opt);
  EXPECT_EQ(strip_wall_clock(to_json(a)), strip_wall_clock(to_json(b)));
  fs::remove_all(a_dir);
  fs::remove_all(b_dir);
}
