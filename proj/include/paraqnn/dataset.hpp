#pragma once

// Dataset assembly, persistence, and reload.
//
// On disk a dataset is a directory holding
//   data.csv       time_us,y_clean,y_noisy,split
//   manifest.json  every parameter needed to regenerate data.csv, plus a
//                  checksum of data.csv and a provenance stamp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraqnn/dyngen.hpp"
#include "paraqnn/errors.hpp"
#include "paraqnn/io.hpp"
#include "paraqnn/noise.hpp"
#include "paraqnn/rng.hpp"
#include "paraqnn/stamp.hpp"

namespace paraqnn {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

enum class SplitMode { random, temporal };

inline const char* to_string(SplitMode m) { return m == SplitMode::random ? "random" : "temporal"; }

struct RegimeConfig {
  Regime regime = Regime::rabi;
  std::size_t n_points = 0;
  DriveSchedule schedule;
  NoiseStack noise;
  std::uint64_t data_seed = 42;
  MixedDrive mixed_drive;  // only meaningful for Regime::mixed
  DensityMatrix2 initial_state = DensityMatrix2::ground();
  double dt_internal = kDefaultDt;
  SplitMode split_mode = SplitMode::random;
  double test_fraction = 0.20;
  double val_fraction = 0.10;      // of the non-test portion
  double holdout_fraction = 0.15;  // tail of the time axis, temporal mode only

  double time_span() const { return schedule.total_span(); }

  void validate() const {
    if (n_points < 2) throw InputError("RegimeConfig: n_points must be >= 2");
    if (!(time_span() > 0.0)) throw InputError("RegimeConfig: time span must be > 0");
    noise.validate();
    if (!(dt_internal > 0.0)) throw InputError("RegimeConfig: dt_internal must be > 0");
    auto frac_ok = [](double f) { return f >= 0.0 && f < 1.0; };
    if (!frac_ok(test_fraction) || !frac_ok(val_fraction) || !frac_ok(holdout_fraction))
      throw InputError("RegimeConfig: split fractions must lie in [0, 1)");
  }

  friend bool operator==(const RegimeConfig&, const RegimeConfig&) = default;
};

inline std::size_t preset_points(Regime r) {
  switch (r) {
    case Regime::rabi: return 10000;
    case Regime::lindblad: return 25000;
    case Regime::mixed: return 50000;
  }
  return 0;
}

inline std::size_t scaled_count(std::size_t full, double scale, std::size_t floor_value) {
  if (!(scale > 0.0)) throw InputError("scale must be > 0");
  const auto v = static_cast<std::size_t>(std::llround(static_cast<double>(full) * scale));
  return std::max(v, floor_value);
}

/// Preset physics and noise for a regime. `scale` shrinks the point
/// count for quick runs.
inline RegimeConfig preset_config(Regime regime, std::uint64_t data_seed = 42, double scale = 1.0,
                                  const MixedDrive& mixed = {}) {
  RegimeConfig c;
  c.regime = regime;
  c.n_points = scaled_count(preset_points(regime), scale, 64);
  c.schedule = make_regime_schedule(regime, mixed);
  c.data_seed = data_seed;
  c.mixed_drive = mixed;
  switch (regime) {
    case Regime::rabi:
    case Regime::lindblad:
      c.noise.gaussian_sigma = 0.08;
      c.noise.telegraph_amplitude = 0.1;
      c.noise.telegraph_switch_prob = 0.02;
      break;
    case Regime::mixed:
      c.noise.pink_sigma = 0.06;
      c.noise.spam_epsilon = 0.02;
      break;
  }
  return c;
}

struct Dataset {
  RegimeConfig config;
  Stamp stamp;
  std::vector<double> times;
  std::vector<double> y_clean;
  std::vector<double> y_noisy;
  std::vector<Split> split;

  std::size_t size() const { return times.size(); }

  std::vector<std::size_t> indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
      if (split[i] == s) out.push_back(i);
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

inline nlohmann::json time_or_null(double t) {
  return std::isinf(t) ? nlohmann::json(nullptr) : nlohmann::json(t);
}

inline double time_from_json(const nlohmann::json& j) {
  return j.is_null() ? kInfinity : j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const NoiseStack& n) {
  return {{"gaussian_sigma", n.gaussian_sigma},
          {"telegraph_amplitude", n.telegraph_amplitude},
          {"telegraph_switch_prob", n.telegraph_switch_prob},
          {"telegraph_switch_unit", "per_sample"},
          {"pink_sigma", n.pink_sigma},
          {"spam_epsilon", n.spam_epsilon},
          {"clip_output", n.clip_output},
          {"composition", "spam(clean) + gaussian + telegraph + pink"}};
}

inline NoiseStack noise_from_json(const nlohmann::json& j) {
  NoiseStack n;
  n.gaussian_sigma = j.at("gaussian_sigma").get<double>();
  n.telegraph_amplitude = j.at("telegraph_amplitude").get<double>();
  n.telegraph_switch_prob = j.at("telegraph_switch_prob").get<double>();
  n.pink_sigma = j.at("pink_sigma").get<double>();
  n.spam_epsilon = j.at("spam_epsilon").get<double>();
  n.clip_output = j.at("clip_output").get<bool>();
  n.validate();
  return n;
}

inline nlohmann::json to_json(const DriveSchedule& s) {
  auto segs = nlohmann::json::array();
  for (const auto& seg : s.segments()) {
    segs.push_back({{"start_us", seg.start},
                    {"end_us", seg.end},
                    {"omega_rad_per_us", seg.physics.omega()},
                    {"t1_us", detail::time_or_null(seg.physics.t1())},
                    {"t2_us", detail::time_or_null(seg.physics.t2())}});
  }
  return {{"total_span_us", s.total_span()}, {"segments", segs}};
}

inline DriveSchedule schedule_from_json(const nlohmann::json& j) {
  std::vector<DriveSegment> segs;
  for (const auto& s : j.at("segments")) {
    segs.push_back(DriveSegment{
        s.at("start_us").get<double>(), s.at("end_us").get<double>(),
        QubitPhysics(s.at("omega_rad_per_us").get<double>(), detail::time_from_json(s.at("t1_us")),
                     detail::time_from_json(s.at("t2_us")))});
  }
  DriveSchedule sched(std::move(segs));
  if (sched.total_span() != j.at("total_span_us").get<double>())
    throw InputError("schedule total_span disagrees with segments");
  return sched;
}

inline nlohmann::json to_json(const RegimeConfig& c) {
  return {{"regime", to_string(c.regime)},
          {"n_points", c.n_points},
          {"time_span_us", c.time_span()},
          {"schedule", to_json(c.schedule)},
          {"noise", to_json(c.noise)},
          {"data_seed", c.data_seed},
          {"mixed_drive",
           {{"omega_strong", c.mixed_drive.omega_strong}, {"omega_weak", c.mixed_drive.omega_weak}}},
          {"initial_state",
           {{"p0", c.initial_state.p0},
            {"p1", c.initial_state.p1},
            {"re01", c.initial_state.re01},
            {"im01", c.initial_state.im01}}},
          {"dt_internal_us", c.dt_internal},
          {"integrator", "rk4_fixed_step"},
          {"sampling_grid", "uniform_inclusive"},
          {"split",
           {{"mode", to_string(c.split_mode)},
            {"test_fraction", c.test_fraction},
            {"val_fraction_of_train", c.val_fraction},
            {"holdout_fraction", c.holdout_fraction}}}};
}

inline RegimeConfig config_from_json(const nlohmann::json& j) {
  RegimeConfig c;
  const auto regime = parse_regime(j.at("regime").get<std::string>());
  if (!regime) throw InputError("unknown regime in manifest");
  c.regime = *regime;
  c.n_points = j.at("n_points").get<std::size_t>();
  c.schedule = schedule_from_json(j.at("schedule"));
  if (c.time_span() != j.at("time_span_us").get<double>())
    throw InputError("time_span_us disagrees with schedule");
  c.noise = noise_from_json(j.at("noise"));
  c.data_seed = j.at("data_seed").get<std::uint64_t>();
  c.mixed_drive.omega_strong = j.at("mixed_drive").at("omega_strong").get<double>();
  c.mixed_drive.omega_weak = j.at("mixed_drive").at("omega_weak").get<double>();
  const auto& r = j.at("initial_state");
  c.initial_state = {r.at("p0").get<double>(), r.at("p1").get<double>(), r.at("re01").get<double>(),
                     r.at("im01").get<double>()};
  c.dt_internal = j.at("dt_internal_us").get<double>();
  const auto& sp = j.at("split");
  const auto mode = sp.at("mode").get<std::string>();
  if (mode != "random" && mode != "temporal") throw InputError("unknown split mode " + mode);
  c.split_mode = mode == "random" ? SplitMode::random : SplitMode::temporal;
  c.test_fraction = sp.at("test_fraction").get<double>();
  c.val_fraction = sp.at("val_fraction_of_train").get<double>();
  c.holdout_fraction = sp.at("holdout_fraction").get<double>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Construction

inline std::vector<double> uniform_grid(std::size_t n, double span) {
  std::vector<double> t(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t[i] = span * (static_cast<double>(i) / denom);
  t.back() = span;
  return t;
}

inline std::vector<Split> make_splits(const RegimeConfig& cfg) {
  const std::size_t n = cfg.n_points;
  std::vector<Split> split(n, Split::train);
  SeededRng rng(cfg.data_seed, "split");
  std::vector<std::size_t> pool;
  std::size_t n_test = 0;
  if (cfg.split_mode == SplitMode::random) {
    pool.resize(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    rng.shuffle(pool.data(), pool.size());
    n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n)));
    for (std::size_t i = 0; i < n_test; ++i) split[pool[i]] = Split::test;
    pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_test));
  } else {
    n_test = static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(n)));
    for (std::size_t i = n - n_test; i < n; ++i) split[i] = Split::test;
    pool.resize(n - n_test);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    rng.shuffle(pool.data(), pool.size());
  }
  const auto n_val =
      static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(pool.size())));
  for (std::size_t i = 0; i < n_val; ++i) split[pool[i]] = Split::val;
  return split;
}

inline Dataset build_dataset(const RegimeConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.stamp = version_stamp(to_json(cfg), {cfg.data_seed});
  ds.times = uniform_grid(cfg.n_points, cfg.time_span());
  ds.y_clean = integrate(cfg.schedule, cfg.initial_state, ds.times, cfg.dt_internal);
  ds.y_noisy = corrupt(ds.y_clean, cfg.noise, cfg.data_seed);
  ds.split = make_splits(cfg);
  return ds;
}

/// tau = t / time_span, in [0, 1]. The divisor is recorded in the manifest
/// as normalization.time_scale_us.
inline std::vector<double> normalize_time(const Dataset& ds) {
  const double span = ds.config.time_span();
  if (!(span > 0.0)) throw InputError("normalize_time: time span must be > 0");
  std::vector<double> tau(ds.times.size());
  for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = ds.times[i] / span;
  return tau;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr const char* kDatasetSchema = "paraqnn.dataset";
inline constexpr int kDatasetSchemaVersion = 1;

inline std::string format_data_csv(const Dataset& ds) {
  std::string out = "time_us,y_clean,y_noisy,split\n";
  out.reserve(ds.size() * 64);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += io::format_double(ds.times[i]);
    out += ',';
    out += io::format_double(ds.y_clean[i]);
    out += ',';
    out += io::format_double(ds.y_noisy[i]);
    out += ',';
    out += to_string(ds.split[i]);
    out += '\n';
  }
  return out;
}

inline nlohmann::json manifest_json(const Dataset& ds, const std::string& data_csv) {
  return {{"schema", kDatasetSchema},
          {"schema_version", kDatasetSchemaVersion},
          {"data_file", "data.csv"},
          {"checksum_fnv1a64", io::checksum_hex(data_csv)},
          {"config", to_json(ds.config)},
          {"normalization", {{"feature", "tau = t / time_scale_us"},
                             {"time_scale_us", ds.config.time_span()}}},
          {"stamp", to_json(ds.stamp)}};
}

inline void save(const Dataset& ds, const std::filesystem::path& dir) {
  const auto csv = format_data_csv(ds);
  io::write_file(dir / "data.csv", csv);
  io::write_file(dir / "manifest.json", manifest_json(ds, csv).dump(2) + "\n");
}

inline Dataset load(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  Dataset ds;
  try {
    if (manifest.at("schema").get<std::string>() != kDatasetSchema ||
        manifest.at("schema_version").get<int>() != kDatasetSchemaVersion)
      throw DataError("manifest schema mismatch");
    ds.config = config_from_json(manifest.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest schema mismatch: ") + e.what());
  } catch (const InputError& e) {
    throw DataError(std::string("manifest validation failed: ") + e.what());
  }
  ds.stamp = stamp_from_json(manifest);

  const auto csv = io::read_file(dir / manifest.at("data_file").get<std::string>());
  if (io::checksum_hex(csv) != manifest.at("checksum_fnv1a64").get<std::string>())
    throw DataError("data checksum mismatch");
  const auto table = io::parse_csv(csv);
  if (table.header != std::vector<std::string>{"time_us", "y_clean", "y_noisy", "split"})
    throw DataError("unexpected data header");
  if (table.rows.size() != ds.config.n_points)
    throw DataError("row count " + std::to_string(table.rows.size()) + " != n_points " +
                    std::to_string(ds.config.n_points));
  const std::size_t n = table.rows.size();
  ds.times.resize(n);
  ds.y_clean.resize(n);
  ds.y_noisy.resize(n);
  ds.split.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i];
    ds.times[i] = io::parse_double(r[0]);
    ds.y_clean[i] = io::parse_double(r[1]);
    ds.y_noisy[i] = io::parse_double(r[2]);
    if (r[3] == "train") ds.split[i] = Split::train;
    else if (r[3] == "val") ds.split[i] = Split::val;
    else if (r[3] == "test") ds.split[i] = Split::test;
    else throw DataError("unknown split label '" + std::string(r[3]) + "'");
    if (!(ds.y_clean[i] >= -1e-6 && ds.y_clean[i] <= 1.0 + 1e-6))
      throw DataError("y_clean out of [0,1] at row " + std::to_string(i + 1));
  }
  return ds;
}

}  // namespace paraqnn
