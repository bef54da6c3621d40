#pragma once

// Driven two-level open-system dynamics.
//
// Generator: H = (omega/2) sigma_x, relaxation D[sigma_-] at rate 1/T1 and
// pure dephasing (Gamma_phi/2) D[sigma_z] with Gamma_phi = 1/T2 - 1/(2 T1).
// Infinite T1/T2 map to zero rates. Integration is fixed-step RK4 on a grid
// anchored at each segment start, so no step ever straddles a drive switch.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paraqnn/errors.hpp"

namespace paraqnn {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Regime { rabi, lindblad, mixed };

inline constexpr std::array<Regime, 3> kAllRegimes = {Regime::rabi, Regime::lindblad,
                                                      Regime::mixed};

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::rabi: return "rabi";
    case Regime::lindblad: return "lindblad";
    case Regime::mixed: return "mixed";
  }
  return "?";
}

inline std::optional<Regime> parse_regime(std::string_view s) {
  if (s == "rabi") return Regime::rabi;
  if (s == "lindblad") return Regime::lindblad;
  if (s == "mixed") return Regime::mixed;
  return std::nullopt;
}

/// Physical parameters of one drive segment. Times in microseconds, omega
/// in rad/us.
class QubitPhysics {
 public:
  QubitPhysics() = default;

  QubitPhysics(double omega_angular, double t1, double t2)
      : omega_(omega_angular), t1_(t1), t2_(t2) {
    if (!(omega_ >= 0.0) || !std::isfinite(omega_))
      throw InputError("QubitPhysics: omega must be finite and >= 0");
    if (!(t1_ > 0.0) || !(t2_ > 0.0))
      throw InputError("QubitPhysics: T1 and T2 must be > 0 (or infinite)");
    if (t2_ > 2.0 * t1_)
      throw InputError("QubitPhysics: T2 must not exceed 2*T1 (negative pure dephasing)");
  }

  double omega() const { return omega_; }
  double t1() const { return t1_; }
  double t2() const { return t2_; }

  double gamma1() const { return std::isinf(t1_) ? 0.0 : 1.0 / t1_; }
  double gamma2() const { return std::isinf(t2_) ? 0.0 : 1.0 / t2_; }
  double gamma_phi() const { return gamma2() - 0.5 * gamma1(); }

  friend bool operator==(const QubitPhysics&, const QubitPhysics&) = default;

 private:
  double omega_ = 0.0;
  double t1_ = kInfinity;
  double t2_ = kInfinity;
};

struct DriveSegment {
  double start = 0.0;
  double end = 0.0;
  QubitPhysics physics;

  friend bool operator==(const DriveSegment&, const DriveSegment&) = default;
};

class DriveSchedule {
 public:
  DriveSchedule() = default;

  explicit DriveSchedule(std::vector<DriveSegment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw InputError("DriveSchedule: no segments");
    if (segments_.front().start != 0.0) throw InputError("DriveSchedule: must start at t=0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!(s.end > s.start) || !std::isfinite(s.end))
        throw InputError("DriveSchedule: segment boundaries must be strictly increasing");
      if (i > 0 && s.start != segments_[i - 1].end)
        throw InputError("DriveSchedule: segments must be contiguous");
    }
  }

  static DriveSchedule single(double span, QubitPhysics physics) {
    return DriveSchedule({DriveSegment{0.0, span, physics}});
  }

  const std::vector<DriveSegment>& segments() const { return segments_; }
  double total_span() const { return segments_.empty() ? 0.0 : segments_.back().end; }

  friend bool operator==(const DriveSchedule&, const DriveSchedule&) = default;

 private:
  std::vector<DriveSegment> segments_;
};

/// Real parametrization of a 2x2 density matrix; rho01 = re01 + i*im01.
struct DensityMatrix2 {
  double p0 = 1.0;
  double p1 = 0.0;
  double re01 = 0.0;
  double im01 = 0.0;

  static DensityMatrix2 ground() { return {1.0, 0.0, 0.0, 0.0}; }
  static DensityMatrix2 excited() { return {0.0, 1.0, 0.0, 0.0}; }

  double trace() const { return p0 + p1; }
  double purity() const { return p0 * p0 + p1 * p1 + 2.0 * (re01 * re01 + im01 * im01); }

  friend bool operator==(const DensityMatrix2&, const DensityMatrix2&) = default;
};

inline DensityMatrix2 lindblad_rhs(const DensityMatrix2& rho, const QubitPhysics& phys) {
  const double g1 = phys.gamma1();
  const double coherence_decay = 0.5 * g1 + phys.gamma_phi();
  const double w = phys.omega();
  // Population flow 0 -> 1 from the drive, 1 -> 0 from relaxation. Using the
  // same expression for both keeps d(p0 + p1)/dt exactly zero.
  const double flow = w * rho.im01 - g1 * rho.p1;
  DensityMatrix2 d;
  d.p1 = flow;
  d.p0 = -flow;
  d.re01 = -coherence_decay * rho.re01;
  d.im01 = 0.5 * w * (rho.p0 - rho.p1) - coherence_decay * rho.im01;
  return d;
}

namespace detail {

inline DensityMatrix2 axpy(const DensityMatrix2& x, double a, const DensityMatrix2& d) {
  return {x.p0 + a * d.p0, x.p1 + a * d.p1, x.re01 + a * d.re01, x.im01 + a * d.im01};
}

inline DensityMatrix2 rk4_step(const DensityMatrix2& rho, const QubitPhysics& phys, double h) {
  const auto k1 = lindblad_rhs(rho, phys);
  const auto k2 = lindblad_rhs(axpy(rho, 0.5 * h, k1), phys);
  const auto k3 = lindblad_rhs(axpy(rho, 0.5 * h, k2), phys);
  const auto k4 = lindblad_rhs(axpy(rho, h, k3), phys);
  const double h6 = h / 6.0;
  const double h3 = h / 3.0;
  return {rho.p0 + h6 * k1.p0 + h3 * k2.p0 + h3 * k3.p0 + h6 * k4.p0,
          rho.p1 + h6 * k1.p1 + h3 * k2.p1 + h3 * k3.p1 + h6 * k4.p1,
          rho.re01 + h6 * k1.re01 + h3 * k2.re01 + h3 * k3.re01 + h6 * k4.re01,
          rho.im01 + h6 * k1.im01 + h3 * k2.im01 + h3 * k3.im01 + h6 * k4.im01};
}

// Grid points closer than this (relative to dt) are treated as coincident.
inline constexpr double kGridSnap = 1e-9;

inline long grid_index_below(double offset, double dt) {
  return static_cast<long>(std::floor(offset / dt + kGridSnap));
}

}  // namespace detail

inline constexpr double kDefaultDt = 1e-3;

/// Evolve from t0 to t1 under fixed physics: full RK4 steps on the grid
/// t0 + i*dt, then one partial step onto t1.
inline DensityMatrix2 evolve(const QubitPhysics& phys, DensityMatrix2 rho, double t0, double t1,
                             double dt = kDefaultDt) {
  if (!(dt > 0.0)) throw InputError("evolve: dt must be > 0");
  if (t1 < t0) throw InputError("evolve: t1 < t0");
  const long n = detail::grid_index_below(t1 - t0, dt);
  for (long i = 0; i < n; ++i) rho = detail::rk4_step(rho, phys, dt);
  const double rem = t1 - (t0 + static_cast<double>(n) * dt);
  if (rem > detail::kGridSnap * dt) rho = detail::rk4_step(rho, phys, rem);
  return rho;
}

/// Excited-state population at each requested time. Each value comes from
/// integrating to that exact time; the main grid is never shifted by the
/// requested sample points.
inline std::vector<double> integrate(const DriveSchedule& schedule, const DensityMatrix2& rho0,
                                     std::span<const double> times, double dt = kDefaultDt) {
  if (!(dt > 0.0)) throw InputError("integrate: dt must be > 0");
  const auto& segs = schedule.segments();
  if (segs.empty()) throw InputError("integrate: empty schedule");
  const double span = schedule.total_span();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0 && times[i] <= span))
      throw InputError("integrate: requested time outside [0, total_span]");
    if (i > 0 && times[i] < times[i - 1]) throw InputError("integrate: times must be sorted");
  }

  std::vector<double> out;
  out.reserve(times.size());

  std::size_t seg = 0;
  long step = 0;  // grid index within the current segment
  DensityMatrix2 rho = rho0;

  auto finish_segment = [&] {
    const auto& s = segs[seg];
    const long n = detail::grid_index_below(s.end - s.start, dt);
    for (; step < n; ++step) rho = detail::rk4_step(rho, s.physics, dt);
    const double rem = s.end - (s.start + static_cast<double>(n) * dt);
    if (rem > detail::kGridSnap * dt) rho = detail::rk4_step(rho, s.physics, rem);
    ++seg;
    step = 0;
  };

  for (double t : times) {
    while (seg + 1 < segs.size() && t >= segs[seg].end) finish_segment();
    const auto& s = segs[seg];
    const long n_full = detail::grid_index_below(s.end - s.start, dt);
    const long target = std::min(detail::grid_index_below(t - s.start, dt), n_full);
    for (; step < target; ++step) rho = detail::rk4_step(rho, s.physics, dt);
    const double rem = t - (s.start + static_cast<double>(step) * dt);
    if (rem > detail::kGridSnap * dt) {
      out.push_back(detail::rk4_step(rho, s.physics, rem).p1);
    } else {
      out.push_back(rho.p1);
    }
  }
  return out;
}

/// Drive amplitudes of the mixed regime's strong-drive and weak-probe
/// phases. Configuration defaults, not measured values.
struct MixedDrive {
  double omega_strong = 2.5;
  double omega_weak = 0.6;

  friend bool operator==(const MixedDrive&, const MixedDrive&) = default;
};

inline DriveSchedule make_regime_schedule(Regime regime, const MixedDrive& mixed = {}) {
  switch (regime) {
    case Regime::rabi:
      return DriveSchedule::single(8.0, QubitPhysics(2.0 * std::numbers::pi * 1.25, 12.0, 15.0));
    case Regime::lindblad:
      return DriveSchedule::single(5.0, QubitPhysics(2.0, 10.0, 8.0));
    case Regime::mixed:
      return DriveSchedule({
          DriveSegment{0.0, 4.0, QubitPhysics(mixed.omega_strong, 6.0, 4.0)},
          DriveSegment{4.0, 7.0, QubitPhysics(0.0, 6.0, 4.0)},
          DriveSegment{7.0, 10.0, QubitPhysics(mixed.omega_weak, 6.0, 4.0)},
      });
  }
  throw InputError("make_regime_schedule: unknown regime");
}

}  // namespace paraqnn
