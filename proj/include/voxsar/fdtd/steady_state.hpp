#pragma once

#include <cmath>
#include <vector>

#include "voxsar/fdtd/phasor.hpp"
#include "voxsar/fdtd/solver.hpp"

namespace voxsar::fdtd {

struct SteadyStateParams {
  double tolerance = 1e-3;  // relative per-period change of total |E_rms|^2
  int max_periods = 200;    // cap on periods before the DFT window
  int window_periods = 4;   // integer periods in the DFT window
  double ramp_periods = 3;  // raised-cosine source ramp

  void validate() const {
    require(std::isfinite(tolerance) && tolerance > 0.0, "steady-state tolerance must be > 0");
    require(max_periods >= 1, "max_periods must be >= 1");
    require(window_periods >= 4, "DFT window must span at least 4 periods");
    require(std::isfinite(ramp_periods) && ramp_periods >= 0.0, "ramp_periods must be >= 0");
  }
};

/// Time step and DFT decimation for a CW run: the period is an exact
/// multiple of `decimation` steps and holds at least `min_samples` samples.
struct TimeBase {
  double dt = 0;
  int steps_per_period = 0;
  int decimation = 1;

  int samples_per_period() const { return steps_per_period / decimation; }
};

inline TimeBase make_time_base(double frequency, double spacing, double courant, int min_samples = 16) {
  require(std::isfinite(frequency) && frequency > 0.0, "frequency must be > 0");
  require(std::isfinite(courant) && courant > 0.0, "courant factor must be > 0");
  const double period = 1.0 / frequency;
  const double dt_max = courant * courant_limit(spacing);
  const int m0 = static_cast<int>(std::ceil(period / dt_max - 1e-9));
  TimeBase tb;
  tb.decimation = std::max(1, m0 / min_samples);
  tb.steps_per_period = (m0 + tb.decimation - 1) / tb.decimation * tb.decimation;
  tb.dt = period / tb.steps_per_period;
  return tb;
}

/// Raised-cosine ramp into a unit CW carrier; returns (sin, cos) terms.
inline std::function<std::array<double, 2>(double)> cw_waveform(double frequency, double ramp_periods) {
  const double omega = 2.0 * constants::pi * frequency;
  const double ramp = ramp_periods / frequency;
  return [omega, ramp](double t) {
    const double r = t >= ramp ? 1.0 : 0.5 * (1.0 - std::cos(constants::pi * t / ramp));
    return std::array<double, 2>{r * std::sin(omega * t), r * std::cos(omega * t)};
  };
}

/// A block of nodes whose fields are Fourier-accumulated.
struct RegionRequest {
  NodeBox nodes;
  bool with_h = false;
};

struct SteadyStateResult {
  std::vector<PhasorField> regions;
  bool converged = false;
  int periods = 0;
  std::vector<double> period_energy; // mean total |E|^2 over each period
  std::vector<std::pair<std::size_t, double>> max_e_history;
};

namespace detail {

class Accumulator {
public:
  Accumulator(const YeeSolver &s, const RegionRequest &req) : solver_(s) {
    const auto &g = s.setup();
    for (int a = 0; a < 3; ++a)
      require(req.nodes.lo[a] >= 0 && req.nodes.hi[a] < g.nodes[a] && req.nodes.lo[a] <= req.nodes.hi[a],
              "recorded region exceeds the grid");
    f_.origin = req.nodes.lo;
    f_.dims = {req.nodes.hi.i - req.nodes.lo.i + 1, req.nodes.hi.j - req.nodes.lo.j + 1,
               req.nodes.hi.k - req.nodes.lo.k + 1};
    f_.spacing = g.spacing;
    f_.dt = g.dt;
    for (int c = 0; c < 3; ++c) {
      f_.e[c].assign(f_.dims.size(), 0.0);
      if (req.with_h)
        f_.h[c].assign(f_.dims.size(), 0.0);
    }
  }

  /// Adds one sample: E at time t_e, H at t_e - dt/2.
  void add(double omega, double t_e) {
    const cplx we = std::polar(1.0, -omega * t_e);
    const cplx wh = std::polar(1.0, -omega * (t_e - 0.5 * f_.dt));
    add_fields(f_.e, [&](int c) -> const std::vector<double> & { return solver_.e(c); }, we);
    if (f_.has_h())
      add_fields(f_.h, [&](int c) -> const std::vector<double> & { return solver_.h(c); }, wh);
  }

  PhasorField finish(double norm) {
    for (int c = 0; c < 3; ++c) {
      for (auto &v : f_.e[c])
        v *= norm;
      for (auto &v : f_.h[c])
        v *= norm;
    }
    return std::move(f_);
  }

private:
  template <class Get> void add_fields(std::array<std::vector<cplx>, 3> &dst, Get get, cplx w) {
    const auto &g = solver_.setup();
    for (int c = 0; c < 3; ++c) {
      const auto &src = get(c);
      cplx *out = dst[c].data();
#pragma omp parallel for schedule(static)
      for (int k = 0; k < f_.dims.nz; ++k)
        for (int j = 0; j < f_.dims.ny; ++j) {
          const std::size_t gbase = g.nodes.index(f_.origin.i, f_.origin.j + j, f_.origin.k + k);
          const std::size_t lbase = f_.dims.index(0, j, k);
          for (int i = 0; i < f_.dims.nx; ++i)
            out[lbase + i] += src[gbase + i] * w;
        }
    }
  }

  const YeeSolver &solver_;
  PhasorField f_;
};

inline double total_e2(const YeeSolver &s) {
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    const auto &e = s.e(c);
    const auto n = static_cast<std::ptrdiff_t>(e.size());
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      sum += e[i] * e[i];
  }
  return sum;
}

} // namespace detail

/// Steps a CW-driven solver until the per-period mean of the total |E|^2
/// settles, then Fourier-accumulates the requested regions over an integer
/// number of periods. The solver must start from rest with dt taken from
/// `tb`; hitting the period cap still yields phasors, flagged non-converged.
inline SteadyStateResult run_to_steady_state(YeeSolver &solver, const TimeBase &tb, double frequency,
                                             const std::vector<RegionRequest> &regions,
                                             const SteadyStateParams &params = {}) {
  params.validate();
  require(std::abs(solver.dt() - tb.dt) <= 1e-12 * tb.dt, "solver time step does not match the time base");
  const double omega = 2.0 * constants::pi * frequency;
  const int ramp_steps = static_cast<int>(std::ceil(params.ramp_periods * tb.steps_per_period - 1e-9));
  StabilityMonitor monitor(solver.step_index() + static_cast<std::size_t>(ramp_steps));
  SteadyStateResult res;

  auto run_period = [&](auto &&on_sample) {
    double e2 = 0;
    for (int s = 0; s < tb.samples_per_period(); ++s) {
      solver.advance(static_cast<std::size_t>(tb.decimation));
      const double v = detail::total_e2(solver);
      if (!std::isfinite(v))
        monitor.record(solver.step_index(), solver.max_abs_e());
      e2 += v;
      on_sample();
    }
    monitor.record(solver.step_index(), solver.max_abs_e());
    ++res.periods;
    return e2 / tb.samples_per_period();
  };

  const int ramp_periods = (ramp_steps + tb.steps_per_period - 1) / tb.steps_per_period;
  double previous = -1;
  for (int p = 0; p < params.max_periods; ++p) {
    const double w = run_period([] {});
    res.period_energy.push_back(w);
    if (p + 1 > ramp_periods && previous >= 0.0) {
      if (w == 0.0 && previous == 0.0) {
        res.converged = true;
        break;
      }
      if (std::abs(w - previous) <= params.tolerance * w) {
        res.converged = true;
        break;
      }
    }
    previous = w;
  }

  std::vector<detail::Accumulator> acc;
  acc.reserve(regions.size());
  for (const auto &r : regions)
    acc.emplace_back(solver, r);
  for (int p = 0; p < params.window_periods; ++p)
    res.period_energy.push_back(run_period([&] {
      const double t = solver.time();
      for (auto &a : acc)
        a.add(omega, t);
    }));

  const double norm = 2.0 / (static_cast<double>(params.window_periods) * tb.samples_per_period());
  for (auto &a : acc) {
    auto f = a.finish(norm);
    f.frequency = frequency;
    f.converged = res.converged;
    f.periods = res.periods;
    res.regions.push_back(std::move(f));
  }
  res.max_e_history = monitor.history();
  return res;
}

} // namespace voxsar::fdtd
