#pragma once

// Pennes bioheat equation on the phantom voxels, forward Euler in time:
//
//   rho C dT/dt = div(k grad T) + rho_b C_b w_b (T_b - T) + Q_m + rho SAR
//
// The SAR source is held fixed for the whole exposure.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "voxsar/phantom.hpp"

namespace voxsar::bioheat {

enum class Boundary { insulated, convective };

inline Boundary boundary_from_string(std::string_view s) {
  if (s == "insulated")
    return Boundary::insulated;
  if (s == "convective")
    return Boundary::convective;
  throw InvalidArgument("unknown thermal boundary '" + std::string(s) + "' (expected insulated or convective)");
}

inline std::string to_string(Boundary b) { return b == Boundary::insulated ? "insulated" : "convective"; }

struct ThermalParams {
  Boundary boundary = Boundary::insulated;
  double convection_h = 10.0;      // W/(m^2 K), tissue-air faces
  double ambient = 296.15;         // K
  double blood_temperature = 310.0;
  double blood_density = 1050.0;
  double blood_specific_heat = 3617.0;
  double initial_temperature = 310.0;
  double dt = 0;                   // s; 0 picks 0.9x the stability bound, capped at max_dt
  double max_dt = 1.0;

  void validate() const {
    require(std::isfinite(convection_h) && convection_h >= 0.0, "convection coefficient must be >= 0");
    require(std::isfinite(ambient) && ambient > 0.0, "ambient temperature must be > 0 K");
    require(std::isfinite(blood_temperature) && blood_temperature > 0.0, "blood temperature must be > 0 K");
    require(std::isfinite(blood_density) && blood_density > 0.0, "blood density must be > 0");
    require(std::isfinite(blood_specific_heat) && blood_specific_heat > 0.0, "blood specific heat must be > 0");
    require(std::isfinite(initial_temperature) && initial_temperature > 0.0, "initial temperature must be > 0 K");
    require(std::isfinite(dt) && dt >= 0.0, "thermal time step must be >= 0");
    require(std::isfinite(max_dt) && max_dt > 0.0, "max thermal time step must be > 0");
  }
};

struct ThermalState {
  Extent3 dims;
  std::vector<double> temperature; // K per voxel
  double time = 0;
};

class PennesSolver {
public:
  /// `sar` holds point SAR (W/kg) per phantom voxel.
  PennesSolver(const VoxelPhantom &ph, const std::vector<double> &sar, const ThermalParams &params)
      : params_(params) {
    ph.validate();
    params.validate();
    require(sar.size() == ph.dims.size(), "SAR field does not match phantom");
    state_.dims = ph.dims;
    state_.temperature.assign(ph.dims.size(), params.initial_temperature);
    const double dx = ph.resolution;
    const bool convective = params.boundary == Boundary::convective;
    const double blood = params.blood_density * params.blood_specific_heat;
    const auto &d = ph.dims;
    for (int k = 0; k < d.nz; ++k)
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
          const auto n = d.index(i, j, k);
          if (ph.voxels[n] == 0) {
            if (convective)
              state_.temperature[n] = params.ambient;
            continue;
          }
          require(std::isfinite(sar[n]) && sar[n] >= 0.0, "SAR must be finite and >= 0");
          const Material &m = ph.material_at(n);
          Cell c;
          c.index = n;
          c.inv_heat_capacity = 1.0 / (m.density * m.specific_heat);
          c.perfusion = blood * m.perfusion_rate;
          c.source = m.metabolic_heat + m.density * sar[n];
          double diag = c.perfusion;
          int slot = 0;
          const int p[3] = {i, j, k};
          for (int a = 0; a < 3; ++a)
            for (int s = -1; s <= 1; s += 2) {
              int q[3] = {p[0], p[1], p[2]};
              q[a] += s;
              if (!d.contains(q[0], q[1], q[2]))
                continue;
              const auto nb = d.index(q[0], q[1], q[2]);
              if (ph.voxels[nb] == 0) {
                if (convective)
                  c.convection += params.convection_h / dx;
                continue;
              }
              const double k1 = m.thermal_conductivity, k2 = ph.material_at(nb).thermal_conductivity;
              const double g = k1 + k2 > 0.0 ? 2.0 * k1 * k2 / (k1 + k2) / (dx * dx) : 0.0;
              if (g == 0.0)
                continue;
              c.neighbor[slot] = nb;
              c.conductance[slot] = g;
              ++slot;
              diag += g;
            }
          diag += c.convection;
          c.neighbors = slot;
          bound_ = std::min(bound_, 1.0 / (c.inv_heat_capacity * diag));
          cells_.push_back(c);
        }
    next_ = state_.temperature;
  }

  /// Largest time step keeping every update a convex combination.
  double stable_dt() const noexcept { return bound_; }

  const ThermalState &state() const noexcept { return state_; }
  std::size_t tissue_count() const noexcept { return cells_.size(); }

  /// Replaces the tissue temperatures; free-space entries are ignored.
  void set_temperature(const std::vector<double> &t) {
    require(t.size() == state_.temperature.size(), "temperature field does not match phantom");
    for (const auto &c : cells_) {
      require(std::isfinite(t[c.index]) && t[c.index] > 0.0, "temperatures must be finite and > 0 K");
      state_.temperature[c.index] = t[c.index];
    }
  }

  void step(double dt) {
    if (!(dt > 0.0) || dt > bound_)
      throw InvalidArgument("thermal time step " + text::report(dt) + " s violates the stability bound " +
                            text::report(bound_) + " s");
    const double tb = params_.blood_temperature, ta = params_.ambient;
    const auto &t = state_.temperature;
    const auto count = static_cast<std::ptrdiff_t>(cells_.size());
    bool bad = false;
#pragma omp parallel for schedule(static) reduction(|| : bad)
    for (std::ptrdiff_t n = 0; n < count; ++n) {
      const Cell &c = cells_[n];
      const double tn = t[c.index];
      double flux = c.source + c.perfusion * (tb - tn) + c.convection * (ta - tn);
      for (int s = 0; s < c.neighbors; ++s)
        flux += c.conductance[s] * (t[c.neighbor[s]] - tn);
      const double v = tn + dt * c.inv_heat_capacity * flux;
      bad = bad || !std::isfinite(v);
      next_[c.index] = v;
    }
    if (bad)
      throw Error("non-finite temperature at t = " + text::report(state_.time + dt) + " s");
    for (const auto &c : cells_)
      state_.temperature[c.index] = next_[c.index];
    state_.time += dt;
  }

private:
  struct Cell {
    std::size_t index = 0;
    double inv_heat_capacity = 0;
    double perfusion = 0;  // rho_b C_b w_b
    double source = 0;     // Q_m + rho SAR
    double convection = 0; // h / dx times the number of tissue-air faces
    int neighbors = 0;
    std::array<std::size_t, 6> neighbor{};
    std::array<double, 6> conductance{}; // W/(m^3 K)
  };

  ThermalParams params_;
  ThermalState state_;
  std::vector<Cell> cells_;
  std::vector<double> next_;
  double bound_ = std::numeric_limits<double>::infinity();
};

struct ExposureResult {
  ThermalState state;
  double peak_rise = 0; // K, over tissue voxels
  double mean_rise = 0;
  Index3 peak_voxel{-1, -1, -1};
  double dt = 0;
  long long steps = 0;
};

/// Time step actually used for `duration`: the requested (or automatic)
/// step shortened so an integer number of steps lands on `duration`.
inline double exposure_dt(const PennesSolver &s, const ThermalParams &p, double duration, long long &steps) {
  double target = p.dt > 0.0 ? p.dt : std::min(0.9 * s.stable_dt(), p.max_dt);
  if (!std::isfinite(target))
    target = p.max_dt;
  steps = duration == 0.0 ? 0 : static_cast<long long>(std::ceil(duration / target - 1e-12));
  return steps == 0 ? target : duration / static_cast<double>(steps);
}

inline ExposureResult run_exposure(const VoxelPhantom &ph, const std::vector<double> &sar, double duration,
                                   const ThermalParams &params = {}) {
  require(std::isfinite(duration) && duration >= 0.0, "exposure duration must be >= 0");
  PennesSolver solver(ph, sar, params);
  ExposureResult r;
  r.dt = exposure_dt(solver, params, duration, r.steps);
  for (long long s = 0; s < r.steps; ++s)
    solver.step(r.dt);
  r.state = solver.state();
  const auto &d = ph.dims;
  double sum = 0;
  std::size_t count = 0;
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        const auto n = d.index(i, j, k);
        if (ph.voxels[n] == 0)
          continue;
        const double rise = r.state.temperature[n] - params.initial_temperature;
        sum += rise;
        ++count;
        if (r.peak_voxel.i < 0 || rise > r.peak_rise) {
          r.peak_rise = rise;
          r.peak_voxel = {i, j, k};
        }
      }
  r.mean_rise = count ? sum / static_cast<double>(count) : 0.0;
  return r;
}

} // namespace voxsar::bioheat
