#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxsar/fdtd/phasor.hpp"
#include "voxsar/phantom.hpp"

namespace voxsar::sar {

struct Peak {
  double value = 0;
  Index3 voxel{-1, -1, -1};
  bool found() const noexcept { return voxel.i >= 0; }
};

/// Per-voxel SAR (W/kg) on the phantom grid. `valid` marks voxels that take
/// part in the peak search: tissue for point SAR, cubes above the tissue
/// fraction threshold for averaged SAR.
struct SarField {
  Extent3 dims;
  double resolution = 0;
  double averaging_mass = 0; // kg; 0 for point SAR
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  Peak peak;
};

inline Peak find_peak(const Extent3 &dims, const std::vector<double> &values, const std::vector<std::uint8_t> &valid) {
  Peak p;
  for (int k = 0; k < dims.nz; ++k)
    for (int j = 0; j < dims.ny; ++j)
      for (int i = 0; i < dims.nx; ++i) {
        const auto n = dims.index(i, j, k);
        if (valid[n] && (!p.found() || values[n] > p.value)) {
          p.value = values[n];
          p.voxel = {i, j, k};
        }
      }
  return p;
}

/// SAR = sigma |E_rms|^2 / rho.
inline double point_sar_value(double sigma, double e_rms2, double density) { return sigma * e_rms2 / density; }

struct PointSarOptions {
  bool allow_uncalibrated = false;
  bool allow_unconverged = false;
};

inline SarField point_sar(const fdtd::PhasorField &f, const VoxelPhantom &ph, const PointSarOptions &opt = {}) {
  ph.validate();
  if (!f.calibrated && !opt.allow_uncalibrated)
    throw InvalidArgument("phasors are not power-calibrated");
  if (!f.converged && !opt.allow_unconverged)
    throw InvalidArgument("phasors did not reach steady state");
  require(f.frequency > 0.0, "phasor frequency is not set");
  const auto &o = f.phantom_offset;
  require(o.i >= 1 && o.j >= 1 && o.k >= 1 && o.i + ph.dims.nx <= f.dims.nx && o.j + ph.dims.ny <= f.dims.ny &&
              o.k + ph.dims.nz <= f.dims.nz,
          "phasor region does not cover the phantom");
  require(std::abs(f.spacing - ph.resolution) <= 1e-12 * ph.resolution, "phasor spacing differs from phantom");

  std::vector<double> sigma(ph.materials.size()), rho(ph.materials.size());
  for (std::size_t m = 0; m < ph.materials.size(); ++m) {
    sigma[m] = effective_conductivity(ph.materials.materials[m].dispersive, f.frequency);
    rho[m] = ph.materials.materials[m].density;
  }

  SarField out;
  out.dims = ph.dims;
  out.resolution = ph.resolution;
  out.values.assign(ph.dims.size(), 0.0);
  out.valid.assign(ph.dims.size(), 0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < ph.dims.nz; ++k)
    for (int j = 0; j < ph.dims.ny; ++j)
      for (int i = 0; i < ph.dims.nx; ++i) {
        const auto n = ph.dims.index(i, j, k);
        const auto id = ph.voxels[n];
        if (id == 0)
          continue;
        out.values[n] = point_sar_value(sigma[id], f.e_rms2_node(i + o.i, j + o.j, k + o.k), rho[id]);
        out.valid[n] = 1;
      }
  out.peak = find_peak(out.dims, out.values, out.valid);
  return out;
}

inline double tissue_mass(const VoxelPhantom &ph) {
  std::vector<std::size_t> counts(ph.materials.size(), 0);
  for (auto id : ph.voxels)
    ++counts[id];
  double m = 0;
  for (std::size_t id = 1; id < counts.size(); ++id)
    m += static_cast<double>(counts[id]) * ph.materials.materials[id].density * ph.voxel_volume();
  return m;
}

/// Mass-averaged SAR over centered cubes grown one voxel shell at a time.
/// The outermost shell is weighted so the enclosed tissue mass equals
/// `target_mass` exactly. Voxels outside the phantom count as empty space.
/// Cubes whose tissue volume fraction is below `min_tissue_fraction` are
/// marked invalid.
inline SarField mass_averaged_sar(const SarField &point, const VoxelPhantom &ph, double target_mass,
                                  double min_tissue_fraction = 0.1) {
  require(std::isfinite(target_mass) && target_mass > 0.0, "averaging mass must be > 0");
  require(min_tissue_fraction >= 0.0 && min_tissue_fraction <= 1.0, "tissue fraction threshold must lie in [0, 1]");
  require(point.dims == ph.dims && point.values.size() == ph.dims.size(), "SAR field does not match phantom");
  const double total = tissue_mass(ph);
  if (total < target_mass)
    throw InvalidArgument("phantom tissue mass " + text::report(total * 1e3) + " g is below the averaging mass " +
                          text::report(target_mass * 1e3) + " g");

  const auto &d = ph.dims;
  const double vol = ph.voxel_volume();
  std::vector<double> mass(d.size());
  for (std::size_t n = 0; n < d.size(); ++n)
    mass[n] = ph.voxels[n] == 0 ? 0.0 : ph.material_at(n).density * vol;

  SarField out;
  out.dims = d;
  out.resolution = ph.resolution;
  out.averaging_mass = target_mass;
  out.values.assign(d.size(), 0.0);
  out.valid.assign(d.size(), 0);
  const int rmax = std::max({d.nx, d.ny, d.nz});

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        const auto center = d.index(i, j, k);
        if (ph.voxels[center] == 0)
          continue;
        double inner_m = 0, inner_ms = 0;
        std::size_t inner_t = 0;
        for (int r = 0; r <= rmax; ++r) {
          double shell_m = 0, shell_ms = 0;
          std::size_t shell_t = 0;
          const int k0 = std::max(0, k - r), k1 = std::min(d.nz - 1, k + r);
          const int j0 = std::max(0, j - r), j1 = std::min(d.ny - 1, j + r);
          const int i0 = std::max(0, i - r), i1 = std::min(d.nx - 1, i + r);
          for (int kk = k0; kk <= k1; ++kk)
            for (int jj = j0; jj <= j1; ++jj) {
              const bool face = std::abs(kk - k) == r || std::abs(jj - j) == r;
              const int step = face || r == 0 ? 1 : 2 * r;
              for (int ii = face ? i0 : i - r; ii <= i1; ii += step) {
                if (ii < 0)
                  continue;
                const auto n = d.index(ii, jj, kk);
                if (ph.voxels[n] == 0)
                  continue;
                shell_m += mass[n];
                shell_ms += mass[n] * point.values[n];
                ++shell_t;
              }
            }
          if (inner_m + shell_m >= target_mass) {
            const double w = (target_mass - inner_m) / shell_m;
            out.values[center] = (inner_ms + w * shell_ms) / target_mass;
            const double side_in = 2.0 * r - 1.0;
            const double inner_vol = r == 0 ? 0.0 : side_in * side_in * side_in;
            const double shell_vol = (2.0 * r + 1.0) * (2.0 * r + 1.0) * (2.0 * r + 1.0) - inner_vol;
            const double fraction = (static_cast<double>(inner_t) + w * static_cast<double>(shell_t)) /
                                    (inner_vol + w * shell_vol);
            out.valid[center] = fraction >= min_tissue_fraction ? 1 : 0;
            break;
          }
          inner_m += shell_m;
          inner_ms += shell_ms;
          inner_t += shell_t;
        }
      }
  out.peak = find_peak(out.dims, out.values, out.valid);
  return out;
}

/// Multiplies every SAR value by k (power scaling).
inline SarField scaled(SarField f, double k) {
  for (auto &v : f.values)
    v *= k;
  f.peak.value *= k;
  return f;
}

struct ComplianceReport {
  double limit_1g = 1.6;  // W/kg
  double limit_10g = 2.0; // W/kg
  double peak_1g = 0;
  double peak_10g = 0;
  bool pass_1g = true;
  bool pass_10g = true;

  double margin_1g() const noexcept { return limit_1g - peak_1g; }
  double margin_10g() const noexcept { return limit_10g - peak_10g; }
};

inline ComplianceReport compliance(double peak_1g, double peak_10g, double limit_1g = 1.6, double limit_10g = 2.0) {
  require(peak_1g >= 0.0 && peak_10g >= 0.0, "SAR peaks must be >= 0");
  ComplianceReport r;
  r.limit_1g = limit_1g;
  r.limit_10g = limit_10g;
  r.peak_1g = peak_1g;
  r.peak_10g = peak_10g;
  r.pass_1g = peak_1g <= limit_1g;
  r.pass_10g = peak_10g <= limit_10g;
  return r;
}

} // namespace voxsar::sar
