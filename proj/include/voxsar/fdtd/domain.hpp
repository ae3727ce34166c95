#pragma once

// Places a phantom and a parametric source on a padded Yee grid and runs
// the CW solve down to calibrated-ready phasors on the phantom.

#include <cmath>
#include <string>
#include <vector>

#include "voxsar/fdtd/aperture.hpp"
#include "voxsar/fdtd/steady_state.hpp"
#include "voxsar/phantom.hpp"

namespace voxsar::fdtd {

struct DomainSpec {
  int padding = 14; // free-space cells on every side, PML included
  PmlParams pml;
  double courant = 0.5;
  double frequency = 6e9;

  void validate() const {
    pml.validate();
    require(padding >= pml.cells + 2, "padding must be >= pml cells + 2");
    require(std::isfinite(courant) && courant > 0.0 && courant <= 1.0, "courant factor must lie in (0, 1]");
    require(std::isfinite(frequency) && frequency > 0.0, "frequency must be > 0");
  }
};

enum class SourceKind { point_dipole, aperture_patch };

inline SourceKind source_kind_from_string(std::string_view s) {
  if (s == "dipole" || s == "point_dipole")
    return SourceKind::point_dipole;
  if (s == "patch" || s == "aperture_patch")
    return SourceKind::aperture_patch;
  throw InvalidArgument("unknown source kind '" + std::string(s) + "' (expected dipole or patch)");
}

inline std::string to_string(SourceKind k) { return k == SourceKind::point_dipole ? "dipole" : "patch"; }

struct SourceSpec {
  SourceKind kind = SourceKind::aperture_patch;
  double distance = 5e-3;       // apex tissue voxel to source, center to center
  Axis axis = Axis::z;          // separation axis
  int side = +1;                // source beyond the phantom's high (+1) or low (-1) face
  Axis polarization = Axis::x;  // current direction
  double patch_edge = 0;        // 0: sized from target_gain_db
  double steering_deg = 45;
  double target_gain_db = 3.53;
  double ramp_periods = 3;

  void validate() const {
    require(std::isfinite(distance) && distance > 0.0, "source distance must be > 0");
    require(side == 1 || side == -1, "source side must be +1 or -1");
    require(std::isfinite(steering_deg) && steering_deg >= 0.0 && steering_deg <= 90.0,
            "steering angle must lie in [0, 90] degrees");
    require(std::isfinite(patch_edge) && patch_edge >= 0.0, "patch edge must be >= 0");
    if (kind == SourceKind::aperture_patch)
      require(polarization != axis, "patch current must lie in the aperture plane");
  }
};

/// Grid placement of phantom, source and flux box.
struct Layout {
  GridSetup setup;
  TimeBase time;
  Index3 phantom_origin;  // grid node of voxel (0, 0, 0)
  Index3 apex;            // phantom voxel the distance is measured from
  Index3 source_center;   // grid node
  int source_cells = 0;   // separation in cells
  int patch_cells = 0;    // 0 for a dipole
  double patch_edge = 0;  // m, as meshed
  NodeBox flux_box;
  CurrentSource source;
};

namespace detail {

inline Index3 find_apex(const VoxelPhantom &ph, int a, int side) {
  const int u = (a + 1) % 3, v = (a + 2) % 3;
  const double cu = 0.5 * (ph.dims[u] - 1), cv = 0.5 * (ph.dims[v] - 1);
  bool found = false;
  Index3 best{};
  double best_r = 0;
  int best_level = 0;
  for (int k = 0; k < ph.dims.nz; ++k)
    for (int j = 0; j < ph.dims.ny; ++j)
      for (int i = 0; i < ph.dims.nx; ++i) {
        if (ph.at(i, j, k) == 0)
          continue;
        const int n[3] = {i, j, k};
        const int level = side * n[a];
        const double r = (n[u] - cu) * (n[u] - cu) + (n[v] - cv) * (n[v] - cv);
        if (!found || level > best_level || (level == best_level && r < best_r)) {
          found = true;
          best = {i, j, k};
          best_level = level;
          best_r = r;
        }
      }
  if (!found)
    throw InvalidArgument("phantom contains no tissue");
  return best;
}

inline Index3 with(Index3 p, int axis, int value) {
  int n[3] = {p.i, p.j, p.k};
  n[axis] = value;
  return {n[0], n[1], n[2]};
}

} // namespace detail

inline Layout make_layout(const VoxelPhantom &ph, const DomainSpec &dom, const SourceSpec &src) {
  ph.validate();
  dom.validate();
  src.validate();
  const double dx = ph.resolution;
  const int a = axis_index(src.axis);
  const int p = axis_index(src.polarization);
  const int q = 3 - a - p; // steering axis of the patch

  const double cells_exact = src.distance / dx;
  const int cells = static_cast<int>(std::llround(cells_exact));
  if (std::abs(cells_exact - cells) > 1e-6 * std::max(1.0, cells_exact))
    throw InvalidArgument("source distance " + text::report(src.distance * 1e3) +
                          " mm is not a multiple of the voxel size " + text::report(dx * 1e3) + " mm");
  require(cells >= 2, "source distance must be at least two voxels");

  Layout L;
  L.source_cells = cells;
  L.apex = detail::find_apex(ph, a, src.side);

  if (src.kind == SourceKind::aperture_patch) {
    L.patch_edge = src.patch_edge > 0.0
                       ? src.patch_edge
                       : solve_aperture_edge(dom.frequency, src.steering_deg * constants::pi / 180.0,
                                             src.target_gain_db);
    L.patch_cells = std::max(1, static_cast<int>(std::llround(L.patch_edge / dx)));
    L.patch_edge = L.patch_cells * dx;
  }

  // Extents in phantom-voxel coordinates (may be negative / beyond dims).
  const int half = L.patch_cells / 2;
  const std::array<int, 3> hi{ph.dims.nx - 1, ph.dims.ny - 1, ph.dims.nz - 1};
  const int s_a = L.apex[a] + src.side * cells;
  const int margin_lat = 3, margin_out = 3, margin_in = std::min(3, cells - 1);
  NodeBox box;
  {
    int blo[3], bhi[3];
    for (int t = 0; t < 3; ++t) {
      if (t == a)
        continue;
      const int c = L.apex[t];
      const int ext_lo = L.patch_cells ? half : 0;
      const int ext_hi = L.patch_cells ? L.patch_cells - half : 1;
      blo[t] = c - ext_lo - margin_lat;
      bhi[t] = c + ext_hi + margin_lat;
    }
    if (src.side > 0) {
      blo[a] = s_a - margin_in;
      bhi[a] = s_a + margin_out;
    } else {
      blo[a] = s_a - margin_out;
      bhi[a] = s_a + margin_in;
    }
    box.lo = {blo[0], blo[1], blo[2]};
    box.hi = {bhi[0], bhi[1], bhi[2]};
  }
  const int need = dom.pml.cells + 2;
  std::array<int, 3> pad_lo, pad_hi;
  for (int t = 0; t < 3; ++t) {
    pad_lo[t] = std::max(dom.padding, need - box.lo[t]);
    pad_hi[t] = std::max(dom.padding, box.hi[t] - hi[t] + need);
  }

  auto &g = L.setup;
  g.nodes = {ph.dims.nx + pad_lo[0] + pad_hi[0], ph.dims.ny + pad_lo[1] + pad_hi[1],
             ph.dims.nz + pad_lo[2] + pad_hi[2]};
  g.spacing = dx;
  L.time = make_time_base(dom.frequency, dx, dom.courant);
  g.dt = L.time.dt;
  g.pml = dom.pml;
  g.table = ph.materials;
  g.materials.assign(g.nodes.size(), 0);
  L.phantom_origin = {pad_lo[0], pad_lo[1], pad_lo[2]};
  for (int k = 0; k < ph.dims.nz; ++k)
    for (int j = 0; j < ph.dims.ny; ++j)
      for (int i = 0; i < ph.dims.nx; ++i)
        g.materials[g.nodes.index(i + pad_lo[0], j + pad_lo[1], k + pad_lo[2])] = ph.at(i, j, k);

  auto shift = [&](Index3 v) { return Index3{v.i + pad_lo[0], v.j + pad_lo[1], v.k + pad_lo[2]}; };
  L.flux_box = {shift(box.lo), shift(box.hi)};
  L.source_center = shift(detail::with(L.apex, a, s_a));

  for (int k = L.flux_box.lo.k; k <= L.flux_box.hi.k; ++k)
    for (int j = L.flux_box.lo.j; j <= L.flux_box.hi.j; ++j)
      for (int i = L.flux_box.lo.i; i <= L.flux_box.hi.i; ++i)
        if (g.materials[g.nodes.index(i, j, k)] != 0)
          throw InvalidArgument("source flux box overlaps tissue; increase the distance");

  // Source edges.
  auto &s = L.source;
  s.component = p;
  s.waveform = cw_waveform(dom.frequency, src.ramp_periods);
  const auto st = g.nodes;
  if (src.kind == SourceKind::point_dipole) {
    const auto c = L.source_center;
    s.index.push_back(static_cast<std::ptrdiff_t>(st.index(c.i, c.j, c.k)));
    s.in_phase.push_back(1.0);
    s.quadrature.push_back(0.0);
  } else {
    const double k0 = 2.0 * constants::pi * dom.frequency / constants::c0;
    const double sin_t = std::sin(src.steering_deg * constants::pi / 180.0);
    const double qc = 0.5 * (L.patch_cells - 1);
    for (int m = 0; m < L.patch_cells; ++m)     // along q (nodes)
      for (int e = 0; e < L.patch_cells; ++e) { // along p (edges)
        int n[3];
        n[a] = L.source_center[a];
        n[p] = L.source_center[p] - half + e;
        n[q] = L.source_center[q] - half + m;
        const double phase = -k0 * sin_t * (m - qc) * dx;
        s.index.push_back(static_cast<std::ptrdiff_t>(st.index(n[0], n[1], n[2])));
        s.in_phase.push_back(std::cos(phase));
        s.quadrature.push_back(std::sin(phase));
      }
  }
  g.validate();
  return L;
}

struct SimulationResult {
  PhasorField field; // E on the phantom plus a one-node halo; uncalibrated
  Layout layout;
  std::vector<double> period_energy;
  std::vector<std::pair<std::size_t, double>> max_e_history;
};

/// Full CW solve. The returned phasors carry the radiated power measured on
/// the source's flux box, ready for calibrate_power.
inline SimulationResult simulate(const VoxelPhantom &ph, const DomainSpec &dom, const SourceSpec &src,
                                 const SteadyStateParams &params = {}) {
  SimulationResult out;
  out.layout = make_layout(ph, dom, src);
  const auto &L = out.layout;
  YeeSolver solver(L.setup);
  solver.add_source(L.source);

  RegionRequest phantom_region;
  phantom_region.nodes.lo = {L.phantom_origin.i - 1, L.phantom_origin.j - 1, L.phantom_origin.k - 1};
  phantom_region.nodes.hi = {L.phantom_origin.i + ph.dims.nx, L.phantom_origin.j + ph.dims.ny,
                             L.phantom_origin.k + ph.dims.nz};
  RegionRequest flux_region;
  flux_region.with_h = true;
  flux_region.nodes.lo = {L.flux_box.lo.i - 1, L.flux_box.lo.j - 1, L.flux_box.lo.k - 1};
  flux_region.nodes.hi = {L.flux_box.hi.i + 1, L.flux_box.hi.j + 1, L.flux_box.hi.k + 1};

  SteadyStateParams sp = params;
  sp.ramp_periods = src.ramp_periods;
  auto res = run_to_steady_state(solver, L.time, dom.frequency, {phantom_region, flux_region}, sp);
  out.field = std::move(res.regions[0]);
  out.field.phantom_offset = {1, 1, 1};
  out.field.radiated_power = poynting_flux(res.regions[1], L.flux_box);
  out.period_energy = std::move(res.period_energy);
  out.max_e_history = std::move(res.max_e_history);
  return out;
}

} // namespace voxsar::fdtd
