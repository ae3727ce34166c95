#pragma once

#include <complex>
#include <vector>

#include "voxsar/common.hpp"

namespace voxsar::fdtd {

using cplx = std::complex<double>;

/// Closed box of grid nodes, lo and hi inclusive.
struct NodeBox {
  Index3 lo, hi;

  bool contains(const NodeBox &o) const {
    for (int a = 0; a < 3; ++a)
      if (o.lo[a] < lo[a] || o.hi[a] > hi[a])
        return false;
    return true;
  }
};

/// Complex field amplitudes (peak, e^{+i w t}) on a rectangular block of
/// grid nodes. Component c of E at local node n is the sample on the edge
/// from n to n+1 along c; H components follow the same Yee placement.
struct PhasorField {
  Extent3 dims;
  Index3 origin;          // grid node of local (0, 0, 0)
  Index3 phantom_offset;  // local node of phantom voxel (0, 0, 0)
  double spacing = 0;
  double frequency = 0;
  double dt = 0;
  std::array<std::vector<cplx>, 3> e;
  std::array<std::vector<cplx>, 3> h; // empty unless recorded

  bool converged = false;
  bool calibrated = false;
  double radiated_power = 0; // W; measured, or the target after calibration
  double scale = 1;          // amplitude factor applied by calibration
  int periods = 0;           // periods stepped, including the DFT window

  bool has_h() const noexcept { return !h[0].empty(); }

  cplx e_at(int c, int i, int j, int k) const { return e[c][dims.index(i, j, k)]; }
  cplx h_at(int c, int i, int j, int k) const { return h[c][dims.index(i, j, k)]; }

  /// E interpolated to a node: mean of the two edge samples straddling it.
  std::array<cplx, 3> e_node(int i, int j, int k) const {
    std::array<cplx, 3> out;
    const int n[3] = {i, j, k};
    for (int c = 0; c < 3; ++c) {
      int m[3] = {i, j, k};
      m[c] = n[c] - 1;
      out[c] = 0.5 * (e_at(c, i, j, k) + e_at(c, m[0], m[1], m[2]));
    }
    return out;
  }

  /// |E_rms|^2 = (|Ex|^2 + |Ey|^2 + |Ez|^2) / 2 at a node.
  double e_rms2_node(int i, int j, int k) const {
    const auto v = e_node(i, j, k);
    return 0.5 * (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
  }
};

/// Net time-averaged power leaving a closed box, the integral of
/// 1/2 Re(E x H*) over its six faces. The field must hold H and cover the box
/// plus one node on every side.
inline double poynting_flux(const PhasorField &f, const NodeBox &box) {
  require(f.has_h(), "Poynting flux needs recorded H phasors");
  Index3 lo{box.lo.i - f.origin.i, box.lo.j - f.origin.j, box.lo.k - f.origin.k};
  Index3 hi{box.hi.i - f.origin.i, box.hi.j - f.origin.j, box.hi.k - f.origin.k};
  for (int a = 0; a < 3; ++a)
    require(lo[a] >= 1 && hi[a] + 1 < f.dims[a] && hi[a] > lo[a], "flux box is not inside the recorded region");

  double total = 0;
  for (int a = 0; a < 3; ++a) {
    const int u = (a + 1) % 3, v = (a + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const int plane = side == 0 ? lo[a] : hi[a];
      const double orient = side == 0 ? -1.0 : 1.0;
      auto node = [&](int pu, int pv, int pa) {
        int n[3];
        n[u] = pu;
        n[v] = pv;
        n[a] = pa;
        return f.dims.index(n[0], n[1], n[2]);
      };
      auto h_mid = [&](int c, int pu, int pv) {
        return 0.5 * (f.h[c][node(pu, pv, plane - 1)] + f.h[c][node(pu, pv, plane)]);
      };
      double face = 0;
      // E_u x H_v on (u edge, v node) points
      for (int pu = lo[u]; pu < hi[u]; ++pu)
        for (int pv = lo[v]; pv <= hi[v]; ++pv) {
          const double w = (pv == lo[v] || pv == hi[v]) ? 0.5 : 1.0;
          face += w * (f.e[u][node(pu, pv, plane)] * std::conj(h_mid(v, pu, pv))).real();
        }
      // -E_v x H_u on (u node, v edge) points
      for (int pu = lo[u]; pu <= hi[u]; ++pu)
        for (int pv = lo[v]; pv < hi[v]; ++pv) {
          const double w = (pu == lo[u] || pu == hi[u]) ? 0.5 : 1.0;
          face -= w * (f.e[v][node(pu, pv, plane)] * std::conj(h_mid(u, pu, pv))).real();
        }
      total += orient * face;
    }
  }
  return 0.5 * total * f.spacing * f.spacing;
}

/// Rescales a converged field so that it radiates `target_power`.
inline PhasorField calibrate_power(const PhasorField &f, double target_power) {
  require(std::isfinite(target_power) && target_power > 0.0, "target power must be > 0");
  if (!(f.radiated_power > 0.0) || !std::isfinite(f.radiated_power))
    throw InvalidArgument("measured radiated power is " + std::to_string(f.radiated_power) +
                          " W; the source does not radiate");
  PhasorField out = f;
  const double s = std::sqrt(target_power / f.radiated_power);
  for (int c = 0; c < 3; ++c) {
    for (auto &v : out.e[c])
      v *= s;
    for (auto &v : out.h[c])
      v *= s;
  }
  out.scale = f.scale * s;
  out.radiated_power = target_power;
  out.calibrated = true;
  return out;
}

} // namespace voxsar::fdtd
