#pragma once

// Analytic pattern of a uniform square current sheet with a linear phase
// ramp, used to size the aperture source for a requested directivity.

#include <cmath>

#include "voxsar/common.hpp"
#include "voxsar/text.hpp"

namespace voxsar::fdtd {

namespace detail {
inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
} // namespace detail

/// Peak directivity (linear) of an edge x edge sheet of p-directed current,
/// phase-steered by `steering` radians from the sheet normal towards its
/// in-plane q axis. Both half-spaces radiate.
inline double aperture_directivity(double edge, double frequency, double steering, int n_theta = 360) {
  require(edge > 0.0 && frequency > 0.0, "aperture edge and frequency must be > 0");
  const double k0 = 2.0 * constants::pi * frequency / constants::c0;
  const double s0 = std::sin(steering);
  // direction r = (r_p, r_q, r_n); n is the sheet normal
  auto intensity = [&](double rp, double rq) {
    const double f = detail::sinc(0.5 * k0 * edge * rp) * detail::sinc(0.5 * k0 * edge * (rq - s0));
    return f * f * (1.0 - rp * rp);
  };
  const int n_phi = 2 * n_theta;
  const double dth = constants::pi / n_theta, dph = 2.0 * constants::pi / n_phi;
  double integral = 0, peak = 0;
  for (int it = 0; it < n_theta; ++it) {
    const double th = (it + 0.5) * dth;
    const double st = std::sin(th), ct = std::cos(th);
    for (int ip = 0; ip < n_phi; ++ip) {
      const double ph = (ip + 0.5) * dph;
      // polar axis along p so the dipole factor is smooth in theta
      integral += intensity(ct, st * std::cos(ph)) * st * dth * dph;
    }
  }
  // the main lobe lies in the p = 0 plane; scan it finely
  for (int n = 0; n <= 4 * n_theta; ++n) {
    const double rq = -1.0 + 2.0 * n / (4.0 * n_theta);
    peak = std::max(peak, intensity(0.0, rq));
  }
  peak = std::max(peak, intensity(0.0, s0));
  return 4.0 * constants::pi * peak / integral;
}

/// Sheet edge length whose steered peak directivity equals `gain_db` (dBi).
inline double solve_aperture_edge(double frequency, double steering, double gain_db) {
  const double target = std::pow(10.0, gain_db / 10.0);
  const double lambda = constants::c0 / frequency;
  double lo = 1e-4 * lambda;
  if (aperture_directivity(lo, frequency, steering) >= target)
    throw InvalidArgument("requested aperture gain " + text::report(gain_db) +
                          " dBi is below that of an infinitesimal source");
  double hi = 0.25 * lambda;
  while (aperture_directivity(hi, frequency, steering) < target) {
    lo = hi;
    hi *= 1.5;
    if (hi > 20.0 * lambda)
      throw InvalidArgument("requested aperture gain " + text::report(gain_db) + " dBi is out of reach");
  }
  for (int it = 0; it < 60 && hi - lo > 1e-9 * lambda; ++it) {
    const double mid = 0.5 * (lo + hi);
    (aperture_directivity(mid, frequency, steering) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace voxsar::fdtd
