#pragma once

// Yee-grid time stepper: leapfrog H then E, Debye media through an
// auxiliary differential equation for the polarization current, CPML
// stretching on non-periodic axes and soft current sources.
//
// Every per-cell update reads a fixed set of operands in a fixed order, so
// splitting the z loop across threads does not change a single bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "voxsar/fdtd/grid.hpp"

namespace voxsar::fdtd {

/// Field blow-up detected while stepping.
class StabilityError : public Error {
public:
  using Error::Error;
};

/// Soft current-density source on a set of E edges of one component:
/// J_e(t) = in_phase_e * s(t) + quadrature_e * c(t), with (s, c) = waveform(t).
struct CurrentSource {
  int component = 0;
  std::vector<std::ptrdiff_t> index;
  std::vector<double> in_phase;
  std::vector<double> quadrature;
  std::function<std::array<double, 2>(double)> waveform;
};

/// Watches max|E| samples for non-finite values and for runaway growth:
/// once armed, a rise by more than `growth_limit` across `window` samples
/// is treated as divergence.
class StabilityMonitor {
public:
  explicit StabilityMonitor(std::size_t arm_step = 0, double growth_limit = 1e6, std::size_t window = 8)
      : arm_step_(arm_step), growth_limit_(growth_limit), window_(window) {}

  void record(std::size_t step, double max_e) {
    history_.emplace_back(step, max_e);
    if (!std::isfinite(max_e))
      fail(step, "non-finite field value");
    if (step < arm_step_ || history_.size() <= window_)
      return;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t n = history_.size() - 1 - window_; n < history_.size() - 1; ++n)
      if (history_[n].first >= arm_step_)
        lo = std::min(lo, history_[n].second);
    if (std::isfinite(lo) && lo > 0.0 && max_e > growth_limit_ * lo)
      fail(step, "max|E| grew by more than " + text::report(growth_limit_) + "x");
  }

  const std::vector<std::pair<std::size_t, double>> &history() const noexcept { return history_; }

private:
  [[noreturn]] void fail(std::size_t step, const std::string &why) const {
    std::ostringstream msg;
    msg << "FDTD diverged at step " << step << " (" << why << "); max|E| history:";
    const std::size_t first = history_.size() > 12 ? history_.size() - 12 : 0;
    for (std::size_t n = first; n < history_.size(); ++n)
      msg << ' ' << history_[n].first << ':' << text::report(history_[n].second);
    throw StabilityError(msg.str());
  }

  std::size_t arm_step_;
  double growth_limit_;
  std::size_t window_;
  std::vector<std::pair<std::size_t, double>> history_;
};

class YeeSolver {
public:
  explicit YeeSolver(GridSetup setup) : g_(std::move(setup)) {
    g_.validate();
    stride_ = {1, g_.nodes.nx, static_cast<std::ptrdiff_t>(g_.nodes.nx) * g_.nodes.ny};
    for (int a = 0; a < 3; ++a)
      init_axis(a);
    const auto n = g_.nodes.size();
    for (int c = 0; c < 3; ++c) {
      e_[c].assign(n, 0.0);
      h_[c].assign(n, 0.0);
    }
    build_edge_classes();
    build_psi_blocks();
  }

  const GridSetup &setup() const noexcept { return g_; }
  double dt() const noexcept { return g_.dt; }
  std::size_t step_index() const noexcept { return step_; }
  /// Time of the current E samples; H samples lag by dt/2.
  double time() const noexcept { return static_cast<double>(step_) * g_.dt; }

  const std::vector<double> &e(int c) const { return e_[c]; }
  const std::vector<double> &h(int c) const { return h_[c]; }

  void add_source(CurrentSource s) {
    require(s.component >= 0 && s.component < 3, "source component out of range");
    require(s.index.size() == s.in_phase.size() && s.index.size() == s.quadrature.size(),
            "source amplitude arrays do not match its edge list");
    require(static_cast<bool>(s.waveform), "source needs a waveform");
    sources_.push_back(std::move(s));
  }
  void clear_sources() { sources_.clear(); }

  /// Advances H by one step then E by one step.
  void step() {
    update_h<0>();
    update_h<1>();
    update_h<2>();
    for (auto &blk : psi_h_)
      apply_psi<false>(blk);

    for (int c = 0; c < 3; ++c)
      dispersive_pre(c);
    update_e<0>();
    update_e<1>();
    update_e<2>();
    for (auto &blk : psi_e_)
      apply_psi<true>(blk);
    inject_sources();
    for (int c = 0; c < 3; ++c)
      dispersive_post(c);
    ++step_;
  }

  void advance(std::size_t steps, StabilityMonitor *monitor = nullptr, std::size_t check_every = 16) {
    for (std::size_t s = 0; s < steps; ++s) {
      step();
      if (monitor && step_ % check_every == 0)
        monitor->record(step_, max_abs_e());
    }
  }

  /// Largest |E| sample; +inf if any sample is non-finite.
  double max_abs_e() const {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
      for (double v : e_[c]) {
        if (!std::isfinite(v))
          return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
      }
    return m;
  }

  /// Node range [lo, hi) on which component c of E is updated.
  std::array<std::array<int, 2>, 3> e_range(int c) const {
    std::array<std::array<int, 2>, 3> r;
    for (int a = 0; a < 3; ++a)
      r[a] = a == c ? std::array<int, 2>{0, edges_[a]} : std::array<int, 2>{node_lo_[a], node_hi_[a]};
    return r;
  }
  std::array<std::array<int, 2>, 3> h_range(int c) const {
    std::array<std::array<int, 2>, 3> r;
    for (int a = 0; a < 3; ++a)
      r[a] = a == c ? std::array<int, 2>{0, g_.nodes[a]} : std::array<int, 2>{0, edges_[a]};
    return r;
  }

  /// Offset to the next node along `axis` from node `n` (wraps on periodic axes).
  std::ptrdiff_t next_offset(int axis, int n) const { return next_[axis][n]; }
  std::ptrdiff_t prev_offset(int axis, int n) const { return prev_[axis][n]; }
  std::ptrdiff_t stride(int axis) const { return stride_[axis]; }

  /// Update coefficients (ca, cb) of an E sample.
  std::array<double, 2> e_coefficients(int c, std::ptrdiff_t idx) const {
    const auto cls = eclass_[c][static_cast<std::size_t>(idx)];
    return {ca_[cls], cb_[cls]};
  }

private:
  struct Pole {
    double weight, kappa, beta;
  };
  /// CPML accumulator for one curl term of one component over one
  /// contiguous slab of PML cells.
  struct PsiBlock {
    int comp, axis, field;
    double sign;
    std::array<std::array<int, 2>, 3> box;
    std::vector<double> psi; // x fastest over `box`
  };

  using Box = std::array<std::array<int, 2>, 3>;

  /// Calls f(j, k, row_base) for each x row of the box, z slabs in parallel.
  template <class F> void for_rows(const Box &r, F &&f) const {
    const auto sy = stride_[1], sz = stride_[2];
#pragma omp parallel for schedule(static)
    for (int k = r[2][0]; k < r[2][1]; ++k)
      for (int j = r[1][0]; j < r[1][1]; ++j)
        f(j, k, j * sy + k * sz);
  }

  /// Splits [i0, i1) into pieces with a constant x neighbour offset and
  /// calls f(a, b, offset) for each.
  template <class F> void split_x(int i0, int i1, const std::vector<std::ptrdiff_t> &offsets, F &&f) const {
    int a = i0;
    while (a < i1) {
      int b = a + 1;
      while (b < i1 && offsets[b] == offsets[a])
        ++b;
      f(a, b, offsets[a]);
      a = b;
    }
  }

  void init_axis(int a) {
    const int n = g_.nodes[a];
    const bool per = g_.periodic(a);
    edges_[a] = per ? n : n - 1;
    node_lo_[a] = per ? 0 : 1;
    node_hi_[a] = per ? n : n - 1;
    next_[a].assign(n, stride_[a]);
    prev_[a].assign(n, -stride_[a]);
    if (per) {
      next_[a][n - 1] = -static_cast<std::ptrdiff_t>(n - 1) * stride_[a];
      prev_[a][0] = static_cast<std::ptrdiff_t>(n - 1) * stride_[a];
    }
    ike_[a].assign(n, 1.0);
    ikh_[a].assign(n, 1.0);
    be_[a].assign(n, 0.0);
    ce_[a].assign(n, 0.0);
    bh_[a].assign(n, 0.0);
    ch_[a].assign(n, 0.0);
    depth_e_[a].assign(n, 0.0);
    depth_h_[a].assign(n, 0.0);
    const int P = g_.pml.cells;
    if (per || P == 0)
      return;
    const double dx = g_.spacing;
    const int m = g_.pml.order;
    const double sigma_max = g_.pml.sigma_scale * (m + 1) / (constants::eta0 * dx);
    auto depth = [&](double x) {
      if (x < P)
        return (P - x) / P;
      if (x > n - 1 - P)
        return (x - (n - 1 - P)) / P;
      return 0.0;
    };
    auto fill = [&](double x, double &ik, double &b, double &c, double &rho_out) {
      const double rho = std::min(1.0, depth(x));
      rho_out = rho;
      if (rho <= 0.0)
        return;
      const double graded = std::pow(rho, m);
      const double sigma = sigma_max * graded;
      const double kappa = 1.0 + (g_.pml.kappa_max - 1.0) * graded;
      const double alpha = g_.pml.alpha_max * (1.0 - rho);
      ik = 1.0 / kappa;
      b = std::exp(-(sigma / kappa + alpha) * g_.dt / constants::eps0);
      c = sigma > 0.0 ? sigma / (sigma * kappa + kappa * kappa * alpha) * (b - 1.0) : 0.0;
    };
    for (int i = 0; i < n; ++i) {
      fill(i, ike_[a][i], be_[a][i], ce_[a][i], depth_e_[a][i]);
      if (i < n - 1)
        fill(i + 0.5, ikh_[a][i], bh_[a][i], ch_[a][i], depth_h_[a][i]);
    }
  }

  void build_edge_classes() {
    std::map<std::uint16_t, std::uint16_t> lookup;
    const double dt = g_.dt;
    auto add_class = [&](std::uint8_t m1, std::uint8_t m2) {
      const Material *mats[2] = {&g_.table.materials[m1], &g_.table.materials[m2]};
      for (auto *m : mats)
        if (m->dispersive.has_pole() && !m->dispersive.is_debye())
          throw InvalidArgument("material '" + m->name +
                                "' uses a Cole-Cole exponent; the time-domain solver supports Debye (alpha = 0) only");
      const double eps = 0.5 * (mats[0]->dispersive.eps_inf + mats[1]->dispersive.eps_inf);
      const double sigma = 0.5 * (mats[0]->dispersive.sigma_s + mats[1]->dispersive.sigma_s);
      std::vector<Pole> poles;
      auto add_pole = [&](const DispersiveModel &d, double w) {
        if (!d.has_pole())
          return;
        const double kappa = std::exp(-dt / d.tau());
        poles.push_back({w, kappa, constants::eps0 * d.delta_eps * (1.0 - kappa) / dt});
      };
      if (m1 == m2) {
        add_pole(mats[0]->dispersive, 1.0);
      } else {
        add_pole(mats[0]->dispersive, 0.5);
        add_pole(mats[1]->dispersive, 0.5);
      }
      double beta_sum = 0.0;
      for (const auto &p : poles)
        beta_sum += p.weight * p.beta;
      const double lhs = constants::eps0 * eps / dt + 0.5 * sigma + 0.5 * beta_sum;
      const double rhs = constants::eps0 * eps / dt - 0.5 * sigma + 0.5 * beta_sum;
      ca_.push_back(rhs / lhs);
      cb_.push_back(1.0 / lhs);
      poles_.push_back(std::move(poles));
    };

    for (int c = 0; c < 3; ++c) {
      eclass_[c].assign(g_.nodes.size(), 0);
      disp_index_[c].clear();
      const auto r = e_range(c);
      for (int k = r[2][0]; k < r[2][1]; ++k)
        for (int j = r[1][0]; j < r[1][1]; ++j)
          for (int i = r[0][0]; i < r[0][1]; ++i) {
            const int n[3] = {i, j, k};
            const std::ptrdiff_t idx = i + j * stride_[1] + k * stride_[2];
            std::uint8_t m1 = g_.materials[static_cast<std::size_t>(idx)];
            std::uint8_t m2 = g_.materials[static_cast<std::size_t>(idx + next_[c][n[c]])];
            if (m2 < m1)
              std::swap(m1, m2);
            const auto key = static_cast<std::uint16_t>(m1 << 8 | m2);
            auto it = lookup.find(key);
            if (it == lookup.end()) {
              it = lookup.emplace(key, static_cast<std::uint16_t>(ca_.size())).first;
              add_class(m1, m2);
            }
            eclass_[c][static_cast<std::size_t>(idx)] = it->second;
            if (!poles_[it->second].empty())
              disp_index_[c].push_back(idx);
          }
      jp_[c].assign(disp_index_[c].size() * 2, 0.0);
      eold_[c].assign(disp_index_[c].size(), 0.0);
      corr_[c].assign(disp_index_[c].size(), 0.0);
    }
  }

  void build_psi_blocks() {
    for (int c = 0; c < 3; ++c) {
      const int a1 = (c + 1) % 3, a2 = (c + 2) % 3;
      for (int slot = 0; slot < 2; ++slot) {
        const int axis = slot == 0 ? a1 : a2;
        const int field = slot == 0 ? a2 : a1;
        const double sign = slot == 0 ? 1.0 : -1.0;
        if (g_.periodic(axis) || g_.pml.cells == 0)
          continue;
        add_blocks(psi_e_, c, axis, field, sign, e_range(c), depth_e_[axis]);
        add_blocks(psi_h_, c, axis, field, sign, h_range(c), depth_h_[axis]);
      }
    }
  }

  static void add_blocks(std::vector<PsiBlock> &out, int comp, int axis, int field, double sign, Box box,
                         const std::vector<double> &depth) {
    int n = box[axis][0];
    while (n < box[axis][1]) {
      if (depth[n] <= 0.0) {
        ++n;
        continue;
      }
      int m = n;
      while (m < box[axis][1] && depth[m] > 0.0)
        ++m;
      PsiBlock b{comp, axis, field, sign, box, {}};
      b.box[axis] = {n, m};
      std::size_t cells = 1;
      for (int a = 0; a < 3; ++a)
        cells *= static_cast<std::size_t>(b.box[a][1] - b.box[a][0]);
      b.psi.assign(cells, 0.0);
      out.push_back(std::move(b));
      n = m;
    }
  }

  template <int C> void update_h() {
    constexpr int A1 = (C + 1) % 3, A2 = (C + 2) % 3;
    const double coef = g_.dt / (constants::mu0 * g_.spacing);
    double *hc = h_[C].data();
    const double *ea2 = e_[A2].data();
    const double *ea1 = e_[A1].data();
    const double *ikx = ikh_[0].data();
    const Box r = h_range(C);
    for_rows(r, [&](int j, int k, std::ptrdiff_t base) {
      const int n[3] = {0, j, k};
      const double ik1 = A1 == 0 ? 0.0 : ikh_[A1][n[A1]];
      const double ik2 = A2 == 0 ? 0.0 : ikh_[A2][n[A2]];
      const std::ptrdiff_t o1 = A1 == 0 ? 0 : next_[A1][n[A1]];
      const std::ptrdiff_t o2 = A2 == 0 ? 0 : next_[A2][n[A2]];
      split_x(r[0][0], r[0][1], next_[0], [&](int i0, int i1, std::ptrdiff_t ox) {
        const std::ptrdiff_t s1 = A1 == 0 ? ox : o1, s2 = A2 == 0 ? ox : o2;
        for (int i = i0; i < i1; ++i) {
          const std::ptrdiff_t idx = base + i;
          const double d1 = (ea2[idx + s1] - ea2[idx]) * (A1 == 0 ? ikx[i] : ik1);
          const double d2 = (ea1[idx + s2] - ea1[idx]) * (A2 == 0 ? ikx[i] : ik2);
          hc[idx] -= coef * (d1 - d2);
        }
      });
    });
  }

  template <int C> void update_e() {
    constexpr int A1 = (C + 1) % 3, A2 = (C + 2) % 3;
    const double inv_dx = 1.0 / g_.spacing;
    double *ec = e_[C].data();
    const double *ha2 = h_[A2].data();
    const double *ha1 = h_[A1].data();
    const double *ikx = ike_[0].data();
    const std::uint16_t *cls = eclass_[C].data();
    const double *ca = ca_.data();
    const double *cb = cb_.data();
    const Box r = e_range(C);
    for_rows(r, [&](int j, int k, std::ptrdiff_t base) {
      const int n[3] = {0, j, k};
      const double ik1 = A1 == 0 ? 0.0 : ike_[A1][n[A1]];
      const double ik2 = A2 == 0 ? 0.0 : ike_[A2][n[A2]];
      const std::ptrdiff_t o1 = A1 == 0 ? 0 : prev_[A1][n[A1]];
      const std::ptrdiff_t o2 = A2 == 0 ? 0 : prev_[A2][n[A2]];
      split_x(r[0][0], r[0][1], prev_[0], [&](int i0, int i1, std::ptrdiff_t ox) {
        const std::ptrdiff_t s1 = A1 == 0 ? ox : o1, s2 = A2 == 0 ? ox : o2;
        for (int i = i0; i < i1; ++i) {
          const std::ptrdiff_t idx = base + i;
          const double d1 = (ha2[idx] - ha2[idx + s1]) * (A1 == 0 ? ikx[i] : ik1);
          const double d2 = (ha1[idx] - ha1[idx + s2]) * (A2 == 0 ? ikx[i] : ik2);
          const auto c = cls[idx];
          ec[idx] = ca[c] * ec[idx] + cb[c] * inv_dx * (d1 - d2);
        }
      });
    });
  }

  /// Row kernel shared by the E and H accumulator passes. `diff` is the
  /// one-sided difference of the driving field along the block axis.
  template <bool Electric> void apply_psi(PsiBlock &b) {
    const double inv_dx = 1.0 / g_.spacing;
    const int ax = b.axis;
    const auto &bc = Electric ? be_[ax] : bh_[ax];
    const auto &cc = Electric ? ce_[ax] : ch_[ax];
    double *out = Electric ? e_[b.comp].data() : h_[b.comp].data();
    const double *f = Electric ? h_[b.field].data() : e_[b.field].data();
    const std::uint16_t *cls = eclass_[b.comp].data();
    const double coef_h = g_.dt / constants::mu0 * b.sign;
    const std::ptrdiff_t off = Electric ? -stride_[ax] : stride_[ax];
    const int nx = b.box[0][1] - b.box[0][0];
    const int ny = b.box[1][1] - b.box[1][0];
    for_rows(b.box, [&](int j, int k, std::ptrdiff_t base) {
      double *psi = b.psi.data() +
                    static_cast<std::ptrdiff_t>(nx) * ((j - b.box[1][0]) + static_cast<std::ptrdiff_t>(ny) * (k - b.box[2][0]));
      const int n[3] = {0, j, k};
      const double bs = ax == 0 ? 0.0 : bc[n[ax]];
      const double cs = ax == 0 ? 0.0 : cc[n[ax]];
      for (int i = b.box[0][0]; i < b.box[0][1]; ++i, ++psi) {
        const std::ptrdiff_t idx = base + i;
        const double diff = Electric ? f[idx] - f[idx + off] : f[idx + off] - f[idx];
        *psi = (ax == 0 ? bc[i] : bs) * *psi + (ax == 0 ? cc[i] : cs) * diff * inv_dx;
        if constexpr (Electric)
          out[idx] += cb_[cls[idx]] * b.sign * *psi;
        else
          out[idx] -= coef_h * *psi;
      }
    });
  }

  void inject_sources() {
    const double t = (static_cast<double>(step_) + 0.5) * g_.dt;
    for (const auto &s : sources_) {
      const auto [sv, cv] = s.waveform(t);
      double *ec = e_[s.component].data();
      const std::uint16_t *cls = eclass_[s.component].data();
      for (std::size_t n = 0; n < s.index.size(); ++n) {
        const auto idx = s.index[n];
        ec[idx] -= cb_[cls[idx]] * (s.in_phase[n] * sv + s.quadrature[n] * cv);
      }
    }
  }

  void dispersive_pre(int c) {
    const auto &idx = disp_index_[c];
    const double *ec = e_[c].data();
    const std::uint16_t *cls = eclass_[c].data();
    for (std::size_t n = 0; n < idx.size(); ++n) {
      const auto &poles = poles_[cls[idx[n]]];
      double corr = 0.0;
      for (std::size_t m = 0; m < poles.size(); ++m)
        corr += poles[m].weight * 0.5 * (1.0 + poles[m].kappa) * jp_[c][2 * n + m];
      corr_[c][n] = corr;
      eold_[c][n] = ec[idx[n]];
    }
  }

  void dispersive_post(int c) {
    const auto &idx = disp_index_[c];
    double *ec = e_[c].data();
    const std::uint16_t *cls = eclass_[c].data();
    for (std::size_t n = 0; n < idx.size(); ++n) {
      const auto cl = cls[idx[n]];
      ec[idx[n]] -= cb_[cl] * corr_[c][n];
      const double de = ec[idx[n]] - eold_[c][n];
      const auto &poles = poles_[cl];
      for (std::size_t m = 0; m < poles.size(); ++m) {
        double &jp = jp_[c][2 * n + m];
        jp = poles[m].kappa * jp + poles[m].beta * de;
      }
    }
  }

  GridSetup g_;
  std::array<std::ptrdiff_t, 3> stride_{};
  std::array<int, 3> edges_{}, node_lo_{}, node_hi_{};
  std::array<std::vector<std::ptrdiff_t>, 3> next_, prev_;
  std::array<std::vector<double>, 3> ike_, ikh_, be_, ce_, bh_, ch_, depth_e_, depth_h_;
  std::array<std::vector<double>, 3> e_, h_;

  std::array<std::vector<std::uint16_t>, 3> eclass_;
  std::vector<double> ca_, cb_;
  std::vector<std::vector<Pole>> poles_;
  std::array<std::vector<std::ptrdiff_t>, 3> disp_index_;
  std::array<std::vector<double>, 3> jp_, eold_, corr_;

  std::vector<PsiBlock> psi_e_, psi_h_;
  std::vector<CurrentSource> sources_;
  std::size_t step_ = 0;
};

} // namespace voxsar::fdtd
