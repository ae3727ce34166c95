#pragma once

// Pipeline stages shared by the subcommands, and the sweep driver that
// chains them: one FDTD solve per (distance, density), every power derived
// by calibration scaling.

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "voxsar/bioheat.hpp"
#include "voxsar/cli/config.hpp"
#include "voxsar/fdtd/domain.hpp"
#include "voxsar/phantom.hpp"
#include "voxsar/sar.hpp"

#ifndef VOXSAR_VERSION
#define VOXSAR_VERSION "0.0.0"
#endif

namespace voxsar::cli {

/// dBm to W: 10^(dBm/10) mW.
inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0 - 3.0); }

/// Fully resolved run parameters.
struct Settings {
  MaterialTable table;
  std::string phantom_file;
  PhantomSpec phantom;
  double resolution = 1e-3;
  fdtd::DomainSpec domain;
  fdtd::SourceSpec source;
  fdtd::SteadyStateParams steady;
  double distance_mm = 5;
  std::vector<double> distances_mm;
  std::vector<double> powers;
  std::vector<double> densities;
  double validity = 0.1;
  std::vector<double> thermal_powers;
  double power_w = 0.1;
  double duration = 7200;
  bioheat::ThermalParams thermal;
  std::string config_hash;
};

/// Canonical text of every key, sorted, one `key = value` per line.
inline std::string canonical_config(const Config &c) {
  std::string s;
  for (const auto &[k, v] : c.values())
    s += k + " = " + v + "\n";
  return s;
}

/// Reads and validates every key; `required` keys must be non-empty. All
/// problems are reported in one ConfigError.
inline Settings resolve_settings(const Config &c, const std::vector<std::string> &required = {}) {
  Settings s;
  Reader r(c);
  for (const auto &k : required)
    r.check(!c.raw(k).empty(), "missing required key '" + k + "'");
  const auto seed = r.integer("seed");
  r.check(seed >= 0, "key 'seed' must be >= 0");
  s.phantom.seed = static_cast<std::uint64_t>(seed);
  s.phantom_file = r.str("phantom_file");
  s.phantom.outer_radius = r.number("outer_radius_mm") * 1e-3;
  s.phantom.skin_thickness = r.number("skin_thickness_mm") * 1e-3;
  s.phantom.fibroglandular_fraction = r.number("fibroglandular_fraction");
  s.phantom.cluster_count = static_cast<int>(r.integer("cluster_count"));
  s.resolution = r.number("resolution_mm") * 1e-3;
  r.check(s.resolution > 0.0, "key 'resolution_mm' must be > 0");

  s.domain.frequency = r.number("frequency_ghz") * 1e9;
  s.domain.padding = static_cast<int>(r.integer("padding_cells"));
  s.domain.courant = r.number("courant");
  s.domain.pml.cells = static_cast<int>(r.integer("pml_cells"));
  s.domain.pml.order = static_cast<int>(r.integer("pml_order"));
  s.domain.pml.sigma_scale = r.number("pml_sigma_scale");
  s.domain.pml.kappa_max = r.number("pml_kappa_max");
  s.domain.pml.alpha_max = r.number("pml_alpha_max");

  try {
    s.source.kind = fdtd::source_kind_from_string(r.str("source"));
  } catch (const InvalidArgument &e) {
    r.check(false, std::string("key 'source': ") + e.what());
  }
  auto axis = [&](const char *key, Axis &out) {
    const auto &v = r.str(key);
    if (v.size() == 1 && std::string_view("xyzXYZ").find(v[0]) != std::string_view::npos)
      out = axis_from_char(v[0]);
    else
      r.check(false, std::string("key '") + key + "' must be x, y or z");
  };
  axis("source_axis", s.source.axis);
  axis("polarization", s.source.polarization);
  const auto &side = r.str("source_side");
  r.check(side == "+" || side == "-", "key 'source_side' must be + or -");
  s.source.side = side == "-" ? -1 : 1;
  s.distance_mm = r.number("distance_mm");
  s.source.distance = s.distance_mm * 1e-3;
  s.source.patch_edge = r.number("patch_edge_mm") * 1e-3;
  s.source.steering_deg = r.number("steering_deg");
  s.source.target_gain_db = r.number("target_gain_db");
  s.source.ramp_periods = r.number("ramp_periods");

  s.steady.tolerance = r.number("tolerance");
  s.steady.max_periods = static_cast<int>(r.integer("max_periods"));
  s.steady.window_periods = static_cast<int>(r.integer("window_periods"));
  s.steady.ramp_periods = s.source.ramp_periods;

  s.distances_mm = r.list("distances_mm");
  r.check(!s.distances_mm.empty() || r.failed("distances_mm"), "key 'distances_mm' must list at least one distance");
  for (double d : s.distances_mm)
    r.check(d > 0.0, "key 'distances_mm': distances must be > 0");

  auto watts = r.list("powers_w");
  for (double p : watts)
    r.check(p > 0.0, "key 'powers_w': powers must be > 0");
  for (double dbm : r.list("powers_dbm"))
    watts.push_back(dbm_to_watts(dbm));
  std::sort(watts.begin(), watts.end());
  for (double p : watts)
    if (s.powers.empty() || std::abs(p - s.powers.back()) > 1e-12 * p)
      s.powers.push_back(p);
  r.check(!s.powers.empty() || r.failed("powers_w") || r.failed("powers_dbm"), "keys 'powers_w' and 'powers_dbm' list no power");

  s.densities = r.list("densities");
  r.check(!s.densities.empty() || r.failed("densities"), "key 'densities' must list at least one fraction");
  for (double d : s.densities)
    r.check(d >= 0.0 && d <= 1.0, "key 'densities': fractions must lie in [0, 1]");
  r.check(s.phantom_file.empty() || !c.is_set("densities"),
          "key 'densities' cannot be combined with 'phantom_file' (the file fixes the density)");

  s.validity = r.number("validity_fraction");
  r.check(s.validity >= 0.0 && s.validity <= 1.0, "key 'validity_fraction' must lie in [0, 1]");
  s.thermal_powers = r.list("thermal_powers_w");
  s.power_w = r.number("power_w");
  r.check(s.power_w > 0.0, "key 'power_w' must be > 0");
  s.duration = r.number("duration_s");
  r.check(s.duration >= 0.0, "key 'duration_s' must be >= 0");
  try {
    s.thermal.boundary = bioheat::boundary_from_string(r.str("thermal_boundary"));
  } catch (const InvalidArgument &e) {
    r.check(false, std::string("key 'thermal_boundary': ") + e.what());
  }
  s.thermal.convection_h = r.number("convection_h");
  s.thermal.ambient = r.number("ambient_k");
  s.thermal.blood_temperature = r.number("blood_temperature_k");
  s.thermal.blood_density = r.number("blood_density");
  s.thermal.blood_specific_heat = r.number("blood_specific_heat");
  s.thermal.dt = r.number("thermal_dt_s");

  // Range checks on the typed values; skipped if any value failed to parse.
  auto collect = [&](auto &&fn) {
    try {
      fn();
    } catch (const InvalidArgument &e) {
      r.check(false, e.what());
    }
  };
  if (!r.failed()) {
    collect([&] { s.phantom.validate(); });
    collect([&] { s.domain.validate(); });
    collect([&] { s.source.validate(); });
    collect([&] { s.steady.validate(); });
    collect([&] { s.thermal.validate(); });
  }
  r.finish();

  const auto &mf = r.str("materials_file");
  s.table = mf.empty() ? default_materials() : load_material_table(mf);
  s.config_hash = fnv1a_hex(canonical_config(c));
  return s;
}

/// Generated phantom at fibroglandular fraction `density`, or the phantom file.
inline VoxelPhantom make_phantom(const Settings &s, std::optional<double> density = std::nullopt) {
  if (!s.phantom_file.empty())
    return load_phantom(s.phantom_file);
  PhantomSpec spec = s.phantom;
  if (density)
    spec.fibroglandular_fraction = *density;
  return generate_phantom(spec, s.resolution, s.table);
}

/// Density label of a phantom: the requested fraction if recorded, else the
/// measured fibroglandular share.
inline double phantom_density(const VoxelPhantom &ph) {
  if (auto it = ph.meta.find("fibroglandular_fraction"); it != ph.meta.end())
    if (auto v = text::parse_double(it->second))
      return *v;
  return fibroglandular_share(ph);
}

/// SAR fields at 1 W radiated power; any other power is an exact rescale.
struct UnitSar {
  sar::SarField point, avg_1g, avg_10g;
  bool converged = false;
};

inline UnitSar unit_sar(const fdtd::PhasorField &field, const VoxelPhantom &ph, double validity) {
  UnitSar u;
  const auto cal = fdtd::calibrate_power(field, 1.0);
  u.converged = field.converged;
  u.point = sar::point_sar(cal, ph, {false, true});
  u.avg_1g = sar::mass_averaged_sar(u.point, ph, 1e-3, validity);
  u.avg_10g = sar::mass_averaged_sar(u.point, ph, 10e-3, validity);
  return u;
}

struct SweepRow {
  double distance_mm = 0;
  double power_w = 0;
  double density = 0;
  double peak_point = 0, peak_1g = 0, peak_10g = 0;
  sar::ComplianceReport verdict;
  bool converged = false;
  std::optional<double> peak_delta_t;
};

inline bool is_thermal_power(const Settings &s, double p) {
  return std::any_of(s.thermal_powers.begin(), s.thermal_powers.end(),
                     [p](double t) { return std::abs(t - p) <= 1e-12 * p; });
}

inline SweepRow make_row(const Settings &s, const UnitSar &u, const VoxelPhantom &ph, double distance_mm,
                         double density, double power) {
  SweepRow row;
  row.distance_mm = distance_mm;
  row.power_w = power;
  row.density = density;
  row.peak_point = u.point.peak.value * power;
  row.peak_1g = u.avg_1g.peak.value * power;
  row.peak_10g = u.avg_10g.peak.value * power;
  row.verdict = sar::compliance(row.peak_1g, row.peak_10g);
  row.converged = u.converged;
  if (is_thermal_power(s, power)) {
    std::vector<double> field(u.point.values.size());
    for (std::size_t n = 0; n < field.size(); ++n)
      field[n] = u.point.values[n] * power;
    row.peak_delta_t = bioheat::run_exposure(ph, field, s.duration, s.thermal).peak_rise;
  }
  return row;
}

inline std::vector<SweepRow> power_rows(const Settings &s, const UnitSar &u, const VoxelPhantom &ph,
                                        double distance_mm, double density) {
  std::vector<SweepRow> rows;
  for (double p : s.powers)
    rows.push_back(make_row(s, u, ph, distance_mm, density, p));
  return rows;
}

inline constexpr const char *csv_columns =
    "distance_mm,power_w,density,peak_point_sar_w_per_kg,peak_1g_sar_w_per_kg,peak_10g_sar_w_per_kg,"
    "verdict_1g,verdict_10g,margin_1g_w_per_kg,margin_10g_w_per_kg,converged,peak_delta_t_k";

inline void write_provenance(std::ostream &out, const std::string &command, const Config &c) {
  out << "# voxsar " << VOXSAR_VERSION << '\n';
  out << "# command " << command << '\n';
  out << "# config_hash " << fnv1a_hex(canonical_config(c)) << '\n';
  for (const auto &[k, v] : c.values())
    out << "# " << k << " = " << v << '\n';
}

inline void write_row(std::ostream &out, const SweepRow &r) {
  using text::exact;
  out << exact(r.distance_mm) << ',' << exact(r.power_w) << ',' << exact(r.density) << ',' << exact(r.peak_point)
      << ',' << exact(r.peak_1g) << ',' << exact(r.peak_10g) << ',' << (r.verdict.pass_1g ? "pass" : "fail") << ','
      << (r.verdict.pass_10g ? "pass" : "fail") << ',' << exact(r.verdict.margin_1g()) << ','
      << exact(r.verdict.margin_10g()) << ',' << (r.converged ? "true" : "false") << ',';
  if (r.peak_delta_t)
    out << exact(*r.peak_delta_t);
  out << '\n';
}

/// Progress callback: (distance_mm, density, periods, converged).
using SolveLog = std::function<void(double, double, int, bool)>;

inline fdtd::SimulationResult solve_at(const Settings &s, const VoxelPhantom &ph, double distance_mm) {
  fdtd::SourceSpec src = s.source;
  src.distance = distance_mm * 1e-3;
  return fdtd::simulate(ph, s.domain, src, s.steady);
}

/// Rows in distance-major, power, density order.
inline std::vector<SweepRow> run_sweep(const Settings &s, const SolveLog &log = {}) {
  std::vector<VoxelPhantom> phantoms;
  std::vector<double> labels;
  if (!s.phantom_file.empty()) {
    phantoms.push_back(load_phantom(s.phantom_file));
    labels.push_back(phantom_density(phantoms.back()));
  } else {
    for (double d : s.densities) {
      phantoms.push_back(make_phantom(s, d));
      labels.push_back(phantom_density(phantoms.back()));
    }
  }
  std::vector<SweepRow> rows;
  for (double dist : s.distances_mm) {
    std::vector<std::vector<SweepRow>> per_density;
    for (std::size_t n = 0; n < phantoms.size(); ++n) {
      const auto sim = solve_at(s, phantoms[n], dist);
      if (log)
        log(dist, labels[n], sim.field.periods, sim.field.converged);
      const auto u = unit_sar(sim.field, phantoms[n], s.validity);
      per_density.push_back(power_rows(s, u, phantoms[n], dist, labels[n]));
    }
    for (std::size_t p = 0; p < s.powers.size(); ++p)
      for (const auto &block : per_density)
        rows.push_back(block[p]);
  }
  return rows;
}

} // namespace voxsar::cli
