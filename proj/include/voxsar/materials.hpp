#pragma once

// Tissue property records and frequency-domain dielectric models.
//
// Time convention throughout the library is e^{+i omega t}: a lossy medium
// has a negative imaginary relative permittivity.

#include <complex>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "voxsar/common.hpp"
#include "voxsar/text.hpp"

namespace voxsar {

/// Single-pole Debye / Cole-Cole relaxation with static conductivity.
///
/// eps*(w) = eps_inf + delta_eps / (1 + (i w tau)^(1 - alpha)) + sigma_s / (i w eps0)
///
/// The relaxation time is kept in picoseconds, which is also the unit used by
/// the material table and phantom file formats (so text round trips are exact).
struct DispersiveModel {
  double eps_inf = 1.0;
  double delta_eps = 0.0;
  double tau_ps = 0.0;
  double alpha = 0.0;
  double sigma_s = 0.0; // S/m

  double tau() const noexcept { return tau_ps * 1e-12; }
  bool is_debye() const noexcept { return alpha == 0.0; }
  bool has_pole() const noexcept { return delta_eps > 0.0; }

  void validate() const {
    require(std::isfinite(eps_inf) && eps_inf >= 1.0, "eps_inf must be >= 1");
    require(std::isfinite(delta_eps) && delta_eps >= 0.0, "delta_eps must be >= 0");
    require(std::isfinite(tau_ps) && (delta_eps == 0.0 || tau_ps > 0.0),
            "tau must be > 0 when delta_eps > 0");
    require(std::isfinite(alpha) && alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
    require(std::isfinite(sigma_s) && sigma_s >= 0.0, "sigma_s must be >= 0");
  }

  friend bool operator==(const DispersiveModel &, const DispersiveModel &) = default;
};

struct Material {
  std::string name;
  DispersiveModel dispersive;
  double density = 1000.0;           // kg/m^3
  double thermal_conductivity = 0.0; // W/(m K)
  double specific_heat = 4000.0;     // J/(kg K)
  double perfusion_rate = 0.0;       // 1/s
  double metabolic_heat = 0.0;       // W/m^3

  void validate() const {
    require(!name.empty() && name.find_first_of(" \t\r\n#") == std::string::npos,
            "material name must be a non-empty token");
    dispersive.validate();
    require(std::isfinite(density) && density > 0.0, "density must be > 0 (" + name + ")");
    require(std::isfinite(specific_heat) && specific_heat > 0.0, "specific heat must be > 0 (" + name + ")");
    require(std::isfinite(thermal_conductivity) && thermal_conductivity >= 0.0,
            "thermal conductivity must be >= 0 (" + name + ")");
    require(std::isfinite(perfusion_rate) && perfusion_rate >= 0.0, "perfusion must be >= 0 (" + name + ")");
    require(std::isfinite(metabolic_heat) && metabolic_heat >= 0.0, "metabolic heat must be >= 0 (" + name + ")");
  }

  friend bool operator==(const Material &, const Material &) = default;
};

/// Complex relative permittivity at `frequency` (Hz).
inline std::complex<double> evaluate_permittivity(const DispersiveModel &model, double frequency) {
  require(std::isfinite(frequency) && frequency > 0.0, "frequency must be > 0");
  using namespace std::complex_literals;
  const double omega = 2.0 * constants::pi * frequency;
  std::complex<double> eps = model.eps_inf;
  if (model.delta_eps > 0.0) {
    const std::complex<double> iwt = 1i * (omega * model.tau());
    eps += model.delta_eps / (1.0 + (model.alpha == 0.0 ? iwt : std::pow(iwt, 1.0 - model.alpha)));
  }
  eps += model.sigma_s / (1i * omega * constants::eps0);
  return eps;
}

/// Conductivity that reproduces the total loss at `frequency`:
/// sigma_s - w eps0 Im[relaxation term].
inline double effective_conductivity(const DispersiveModel &model, double frequency) {
  require(std::isfinite(frequency) && frequency > 0.0, "frequency must be > 0");
  if (model.delta_eps == 0.0)
    return model.sigma_s;
  using namespace std::complex_literals;
  const double omega = 2.0 * constants::pi * frequency;
  const std::complex<double> iwt = 1i * (omega * model.tau());
  const auto relax = model.delta_eps / (1.0 + (model.alpha == 0.0 ? iwt : std::pow(iwt, 1.0 - model.alpha)));
  return model.sigma_s - omega * constants::eps0 * relax.imag();
}

/// Ordered material list; a voxel ID is an index into it. ID 0 is background.
struct MaterialTable {
  std::vector<Material> materials;

  std::size_t size() const noexcept { return materials.size(); }
  const Material &operator[](std::size_t id) const { return materials.at(id); }

  std::optional<std::uint8_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < materials.size(); ++i)
      if (materials[i].name == name)
        return static_cast<std::uint8_t>(i);
    return std::nullopt;
  }

  std::uint8_t id_of(std::string_view name) const {
    auto id = find(name);
    if (!id)
      throw InvalidArgument("material '" + std::string(name) + "' is not in the table");
    return *id;
  }

  void validate() const {
    require(!materials.empty(), "material table is empty");
    require(materials.size() <= 256, "at most 256 materials fit one-byte voxel IDs");
    for (const auto &m : materials)
      m.validate();
  }

  friend bool operator==(const MaterialTable &, const MaterialTable &) = default;
};

/// Literature-typical breast tissue values. These are placeholders for
/// users to replace with their own parameter set; nothing downstream is
/// calibrated against them.
inline MaterialTable default_materials() {
  auto mk = [](std::string name, DispersiveModel d, double rho, double k, double c, double wb, double qm) {
    return Material{std::move(name), d, rho, k, c, wb, qm};
  };
  return MaterialTable{{
      mk("air", {1.0, 0.0, 0.0, 0.0, 0.0}, 1.204, 0.0262, 1006.0, 0.0, 0.0),
      mk("skin", {15.93, 23.83, 13.0, 0.0, 0.831}, 1109.0, 0.37, 3391.0, 1.96e-3, 0.0),
      mk("adipose", {3.140, 1.708, 13.0, 0.0, 0.036}, 911.0, 0.21, 2348.0, 7.1e-4, 0.0),
      mk("fibroglandular", {6.151, 48.26, 13.0, 0.0, 0.809}, 1041.0, 0.33, 2960.0, 2.6e-3, 0.0),
      mk("abs", {3.5, 0.0, 0.0, 0.0, 0.0}, 1040.0, 0.17, 1400.0, 0.0, 0.0),
      mk("gelatin_water", {5.5, 55.0, 10.0, 0.0, 0.9}, 1050.0, 0.5, 3800.0, 0.0, 0.0),
  }};
}

namespace detail {

inline Material parse_material_fields(const std::vector<std::string_view> &f, const std::string &where) {
  if (f.size() != 11)
    throw InvalidArgument(where + ": expected 11 fields, got " + std::to_string(f.size()));
  double v[10];
  for (int i = 0; i < 10; ++i) {
    auto p = text::parse_double(f[i + 1]);
    if (!p)
      throw InvalidArgument(where + ": field " + std::to_string(i + 2) + " is not a number");
    v[i] = *p;
  }
  Material m{std::string(f[0]), {v[0], v[1], v[2], v[3], v[4]}, v[5], v[6], v[7], v[8], v[9]};
  try {
    m.validate();
  } catch (const InvalidArgument &e) {
    throw InvalidArgument(where + ": " + e.what());
  }
  return m;
}

inline std::string format_material(const Material &m) {
  using text::exact;
  const auto &d = m.dispersive;
  return m.name + ' ' + exact(d.eps_inf) + ' ' + exact(d.delta_eps) + ' ' + exact(d.tau_ps) + ' ' +
         exact(d.alpha) + ' ' + exact(d.sigma_s) + ' ' + exact(m.density) + ' ' +
         exact(m.thermal_conductivity) + ' ' + exact(m.specific_heat) + ' ' + exact(m.perfusion_rate) +
         ' ' + exact(m.metabolic_heat);
}

} // namespace detail

/// Reads the line-oriented table: one material per line,
/// `name eps_inf delta_eps tau_ps alpha sigma_s density k C perfusion Q_m`.
inline MaterialTable parse_material_table(std::istream &in) {
  MaterialTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (auto hash = sv.find('#'); hash != std::string_view::npos)
      sv = sv.substr(0, hash);
    auto fields = text::split_ws(sv);
    if (fields.empty())
      continue;
    table.materials.push_back(detail::parse_material_fields(fields, "line " + std::to_string(lineno)));
  }
  table.validate();
  return table;
}

inline MaterialTable load_material_table(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open material table '" + path + "'");
  return parse_material_table(in);
}

inline std::string format_material_table(const MaterialTable &table) {
  std::ostringstream out;
  out << "# name eps_inf delta_eps tau_ps alpha sigma_s density k C perfusion Q_m\n";
  for (const auto &m : table.materials)
    out << detail::format_material(m) << '\n';
  return out.str();
}

} // namespace voxsar
