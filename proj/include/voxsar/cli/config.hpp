#pragma once

// key = value run configuration. Every key the tools understand is listed in
// config_keys() with its default; anything else is rejected.

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "voxsar/common.hpp"
#include "voxsar/text.hpp"

namespace voxsar::cli {

/// Configuration problems, all of them at once.
class ConfigError : public Error {
public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string> &problems() const noexcept { return problems_; }

private:
  static std::string join(const std::vector<std::string> &p) {
    std::string s;
    for (const auto &m : p)
      s += (s.empty() ? "" : "; ") + m;
    return s;
  }
  std::vector<std::string> problems_;
};

struct KeyInfo {
  const char *name;
  const char *fallback; // default value text; "" means unset
  const char *help;
};

inline const std::vector<KeyInfo> &config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"seed", "12345", "phantom generator seed"},
      {"materials_file", "", "material table; built-in table when unset"},
      {"phantom_file", "", "input phantom; generated from the phantom keys when unset"},
      {"phasor_file", "", "phasor file written by simulate"},
      {"outer_radius_mm", "40", "hemisphere radius"},
      {"skin_thickness_mm", "2", "skin shell thickness"},
      {"fibroglandular_fraction", "0.3", "fibroglandular share of the interior"},
      {"cluster_count", "8", "number of fibroglandular clusters"},
      {"resolution_mm", "1", "voxel edge"},
      {"frequency_ghz", "6", "CW excitation frequency"},
      {"source", "patch", "patch or dipole"},
      {"distance_mm", "5", "apex-to-source separation for simulate"},
      {"source_axis", "z", "separation axis"},
      {"source_side", "+", "+ or -: source beyond the high or low phantom face"},
      {"polarization", "x", "source current direction"},
      {"patch_edge_mm", "0", "patch edge; 0 sizes it from target_gain_db"},
      {"steering_deg", "45", "patch beam steering angle"},
      {"target_gain_db", "3.53", "patch peak directivity in dBi"},
      {"ramp_periods", "3", "source ramp length"},
      {"padding_cells", "14", "free-space cells around the phantom, PML included"},
      {"pml_cells", "10", "CPML thickness"},
      {"pml_order", "3", "CPML grading order"},
      {"pml_sigma_scale", "0.8", "CPML sigma_max relative to the optimum"},
      {"pml_kappa_max", "5", "CPML kappa_max"},
      {"pml_alpha_max", "0.05", "CPML alpha_max (S/m)"},
      {"courant", "0.5", "fraction of the 3-D Courant limit"},
      {"tolerance", "1e-3", "steady-state relative tolerance per period"},
      {"max_periods", "200", "period cap before the DFT window"},
      {"window_periods", "4", "DFT window length in periods"},
      {"distances_mm", "5,10,15,20,25,30", "sweep distances"},
      {"powers_w", "0.001,0.005,0.01,0.05,0.1,0.5", "radiated powers in W"},
      {"powers_dbm", "0,2,4,6,8,10", "radiated powers in dBm (merged with powers_w)"},
      {"densities", "0.3", "fibroglandular fractions swept"},
      {"validity_fraction", "0.1", "minimum tissue fraction of an averaging cube"},
      {"thermal_powers_w", "", "powers (from the power list) that also get a bioheat run"},
      {"power_w", "0.1", "radiated power for the bioheat subcommand"},
      {"duration_s", "7200", "exposure duration"},
      {"thermal_boundary", "insulated", "insulated or convective"},
      {"convection_h", "10", "tissue-air heat transfer coefficient (W/m^2/K)"},
      {"ambient_k", "296.15", "ambient temperature"},
      {"blood_temperature_k", "310", "arterial blood temperature"},
      {"blood_density", "1050", "blood density"},
      {"blood_specific_heat", "3617", "blood specific heat"},
      {"thermal_dt_s", "0", "bioheat time step; 0 = automatic"},
      {"sar_file", "", "optional point-SAR field dump"},
      {"temperature_file", "", "optional temperature field dump"},
  };
  return keys;
}

inline const KeyInfo *find_key(std::string_view name) {
  for (const auto &k : config_keys())
    if (name == k.name)
      return &k;
  return nullptr;
}

class Config {
public:
  Config() {
    for (const auto &k : config_keys())
      values_[k.name] = k.fallback;
  }

  /// Parses `key = value` lines ('#' starts a comment). Unknown keys,
  /// malformed lines and duplicates are collected and thrown together.
  void merge_text(std::string_view text, const std::string &origin) {
    std::vector<std::string> problems;
    std::set<std::string> seen;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos)
        end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = text::trim(line);
      if (line.empty())
        continue;
      const std::string where = origin + ":" + std::to_string(lineno);
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        problems.push_back(where + ": expected key = value");
        continue;
      }
      const std::string key(text::trim(line.substr(0, eq)));
      const std::string value(text::trim(line.substr(eq + 1)));
      if (!find_key(key)) {
        problems.push_back(where + ": unknown key '" + key + "'");
        continue;
      }
      if (!seen.insert(key).second) {
        problems.push_back(where + ": duplicate key '" + key + "'");
        continue;
      }
      set(key, value);
    }
    if (!problems.empty())
      throw ConfigError(std::move(problems));
  }

  void merge_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    merge_text(buf.str(), path);
  }

  /// Applies `key=value` overrides, reporting every unknown key at once.
  void merge_overrides(const std::vector<std::string> &items) {
    std::vector<std::string> problems;
    for (const auto &item : items) {
      const auto eq = item.find('=');
      const std::string key(text::trim(std::string_view(item).substr(0, eq)));
      if (eq == std::string::npos)
        problems.push_back("override '" + item + "': expected key=value");
      else if (!find_key(key))
        problems.push_back("override: unknown key '" + key + "'");
      else
        set(key, std::string(text::trim(std::string_view(item).substr(eq + 1))));
    }
    if (!problems.empty())
      throw ConfigError(std::move(problems));
  }

  void set(const std::string &key, std::string value) {
    if (!find_key(key))
      throw ConfigError({"unknown key '" + key + "'"});
    values_[key] = std::move(value);
    explicit_.insert(key);
  }

  bool is_set(const std::string &key) const { return explicit_.count(key) > 0; }
  const std::string &raw(const std::string &key) const { return values_.at(key); }
  const std::map<std::string, std::string> &values() const noexcept { return values_; }

  /// Throws listing every key in `keys` that has no value.
  void require_keys(const std::vector<std::string> &keys) const {
    std::vector<std::string> missing;
    for (const auto &k : keys)
      if (raw(k).empty())
        missing.push_back("missing required key '" + k + "'");
    if (!missing.empty())
      throw ConfigError(std::move(missing));
  }

private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

/// Typed view over a Config that records bad values instead of throwing at
/// the first one; call finish() once all fields are read.
class Reader {
public:
  explicit Reader(const Config &c) : c_(c) {}

  double number(const std::string &key) {
    auto v = text::parse_double(c_.raw(key));
    if (!v || !std::isfinite(*v)) {
      bad(key, "a number");
      return 0.0;
    }
    return *v;
  }

  long long integer(const std::string &key) {
    auto v = text::parse_int(c_.raw(key));
    if (!v) {
      bad(key, "an integer");
      return 0;
    }
    return *v;
  }

  std::vector<double> list(const std::string &key) {
    std::vector<double> out;
    if (text::trim(c_.raw(key)).empty())
      return out;
    for (auto item : text::split(c_.raw(key), ',')) {
      auto v = text::parse_double(item);
      if (!v || !std::isfinite(*v)) {
        bad(key, "a comma-separated list of numbers");
        return {};
      }
      out.push_back(*v);
    }
    return out;
  }

  const std::string &str(const std::string &key) { return c_.raw(key); }

  void check(bool ok, const std::string &message) {
    if (!ok)
      problems_.push_back(message);
  }

  /// True if the value of `key` (or of any key, when empty) did not parse.
  bool failed(const std::string &key = {}) const { return key.empty() ? !failed_.empty() : failed_.count(key) > 0; }

  void finish() {
    if (!problems_.empty())
      throw ConfigError(std::move(problems_));
  }

private:
  void bad(const std::string &key, const char *what) {
    failed_.insert(key);
    problems_.push_back("key '" + key + "': '" + c_.raw(key) + "' is not " + what);
  }

  const Config &c_;
  std::vector<std::string> problems_;
  std::set<std::string> failed_;
};

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace voxsar::cli
