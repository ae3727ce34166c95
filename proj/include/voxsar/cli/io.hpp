#pragma once

// Stage hand-off files: cropped E phasors between simulate and sar, and
// float32 field dumps that follow the phantom payload layout.

#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "voxsar/fdtd/phasor.hpp"
#include "voxsar/text.hpp"

namespace voxsar::cli {

inline constexpr std::string_view phasor_magic = "VOXSAR-PHASOR 1";
inline constexpr std::string_view field_magic = "VOXSAR-FIELD 1";

struct PhasorFile {
  fdtd::PhasorField field;
  std::map<std::string, std::string> meta;
};

inline void write_phasors(const std::string &path, const PhasorFile &pf) {
  const auto &f = pf.field;
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write phasor file '" + path + "'");
  using text::exact;
  out << phasor_magic << '\n';
  out << "dims " << f.dims.nx << ' ' << f.dims.ny << ' ' << f.dims.nz << '\n';
  out << "origin " << f.origin.i << ' ' << f.origin.j << ' ' << f.origin.k << '\n';
  out << "phantom_offset " << f.phantom_offset.i << ' ' << f.phantom_offset.j << ' ' << f.phantom_offset.k << '\n';
  out << "spacing_m " << exact(f.spacing) << '\n';
  out << "frequency_hz " << exact(f.frequency) << '\n';
  out << "dt_s " << exact(f.dt) << '\n';
  out << "converged " << (f.converged ? 1 : 0) << '\n';
  out << "calibrated " << (f.calibrated ? 1 : 0) << '\n';
  out << "radiated_power_w " << exact(f.radiated_power) << '\n';
  out << "scale " << exact(f.scale) << '\n';
  out << "periods " << f.periods << '\n';
  for (const auto &[k, v] : pf.meta)
    out << "meta " << k << ' ' << v << '\n';
  out << '\n';
  for (int c = 0; c < 3; ++c)
    out.write(reinterpret_cast<const char *>(f.e[c].data()),
              static_cast<std::streamsize>(f.e[c].size() * sizeof(fdtd::cplx)));
  if (!out)
    throw Error("failed writing phasor file '" + path + "'");
}

inline PhasorFile read_phasors(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open phasor file '" + path + "'");
  auto fail = [&](const std::string &why) { return Error("phasor file '" + path + "': " + why); };
  std::string line;
  if (!std::getline(in, line) || line != phasor_magic)
    throw fail("bad magic line");
  PhasorFile pf;
  auto &f = pf.field;
  std::map<std::string, std::vector<std::string>> h;
  while (std::getline(in, line) && !text::trim(line).empty()) {
    auto parts = text::split_ws(line);
    if (parts.empty())
      continue;
    if (parts[0] == "meta") {
      if (parts.size() != 3)
        throw fail("bad meta line");
      pf.meta[std::string(parts[1])] = std::string(parts[2]);
      continue;
    }
    std::vector<std::string> v(parts.begin() + 1, parts.end());
    h[std::string(parts[0])] = v;
  }
  auto ints = [&](const char *key, int n) {
    auto it = h.find(key);
    if (it == h.end() || static_cast<int>(it->second.size()) != n)
      throw fail(std::string("missing or malformed '") + key + "'");
    std::vector<int> out;
    for (const auto &s : it->second) {
      auto v = text::parse_int(s);
      if (!v)
        throw fail(std::string("bad integer in '") + key + "'");
      out.push_back(static_cast<int>(*v));
    }
    return out;
  };
  auto num = [&](const char *key) {
    auto it = h.find(key);
    std::optional<double> v;
    if (it == h.end() || it->second.size() != 1 || !(v = text::parse_double(it->second[0])))
      throw fail(std::string("missing or malformed '") + key + "'");
    return *v;
  };
  auto d = ints("dims", 3);
  auto o = ints("origin", 3);
  auto p = ints("phantom_offset", 3);
  if (d[0] < 1 || d[1] < 1 || d[2] < 1)
    throw fail("dims must be >= 1");
  f.dims = {d[0], d[1], d[2]};
  f.origin = {o[0], o[1], o[2]};
  f.phantom_offset = {p[0], p[1], p[2]};
  f.spacing = num("spacing_m");
  f.frequency = num("frequency_hz");
  f.dt = num("dt_s");
  f.converged = ints("converged", 1)[0] != 0;
  f.calibrated = ints("calibrated", 1)[0] != 0;
  f.radiated_power = num("radiated_power_w");
  f.scale = num("scale");
  f.periods = ints("periods", 1)[0];
  for (int c = 0; c < 3; ++c) {
    f.e[c].resize(f.dims.size());
    const auto bytes = static_cast<std::streamsize>(f.e[c].size() * sizeof(fdtd::cplx));
    in.read(reinterpret_cast<char *>(f.e[c].data()), bytes);
    if (in.gcount() != bytes)
      throw fail("payload truncated");
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw fail("unexpected bytes after payload");
  return pf;
}

/// Scalar field on the phantom grid as float32, x fastest.
inline void write_field(const std::string &path, const Extent3 &dims, double resolution, const std::string &quantity,
                        const std::string &unit, const std::vector<double> &values) {
  require(values.size() == dims.size(), "field size does not match dims");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write field file '" + path + "'");
  out << field_magic << '\n';
  out << "dims " << dims.nx << ' ' << dims.ny << ' ' << dims.nz << '\n';
  out << "resolution_m " << text::exact(resolution) << '\n';
  out << "quantity " << quantity << '\n';
  out << "unit " << unit << '\n';
  out << '\n';
  std::vector<float> buf(values.begin(), values.end());
  out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out)
    throw Error("failed writing field file '" + path + "'");
}

} // namespace voxsar::cli
