#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "voxsar/common.hpp"
#include "voxsar/materials.hpp"
#include "voxsar/text.hpp"

namespace voxsar {

/// Dense voxel grid of one-byte material IDs, x fastest. ID 0 is free space.
struct VoxelPhantom {
  Extent3 dims;
  double resolution = 1e-3; // voxel edge, m
  std::vector<std::uint8_t> voxels;
  MaterialTable materials;
  /// Free-form provenance carried through the file format (e.g. the
  /// requested fibroglandular fraction of a generated phantom).
  std::map<std::string, std::string> meta;

  std::uint8_t at(int i, int j, int k) const { return voxels[dims.index(i, j, k)]; }
  std::uint8_t &at(int i, int j, int k) { return voxels[dims.index(i, j, k)]; }
  const Material &material_at(std::size_t linear) const { return materials.materials[voxels[linear]]; }
  double voxel_volume() const noexcept { return resolution * resolution * resolution; }

  void validate() const {
    require(dims.nx >= 1 && dims.ny >= 1 && dims.nz >= 1, "phantom dims must be >= 1");
    require(std::isfinite(resolution) && resolution > 0.0, "phantom resolution must be > 0");
    require(voxels.size() == dims.size(), "voxel array length does not match dims");
    materials.validate();
    for (auto id : voxels)
      require(id < materials.size(), "voxel ID " + std::to_string(id) + " has no material");
  }

  std::size_t count(std::uint8_t id) const {
    return static_cast<std::size_t>(std::count(voxels.begin(), voxels.end(), id));
  }

  friend bool operator==(const VoxelPhantom &, const VoxelPhantom &) = default;
};

/// Parameters of the procedural hemispherical breast.
struct PhantomSpec {
  double outer_radius = 0.04;        // m
  double skin_thickness = 0.002;     // m
  double fibroglandular_fraction = 0.3;
  int cluster_count = 8;
  std::uint64_t seed = 12345;

  void validate() const {
    require(std::isfinite(outer_radius) && outer_radius > 0.0, "outer radius must be > 0");
    require(std::isfinite(skin_thickness) && skin_thickness >= 0.0 && skin_thickness < outer_radius,
            "skin thickness must lie in [0, outer radius)");
    require(fibroglandular_fraction >= 0.0 && fibroglandular_fraction <= 1.0,
            "fibroglandular fraction must lie in [0, 1]");
    require(cluster_count >= 0, "cluster count must be >= 0");
  }
};

/// The requested fraction cannot be produced by the given clusters.
class UnreachableFraction : public Error {
public:
  using Error::Error;
};

namespace detail {

/// Uniform double in [0, 1) with 53 random bits; platform independent,
/// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Ellipsoid {
  std::array<double, 3> center;
  std::array<double, 3> inv_axes;
  std::array<std::array<double, 3>, 3> rot; // rows are the body axes
};

inline std::array<std::array<double, 3>, 3> random_rotation(std::mt19937_64 &rng) {
  // Uniform unit quaternion (Shoemake).
  const double u1 = uniform01(rng), u2 = uniform01(rng), u3 = uniform01(rng);
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2 * constants::pi * u2), x = a * std::cos(2 * constants::pi * u2);
  const double y = b * std::sin(2 * constants::pi * u3), z = b * std::cos(2 * constants::pi * u3);
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

} // namespace detail

/// Hemispherical breast resting on a chest-wall plane at the low-z face.
/// Skin shell of the given thickness, adipose interior, and fibroglandular
/// clusters grown from `cluster_count` random ellipsoids until exactly the
/// requested share of interior voxels is glandular.
inline VoxelPhantom generate_phantom(const PhantomSpec &spec, double resolution,
                                     const MaterialTable &table = default_materials()) {
  spec.validate();
  require(std::isfinite(resolution) && resolution > 0.0, "resolution must be > 0");
  table.validate();
  const auto skin = table.id_of("skin");
  const auto adipose = table.id_of("adipose");
  const auto gland = table.id_of("fibroglandular");

  const double R = spec.outer_radius;
  const int nxy = std::max(1, static_cast<int>(std::ceil(2.0 * R / resolution - 1e-9)));
  const int nz = std::max(1, static_cast<int>(std::ceil(R / resolution - 1e-9)));
  VoxelPhantom ph;
  ph.dims = {nxy, nxy, nz};
  ph.resolution = resolution;
  ph.voxels.assign(ph.dims.size(), 0);
  ph.materials = table;
  ph.meta["fibroglandular_fraction"] = text::exact(spec.fibroglandular_fraction);

  const double cx = 0.5 * nxy * resolution, cy = cx;
  std::vector<std::size_t> interior;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < nxy; ++j)
      for (int i = 0; i < nxy; ++i) {
        const double x = (i + 0.5) * resolution - cx, y = (j + 0.5) * resolution - cy, z = (k + 0.5) * resolution;
        const double r = std::sqrt(x * x + y * y + z * z);
        if (r > R)
          continue;
        const auto idx = ph.dims.index(i, j, k);
        if (r > R - spec.skin_thickness) {
          ph.voxels[idx] = skin;
        } else {
          ph.voxels[idx] = adipose;
          interior.push_back(idx);
        }
      }

  const double f = spec.fibroglandular_fraction;
  const auto target = static_cast<std::size_t>(std::llround(f * static_cast<double>(interior.size())));
  if (target == 0)
    return ph;
  if (target == interior.size()) {
    for (auto idx : interior)
      ph.voxels[idx] = gland;
    return ph;
  }
  if (spec.cluster_count == 0)
    throw UnreachableFraction("fibroglandular fraction " + text::exact(f) + " needs at least one cluster");

  std::mt19937_64 rng(spec.seed);
  std::vector<detail::Ellipsoid> clusters;
  for (int c = 0; c < spec.cluster_count; ++c) {
    const auto seed_voxel = interior[static_cast<std::size_t>(detail::uniform01(rng) * interior.size())];
    const int i = static_cast<int>(seed_voxel % nxy);
    const int j = static_cast<int>((seed_voxel / nxy) % nxy);
    const int k = static_cast<int>(seed_voxel / (static_cast<std::size_t>(nxy) * nxy));
    detail::Ellipsoid e;
    e.center = {(i + 0.5) * resolution, (j + 0.5) * resolution, (k + 0.5) * resolution};
    for (auto &a : e.inv_axes)
      a = 1.0 / (0.5 + detail::uniform01(rng));
    e.rot = detail::random_rotation(rng);
    clusters.push_back(e);
  }

  // Growing every ellipsoid by a common scale s covers voxel v once
  // s >= min_c d_c(v); taking the `target` smallest distances is the union
  // at the scale that hits the fraction exactly (ties broken by voxel index).
  std::vector<std::pair<double, std::size_t>> reach;
  reach.reserve(interior.size());
  for (auto idx : interior) {
    const int i = static_cast<int>(idx % nxy);
    const int j = static_cast<int>((idx / nxy) % nxy);
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(nxy) * nxy));
    const double p[3] = {(i + 0.5) * resolution, (j + 0.5) * resolution, (k + 0.5) * resolution};
    double best = std::numeric_limits<double>::infinity();
    for (const auto &e : clusters) {
      const double d[3] = {p[0] - e.center[0], p[1] - e.center[1], p[2] - e.center[2]};
      double s2 = 0;
      for (int a = 0; a < 3; ++a) {
        const double u = (e.rot[a][0] * d[0] + e.rot[a][1] * d[1] + e.rot[a][2] * d[2]) * e.inv_axes[a];
        s2 += u * u;
      }
      best = std::min(best, s2);
    }
    reach.emplace_back(best, idx);
  }
  std::nth_element(reach.begin(), reach.begin() + static_cast<std::ptrdiff_t>(target), reach.end());
  for (std::size_t n = 0; n < target; ++n)
    ph.voxels[reach[n].second] = gland;

  const double achieved = static_cast<double>(target) / static_cast<double>(interior.size());
  if (std::abs(achieved - f) > 0.02)
    throw UnreachableFraction("fibroglandular fraction " + text::exact(f) + " not reachable on " +
                              std::to_string(interior.size()) + " interior voxels");
  return ph;
}

/// Share of non-skin tissue voxels that are fibroglandular.
inline double fibroglandular_share(const VoxelPhantom &ph) {
  const auto adipose = ph.materials.find("adipose");
  const auto gland = ph.materials.find("fibroglandular");
  if (!adipose || !gland)
    return 0.0;
  const auto a = ph.count(*adipose), g = ph.count(*gland);
  return a + g == 0 ? 0.0 : static_cast<double>(g) / static_cast<double>(a + g);
}

// ---------------------------------------------------------------------------
// File format
//
//   VOXSAR-PHANTOM 1
//   dims <nx> <ny> <nz>
//   resolution_m <value>
//   meta <key> <value>          (zero or more)
//   materials <count>
//   <name eps_inf delta_eps tau_ps alpha sigma_s density k C perfusion Q_m>  x count
//   <empty line>
//   <nx*ny*nz bytes, x fastest>

class PhantomFormatError : public Error {
public:
  enum class Kind { malformed_header, truncated_payload, unknown_material, trailing_data };
  PhantomFormatError(Kind kind, const std::string &what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

inline constexpr std::string_view phantom_magic = "VOXSAR-PHANTOM 1";

inline void write_phantom(std::ostream &out, const VoxelPhantom &ph) {
  ph.validate();
  out << phantom_magic << '\n';
  out << "dims " << ph.dims.nx << ' ' << ph.dims.ny << ' ' << ph.dims.nz << '\n';
  out << "resolution_m " << text::exact(ph.resolution) << '\n';
  for (const auto &[k, v] : ph.meta)
    out << "meta " << k << ' ' << v << '\n';
  out << "materials " << ph.materials.size() << '\n';
  for (const auto &m : ph.materials.materials)
    out << detail::format_material(m) << '\n';
  out << '\n';
  out.write(reinterpret_cast<const char *>(ph.voxels.data()), static_cast<std::streamsize>(ph.voxels.size()));
}

inline void save_phantom(const VoxelPhantom &ph, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write phantom '" + path + "'");
  write_phantom(out, ph);
  if (!out)
    throw Error("failed writing phantom '" + path + "'");
}

inline VoxelPhantom read_phantom(std::istream &in) {
  using Kind = PhantomFormatError::Kind;
  auto malformed = [](const std::string &why) { return PhantomFormatError(Kind::malformed_header, why); };
  std::string line;
  auto next = [&](const char *what) {
    if (!std::getline(in, line))
      throw malformed(std::string("unexpected end of header reading ") + what);
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    return text::split_ws(line);
  };

  next("magic");
  if (line != phantom_magic)
    throw malformed("bad magic line");
  VoxelPhantom ph;
  auto f = next("dims");
  if (f.size() != 4 || f[0] != "dims")
    throw malformed("expected 'dims nx ny nz'");
  int d[3];
  for (int a = 0; a < 3; ++a) {
    auto v = text::parse_int(f[a + 1]);
    if (!v || *v < 1 || *v > (1 << 20))
      throw malformed("invalid dims");
    d[a] = static_cast<int>(*v);
  }
  ph.dims = {d[0], d[1], d[2]};
  f = next("resolution");
  std::optional<double> res;
  if (f.size() != 2 || f[0] != "resolution_m" || !(res = text::parse_double(f[1])) || !(*res > 0.0) ||
      !std::isfinite(*res))
    throw malformed("expected 'resolution_m <positive value>'");
  ph.resolution = *res;
  f = next("materials");
  while (!f.empty() && f[0] == "meta") {
    if (f.size() != 3)
      throw malformed("expected 'meta <key> <value>'");
    ph.meta[std::string(f[1])] = std::string(f[2]);
    f = next("materials");
  }
  std::optional<long long> count;
  if (f.size() != 2 || f[0] != "materials" || !(count = text::parse_int(f[1])) || *count < 1 || *count > 256)
    throw malformed("expected 'materials <1..256>'");
  for (long long m = 0; m < *count; ++m) {
    f = next("material record");
    try {
      ph.materials.materials.push_back(detail::parse_material_fields(f, "material " + std::to_string(m)));
    } catch (const InvalidArgument &e) {
      throw malformed(e.what());
    }
  }
  next("blank separator");
  if (!text::trim(line).empty())
    throw malformed("missing blank line before payload");

  ph.voxels.resize(ph.dims.size());
  in.read(reinterpret_cast<char *>(ph.voxels.data()), static_cast<std::streamsize>(ph.voxels.size()));
  if (static_cast<std::size_t>(in.gcount()) != ph.voxels.size())
    throw PhantomFormatError(Kind::truncated_payload, "voxel payload truncated: expected " +
                                                          std::to_string(ph.voxels.size()) + " bytes, got " +
                                                          std::to_string(in.gcount()));
  if (in.peek() != std::char_traits<char>::eof())
    throw PhantomFormatError(Kind::trailing_data, "unexpected bytes after voxel payload");
  for (std::size_t n = 0; n < ph.voxels.size(); ++n)
    if (ph.voxels[n] >= ph.materials.size())
      throw PhantomFormatError(Kind::unknown_material, "voxel " + std::to_string(n) + " has unknown material ID " +
                                                           std::to_string(ph.voxels[n]));
  return ph;
}

inline VoxelPhantom load_phantom(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open phantom '" + path + "'");
  return read_phantom(in);
}

/// Majority-vote downsampling. A fine voxel belongs to the coarse voxel
/// containing its center; ties go to the lowest material ID, and coarse
/// voxels that receive no fine voxel are background.
inline VoxelPhantom resample(const VoxelPhantom &ph, double new_resolution) {
  ph.validate();
  require(std::isfinite(new_resolution) && new_resolution > 0.0, "resolution must be > 0");
  if (new_resolution < ph.resolution * (1.0 - 1e-12))
    throw InvalidArgument("resample only downsamples (requested " + text::exact(new_resolution) + " < " +
                          text::exact(ph.resolution) + ")");
  if (new_resolution <= ph.resolution * (1.0 + 1e-12))
    return ph;

  const double ratio = ph.resolution / new_resolution;
  auto coarse_n = [&](int n) { return std::max(1, static_cast<int>(std::ceil(n * ratio - 1e-9))); };
  VoxelPhantom out;
  out.dims = {coarse_n(ph.dims.nx), coarse_n(ph.dims.ny), coarse_n(ph.dims.nz)};
  out.resolution = new_resolution;
  out.materials = ph.materials;
  out.meta = ph.meta;
  out.voxels.assign(out.dims.size(), 0);

  auto bin = [&](int i, int limit) { return std::min(limit - 1, static_cast<int>(std::floor((i + 0.5) * ratio))); };
  const std::size_t nm = ph.materials.size();
  std::vector<std::uint32_t> votes(out.dims.size() * nm, 0);
  for (int k = 0; k < ph.dims.nz; ++k) {
    const int ck = bin(k, out.dims.nz);
    for (int j = 0; j < ph.dims.ny; ++j) {
      const int cj = bin(j, out.dims.ny);
      for (int i = 0; i < ph.dims.nx; ++i)
        ++votes[out.dims.index(bin(i, out.dims.nx), cj, ck) * nm + ph.at(i, j, k)];
    }
  }
  for (std::size_t c = 0; c < out.voxels.size(); ++c) {
    const auto *v = &votes[c * nm];
    out.voxels[c] = static_cast<std::uint8_t>(std::max_element(v, v + nm) - v);
  }
  return out;
}

} // namespace voxsar
