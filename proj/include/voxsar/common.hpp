#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace voxsar {

namespace constants {
inline constexpr double c0 = 299792458.0;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
inline constexpr double eta0 = mu0 * c0;
inline constexpr double pi = std::numbers::pi;
} // namespace constants

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied a value outside an operation's domain.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

inline void require(bool condition, const std::string &message) {
  if (!condition)
    throw InvalidArgument(message);
}

/// Voxel or node counts along x, y, z.
struct Extent3 {
  int nx = 0, ny = 0, nz = 0;

  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  constexpr int operator[](int axis) const noexcept {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  /// Linear index, x fastest.
  constexpr std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
  }
  constexpr bool contains(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < nx && j < ny && k < nz;
  }
  friend constexpr bool operator==(const Extent3 &, const Extent3 &) = default;
};

struct Index3 {
  int i = 0, j = 0, k = 0;
  constexpr int operator[](int axis) const noexcept { return axis == 0 ? i : (axis == 1 ? j : k); }
  friend constexpr bool operator==(const Index3 &, const Index3 &) = default;
};

enum class Axis : int { x = 0, y = 1, z = 2 };

constexpr int axis_index(Axis a) noexcept { return static_cast<int>(a); }

inline Axis axis_from_char(char c) {
  switch (c) {
  case 'x': case 'X': return Axis::x;
  case 'y': case 'Y': return Axis::y;
  case 'z': case 'Z': return Axis::z;
  default: throw InvalidArgument(std::string("unknown axis '") + c + "'");
  }
}

constexpr char axis_char(Axis a) noexcept { return "xyz"[axis_index(a)]; }

} // namespace voxsar
