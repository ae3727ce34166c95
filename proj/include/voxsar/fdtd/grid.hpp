#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "voxsar/common.hpp"
#include "voxsar/materials.hpp"

namespace voxsar::fdtd {

/// Convolutional PML settings. `cells == 0` leaves bare PEC walls.
struct PmlParams {
  int cells = 10;
  int order = 3;             // polynomial grading exponent
  double sigma_scale = 0.8;  // sigma_max relative to (order + 1) / (eta0 * dx)
  double kappa_max = 5.0;
  double alpha_max = 0.05;   // S/m, graded linearly to zero at the outer wall

  void validate() const {
    require(cells >= 0, "PML thickness must be >= 0");
    require(order >= 1, "PML grading order must be >= 1");
    require(sigma_scale >= 0.0 && kappa_max >= 1.0 && alpha_max >= 0.0, "invalid PML parameters");
  }
};

enum class Boundary { pml, periodic };

/// Everything the Yee solver needs, already resolved to grid nodes.
///
/// Voxel (material) centers sit on the primary nodes. The E component along
/// axis c lives on the edge between node n and node n+1 along c, so each E
/// sample has exactly two adjacent voxels. H components sit on face centers.
/// Non-periodic axes end in PEC walls behind the PML.
struct GridSetup {
  Extent3 nodes;
  double spacing = 1e-3;
  double dt = 0;
  std::array<Boundary, 3> boundary{Boundary::pml, Boundary::pml, Boundary::pml};
  PmlParams pml;
  std::vector<std::uint8_t> materials; // one ID per node
  MaterialTable table;

  bool periodic(int axis) const { return boundary[axis] == Boundary::periodic; }

  void validate() const {
    require(spacing > 0.0 && std::isfinite(spacing), "grid spacing must be > 0");
    require(dt > 0.0 && std::isfinite(dt), "time step must be > 0");
    pml.validate();
    table.validate();
    require(materials.size() == nodes.size(), "material array does not match grid");
    for (int a = 0; a < 3; ++a) {
      if (periodic(a))
        require(nodes[a] >= 1, "periodic axis needs at least one node");
      else
        require(nodes[a] >= 2 * pml.cells + 3, "axis too short for its PML");
    }
    for (auto id : materials)
      require(id < table.size(), "grid references unknown material");
  }
};

/// 3-D Courant limit for a uniform cubic grid.
inline double courant_limit(double spacing) { return spacing / (constants::c0 * std::sqrt(3.0)); }

} // namespace voxsar::fdtd
