#pragma once

#include "voxsar/bioheat.hpp"
#include "voxsar/common.hpp"
#include "voxsar/fdtd/aperture.hpp"
#include "voxsar/fdtd/domain.hpp"
#include "voxsar/fdtd/grid.hpp"
#include "voxsar/fdtd/phasor.hpp"
#include "voxsar/fdtd/solver.hpp"
#include "voxsar/fdtd/steady_state.hpp"
#include "voxsar/materials.hpp"
#include "voxsar/phantom.hpp"
#include "voxsar/sar.hpp"
