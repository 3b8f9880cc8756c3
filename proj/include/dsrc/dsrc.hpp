#pragma once

// Numerical laboratory for delayed stochastic recursive optimal control:
// forward SDDE simulation, BSDEs with monotone non-Lipschitz drivers,
// lattice value functions with a dynamic-programming-principle residual,
// generator mollification, projected HJB/viscosity checks, and the
// Epstein-Zin consumption-investment application.

#include "dsrc/core/audits.hpp"
#include "dsrc/core/control_lattice.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/core/path_segment.hpp"
#include "dsrc/core/rng.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/core/time_grid.hpp"

#include "dsrc/sdde/ensemble.hpp"

#include "dsrc/bsde/audits.hpp"
#include "dsrc/bsde/regression.hpp"
#include "dsrc/bsde/solver.hpp"

#include "dsrc/mollify/mollify.hpp"

#include "dsrc/control/dpp.hpp"
#include "dsrc/control/value.hpp"

#include "dsrc/hjb/hamiltonian.hpp"
#include "dsrc/hjb/projection.hpp"
#include "dsrc/hjb/viscosity.hpp"

#include "dsrc/ez/epstein_zin.hpp"
#include "dsrc/ez/ramsey.hpp"

#include "dsrc/model/config.hpp"
#include "dsrc/model/registry.hpp"

#include "dsrc/util/csv.hpp"
#include "dsrc/util/hash.hpp"
#include "dsrc/util/parallel.hpp"
#include "dsrc/util/quadrature.hpp"
