#pragma once

// Umbrella header for the solver library (no I/O dependencies).
#include "vpfp/checks.hpp"
#include "vpfp/config.hpp"
#include "vpfp/error.hpp"
#include "vpfp/fokker_planck.hpp"
#include "vpfp/grid.hpp"
#include "vpfp/limit.hpp"
#include "vpfp/numerics.hpp"
#include "vpfp/pnp.hpp"
#include "vpfp/poisson.hpp"
#include "vpfp/transport.hpp"
#include "vpfp/version.hpp"
#include "vpfp/vpfp.hpp"
