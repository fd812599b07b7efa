#pragma once

// Core numerics.  Config parsing and run orchestration (config.hpp,
// report.hpp, run.hpp) additionally need yaml-cpp and are not included here.

#include "nlh/dual.hpp"
#include "nlh/error.hpp"
#include "nlh/experiments.hpp"
#include "nlh/grid.hpp"
#include "nlh/kernels.hpp"
#include "nlh/regime.hpp"
#include "nlh/resolvent.hpp"
#include "nlh/solver.hpp"
#include "nlh/special.hpp"
#include "nlh/version.hpp"
#include "nlh/weight.hpp"
