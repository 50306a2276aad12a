#pragma once

#include "fraclange/config.hpp"
#include "fraclange/csv.hpp"
#include "fraclange/fractional_ops.hpp"
#include "fraclange/grid.hpp"
#include "fraclange/scalar_solver.hpp"
#include "fraclange/special_functions.hpp"
#include "fraclange/spectral_solver.hpp"
