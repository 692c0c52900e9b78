#pragma once

// Minimax mean-square-regret treatment rules under interval-identified
// welfare: calibration, rule families, risk functionals and the numerical
// verification suite.

#include "msr/calibration.hpp"
#include "msr/numerics.hpp"
#include "msr/regret.hpp"
#include "msr/rho.hpp"
#include "msr/rules.hpp"
#include "msr/serialization.hpp"
#include "msr/verification.hpp"
