#ifndef CMRW_CMRW_HPP
#define CMRW_CMRW_HPP

// Umbrella header: martingale birth-death calibration to a target law.

#include "atomize.hpp"
#include "ctmc.hpp"
#include "error.hpp"
#include "geometric.hpp"
#include "negbin.hpp"
#include "pmf.hpp"
#include "simulate.hpp"
#include "smile.hpp"
#include "tridiagonal.hpp"
#include "walk_kernel.hpp"

#endif  // CMRW_CMRW_HPP
