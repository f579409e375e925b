#ifndef BOUNDARY_INTERCEPT_HPP
#define BOUNDARY_INTERCEPT_HPP

#include "bandwidth.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "dgp.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "firststage.hpp"
#include "inference.hpp"
#include "kernels.hpp"
#include "montecarlo.hpp"
#include "normal.hpp"
#include "rng.hpp"
#include "transform.hpp"

#endif // BOUNDARY_INTERCEPT_HPP
