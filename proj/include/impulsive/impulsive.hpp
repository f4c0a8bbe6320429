#pragma once

// Everything except the CLI front end.

#include "impulsive/errors.hpp"
#include "impulsive/vector.hpp"
#include "impulsive/quadrature.hpp"
#include "impulsive/compfun.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/simulator.hpp"
#include "impulsive/systems.hpp"
#include "impulsive/gronwall.hpp"
#include "impulsive/gains.hpp"
#include "impulsive/certify.hpp"
#include "impulsive/config.hpp"
#include "impulsive/acceptance.hpp"
