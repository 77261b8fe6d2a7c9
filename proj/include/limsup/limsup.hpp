#pragma once

#include "cantor.hpp"
#include "config.hpp"
#include "covering.hpp"
#include "dichotomy.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "experiment.hpp"
#include "farey.hpp"
#include "geometry.hpp"
#include "membership.hpp"
#include "minkowski.hpp"
#include "monte_carlo.hpp"
#include "neighborhood.hpp"
#include "rate_function.hpp"
#include "rates.hpp"
#include "sweep.hpp"
#include "systems.hpp"
#include "ubiquity.hpp"
