#pragma once

// Umbrella header for the whole library.

#include "swarmsense/collective.hpp"
#include "swarmsense/config.hpp"
#include "swarmsense/coordinators.hpp"
#include "swarmsense/csv.hpp"
#include "swarmsense/dorl.hpp"
#include "swarmsense/energy.hpp"
#include "swarmsense/errors.hpp"
#include "swarmsense/forecast.hpp"
#include "swarmsense/harness.hpp"
#include "swarmsense/mappo.hpp"
#include "swarmsense/mat.hpp"
#include "swarmsense/metrics.hpp"
#include "swarmsense/nn.hpp"
#include "swarmsense/plan.hpp"
#include "swarmsense/plangen.hpp"
#include "swarmsense/rl.hpp"
#include "swarmsense/rng.hpp"
#include "swarmsense/scenario.hpp"
#include "swarmsense/simworld.hpp"
