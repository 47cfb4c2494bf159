#pragma once

// Umbrella header: equation discovery for noisy, variable dynamical systems.

#include "eqdisc/baseline.hpp"
#include "eqdisc/benchmark.hpp"
#include "eqdisc/bootstrap.hpp"
#include "eqdisc/config.hpp"
#include "eqdisc/core.hpp"
#include "eqdisc/csv.hpp"
#include "eqdisc/density.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/experiment.hpp"
#include "eqdisc/infer.hpp"
#include "eqdisc/priors.hpp"
#include "eqdisc/report.hpp"
#include "eqdisc/rng.hpp"
#include "eqdisc/simulate.hpp"
