#pragma once

#include "fiberfilm/assembly.hpp"
#include "fiberfilm/config.hpp"
#include "fiberfilm/cyclic_banded.hpp"
#include "fiberfilm/diagnostics.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"
#include "fiberfilm/io.hpp"
#include "fiberfilm/mobility.hpp"
#include "fiberfilm/model.hpp"
#include "fiberfilm/newton.hpp"
#include "fiberfilm/runner.hpp"
#include "fiberfilm/scenarios.hpp"
#include "fiberfilm/stepper.hpp"
