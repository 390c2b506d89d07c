// spindrive.hpp
// Umbrella header pulling in the whole library.

#pragma once

#include "spindrive/config.hpp"
#include "spindrive/counter_rng.hpp"
#include "spindrive/dynamics.hpp"
#include "spindrive/io.hpp"
#include "spindrive/lattice.hpp"
#include "spindrive/observables.hpp"
#include "spindrive/parallel.hpp"
#include "spindrive/reference_integrator.hpp"
#include "spindrive/runner.hpp"
#include "spindrive/spectrum.hpp"
#include "spindrive/sweep.hpp"
#include "spindrive/timescales.hpp"
