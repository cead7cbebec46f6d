#pragma once
/// Umbrella header for the whole library.

#include "rarelab/config.hpp"
#include "rarelab/diagnostics.hpp"
#include "rarelab/experiment_harness.hpp"
#include "rarelab/gas_dynamics.hpp"
#include "rarelab/hyperbolic_wave.hpp"
#include "rarelab/nsf_solver.hpp"
#include "rarelab/rarefaction_waves.hpp"
#include "rarelab/verification.hpp"
#include "rarelab/wave_profile.hpp"
