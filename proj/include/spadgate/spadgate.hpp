#pragma once

#include "spadgate/timing.hpp"
#include "spadgate/quadrature.hpp"
#include "spadgate/photon_stats.hpp"
#include "spadgate/link_ber.hpp"
#include "spadgate/rng.hpp"
#include "spadgate/mc_sim.hpp"
#include "spadgate/scenario.hpp"
#include "spadgate/validate.hpp"
#include "spadgate/presets.hpp"
