#pragma once

// Umbrella header for the whole library.

#include "netspec/actor.hpp"
#include "netspec/config.hpp"
#include "netspec/critic.hpp"
#include "netspec/env.hpp"
#include "netspec/errors.hpp"
#include "netspec/features.hpp"
#include "netspec/io.hpp"
#include "netspec/kuramoto.hpp"
#include "netspec/lqr.hpp"
#include "netspec/rng.hpp"
#include "netspec/rsvd.hpp"
#include "netspec/thermal.hpp"
#include "netspec/topology.hpp"
#include "netspec/trainer.hpp"
#include "netspec/window.hpp"
