#pragma once

#include "offload/types.hpp"
#include "offload/model.hpp"
#include "offload/response.hpp"
#include "offload/equilibrium.hpp"
#include "offload/leader.hpp"
#include "offload/sim.hpp"
