#pragma once

#include "cvqkd/sim/bitstring.hpp"
#include "cvqkd/sim/privacy_amplification.hpp"
#include "cvqkd/sim/protocol.hpp"
#include "cvqkd/sim/reconcile.hpp"
#include "cvqkd/sim/rng.hpp"
