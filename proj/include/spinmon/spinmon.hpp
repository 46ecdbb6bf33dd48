#pragma once

// Umbrella header: monitored spin-chain trajectory simulation and
// entanglement scaling analysis.

#include "spinmon/io.hpp"
#include "spinmon/model.hpp"
#include "spinmon/monitoring.hpp"
#include "spinmon/pauli.hpp"
#include "spinmon/philox.hpp"
#include "spinmon/runner.hpp"
#include "spinmon/state.hpp"
#include "spinmon/stats.hpp"
#include "spinmon/trotter.hpp"
