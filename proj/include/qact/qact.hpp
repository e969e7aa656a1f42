#pragma once

#include "qact/error.hpp"
#include "qact/experiment.hpp"
#include "qact/linalg.hpp"
#include "qact/optimize.hpp"
#include "qact/protocol.hpp"
#include "qact/qstate.hpp"
#include "qact/quantumness.hpp"
#include "qact/rand.hpp"
#include "qact/state_io.hpp"
