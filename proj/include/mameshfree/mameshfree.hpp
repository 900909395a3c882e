#pragma once

// Meshfree collocation solver for the 2D elliptic Monge-Ampère equation on
// scaled compactly supported radial basis trial spaces.

#include "mameshfree/analysis.hpp"
#include "mameshfree/bins.hpp"
#include "mameshfree/config.hpp"
#include "mameshfree/expr.hpp"
#include "mameshfree/fields.hpp"
#include "mameshfree/geometry.hpp"
#include "mameshfree/kernel.hpp"
#include "mameshfree/ma_operator.hpp"
#include "mameshfree/parallel.hpp"
#include "mameshfree/runner.hpp"
#include "mameshfree/solver.hpp"
#include "mameshfree/trialspace.hpp"
