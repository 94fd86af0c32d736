#pragma once

// Umbrella header: graphs of projection operators, Born-rule valuations on
// them, intensive/effective relations between the reduced valuations of a
// bipartite state, and seeded sampling experiments over the joint outcomes.

#include "config.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "philox.hpp"
#include "powers.hpp"
#include "psa.hpp"
#include "relations.hpp"
#include "report.hpp"
#include "sampler.hpp"
#include "scenario.hpp"
#include "version.hpp"
