#pragma once

#include "gne/builtin.hpp"
#include "gne/dynamics.hpp"
#include "gne/errors.hpp"
#include "gne/expression.hpp"
#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/metrics.hpp"
#include "gne/plot.hpp"
#include "gne/random.hpp"
#include "gne/runner.hpp"
#include "gne/scenario.hpp"
#include "gne/state.hpp"
#include "gne/trigger.hpp"
