#pragma once

#include "treemst/rational.hpp"
#include "treemst/rng.hpp"
#include "treemst/tree.hpp"
#include "treemst/metric.hpp"
#include "treemst/mst.hpp"
#include "treemst/protocol.hpp"
#include "treemst/simulator.hpp"
#include "treemst/scheduler.hpp"
#include "treemst/analysis.hpp"
#include "treemst/run.hpp"
#include "treemst/trace_io.hpp"
#include "treemst/harness.hpp"
