#pragma once

#include "egolsm/analysis.hpp"
#include "egolsm/experiment.hpp"
#include "egolsm/graph_io.hpp"
#include "egolsm/init.hpp"
#include "egolsm/likelihood.hpp"
#include "egolsm/metrics.hpp"
#include "egolsm/model.hpp"
#include "egolsm/partial_view.hpp"
#include "egolsm/simgen.hpp"
#include "egolsm/solver.hpp"
#include "egolsm/version.hpp"
