#pragma once

#include "tracemin/common.hpp"
#include "tracemin/consensus.hpp"
#include "tracemin/csv.hpp"
#include "tracemin/distributed.hpp"
#include "tracemin/experiment.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/messages.hpp"
#include "tracemin/node_view.hpp"
#include "tracemin/robustness.hpp"
#include "tracemin/schatten.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"
