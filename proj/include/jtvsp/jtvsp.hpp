#pragma once

// Umbrella header for the joint time-vertex signal processing library.

#include "jtvsp/common.hpp"
#include "jtvsp/csv.hpp"
#include "jtvsp/experiments.hpp"
#include "jtvsp/graph.hpp"
#include "jtvsp/graph_spectrum.hpp"
#include "jtvsp/io.hpp"
#include "jtvsp/joint.hpp"
#include "jtvsp/psd_estimation.hpp"
#include "jtvsp/random.hpp"
#include "jtvsp/stationarity.hpp"
#include "jtvsp/time_basis.hpp"
#include "jtvsp/wiener.hpp"
