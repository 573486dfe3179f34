#pragma once

#include "pnd/analysis.hpp"
#include "pnd/channel_sim.hpp"
#include "pnd/config.hpp"
#include "pnd/constellation.hpp"
#include "pnd/detectors.hpp"
#include "pnd/harness.hpp"
#include "pnd/oracle.hpp"
#include "pnd/phase_noise.hpp"
#include "pnd/report.hpp"
#include "pnd/rng.hpp"
#include "pnd/series.hpp"
#include "pnd/special_functions.hpp"
#include "pnd/tslot_detectors.hpp"
