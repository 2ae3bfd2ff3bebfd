#pragma once

#include "seedgate/core_maps.hpp"
#include "seedgate/error.hpp"
#include "seedgate/manifest.hpp"
#include "seedgate/memory_gate.hpp"
#include "seedgate/metrics.hpp"
#include "seedgate/pipeline.hpp"
#include "seedgate/prompt_refine.hpp"
#include "seedgate/propagation_sim.hpp"
#include "seedgate/report.hpp"
#include "seedgate/scale_space.hpp"
#include "seedgate/tensor_io.hpp"
