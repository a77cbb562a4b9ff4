#pragma once

#include "qflow/config.hpp"
#include "qflow/demands.hpp"
#include "qflow/edge_formulation.hpp"
#include "qflow/error.hpp"
#include "qflow/fidelity.hpp"
#include "qflow/layering.hpp"
#include "qflow/lp.hpp"
#include "qflow/path_extraction.hpp"
#include "qflow/path_oracle.hpp"
#include "qflow/pipeline.hpp"
#include "qflow/protocol_sim.hpp"
#include "qflow/report.hpp"
#include "qflow/rng.hpp"
#include "qflow/topology.hpp"
