#pragma once

#include "errors.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "fringe_model.hpp"
#include "lsq_core.hpp"
#include "hdr_retrieval.hpp"
#include "unwrap.hpp"
#include "metrics.hpp"
#include "io.hpp"
