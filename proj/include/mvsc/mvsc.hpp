#pragma once

#include "mvsc/core.hpp"
#include "mvsc/graph.hpp"
#include "mvsc/spectral.hpp"
#include "mvsc/simplex_qp.hpp"
#include "mvsc/trace.hpp"
#include "mvsc/early_fusion.hpp"
#include "mvsc/late_fusion.hpp"
#include "mvsc/eval.hpp"
#include "mvsc/dataset.hpp"
#include "mvsc/pipeline.hpp"
