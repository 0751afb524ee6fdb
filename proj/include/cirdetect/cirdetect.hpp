#pragma once

#include "changepoint.hpp"
#include "decision.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "experiment.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "path_io.hpp"
#include "pathfun.hpp"
#include "random.hpp"
#include "sampler.hpp"
#include "testprocess.hpp"
