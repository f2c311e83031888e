#pragma once

#include "rmpe/adaptive.hpp"
#include "rmpe/bounds.hpp"
#include "rmpe/dataset.hpp"
#include "rmpe/errors.hpp"
#include "rmpe/experiment.hpp"
#include "rmpe/extrapolation.hpp"
#include "rmpe/objectives.hpp"
#include "rmpe/optimizers.hpp"
#include "rmpe/trace.hpp"
