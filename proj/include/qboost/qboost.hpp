#pragma once

#include "qboost/common.hpp"
#include "qboost/weights.hpp"
#include "qboost/concepts.hpp"
#include "qboost/boostcore.hpp"
#include "qboost/qsim.hpp"
#include "qboost/learners.hpp"
#include "qboost/estimators.hpp"
#include "qboost/driver.hpp"
#include "qboost/verify.hpp"
#include "qboost/experiment.hpp"
