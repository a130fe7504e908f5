#pragma once

// Stacked conformal prediction for regression: cross-fitted base learners
// feed a linear meta-learner whose full conformalization runs on rank-one
// matrix updates, giving prediction intervals with approximate marginal
// validity and no separate calibration set.

#include "stackcp/baseline.hpp"
#include "stackcp/conformal.hpp"
#include "stackcp/csv.hpp"
#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/eval.hpp"
#include "stackcp/experiment.hpp"
#include "stackcp/folding.hpp"
#include "stackcp/hashing.hpp"
#include "stackcp/learners.hpp"
#include "stackcp/linalg.hpp"
#include "stackcp/oracle.hpp"
#include "stackcp/probe.hpp"
#include "stackcp/rng.hpp"
#include "stackcp/stack.hpp"
#include "stackcp/synth.hpp"
