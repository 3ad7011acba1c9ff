#pragma once

// Sparse Gaussian VAR structure learning via fractional marginal
// pseudo-likelihood scoring, plus constrained maximum-likelihood parameter
// estimation, a synthetic-model simulator, and recovery metrics.

#include "plvar/errors.hpp"
#include "plvar/evaluate.hpp"
#include "plvar/io.hpp"
#include "plvar/model.hpp"
#include "plvar/params.hpp"
#include "plvar/scoring.hpp"
#include "plvar/search.hpp"
#include "plvar/simulate.hpp"
