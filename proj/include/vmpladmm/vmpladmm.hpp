#pragma once

#include "vmpladmm/diagnostics.hpp"
#include "vmpladmm/errors.hpp"
#include "vmpladmm/linear_operator.hpp"
#include "vmpladmm/metric.hpp"
#include "vmpladmm/problem.hpp"
#include "vmpladmm/problems.hpp"
#include "vmpladmm/prox.hpp"
#include "vmpladmm/rate_fit.hpp"
#include "vmpladmm/reference.hpp"
#include "vmpladmm/smooth.hpp"
#include "vmpladmm/solve.hpp"
#include "vmpladmm/solver.hpp"
#include "vmpladmm/trace.hpp"
#include "vmpladmm/types.hpp"
