#pragma once

#include "bilevel/baselines.hpp"
#include "bilevel/feasible_set.hpp"
#include "bilevel/gradient_check.hpp"
#include "bilevel/inner_solver.hpp"
#include "bilevel/metrics.hpp"
#include "bilevel/pdbo.hpp"
#include "bilevel/problem.hpp"
#include "bilevel/problems/hyperopt.hpp"
#include "bilevel/problems/toy.hpp"
#include "bilevel/proximal.hpp"
#include "bilevel/rng.hpp"
#include "bilevel/schedule.hpp"
#include "bilevel/vector_pair.hpp"
