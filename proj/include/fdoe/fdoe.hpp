#pragma once

#include "fdoe/basis.hpp"
#include "fdoe/calculus.hpp"
#include "fdoe/config.hpp"
#include "fdoe/criteria.hpp"
#include "fdoe/errors.hpp"
#include "fdoe/formula.hpp"
#include "fdoe/model.hpp"
#include "fdoe/objective.hpp"
#include "fdoe/optimizer.hpp"
#include "fdoe/priors.hpp"
#include "fdoe/quadrature.hpp"
#include "fdoe/run.hpp"
