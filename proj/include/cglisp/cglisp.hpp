#pragma once

#include "cglisp/acquisition.hpp"
#include "cglisp/bench.hpp"
#include "cglisp/core.hpp"
#include "cglisp/errors.hpp"
#include "cglisp/idw.hpp"
#include "cglisp/io.hpp"
#include "cglisp/optimizer.hpp"
#include "cglisp/preference_surrogate.hpp"
#include "cglisp/problems.hpp"
#include "cglisp/pso.hpp"
#include "cglisp/qp.hpp"
#include "cglisp/sampling.hpp"
