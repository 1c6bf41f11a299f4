#pragma once

#include "ksnet/assembly.hpp"
#include "ksnet/errors.hpp"
#include "ksnet/expr.hpp"
#include "ksnet/graph.hpp"
#include "ksnet/linsolve.hpp"
#include "ksnet/scenario_io.hpp"
#include "ksnet/sparse.hpp"
#include "ksnet/stepping.hpp"
#include "ksnet/study.hpp"
