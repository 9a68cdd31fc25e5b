#pragma once

#include "mscd/bench.hpp"
#include "mscd/errors.hpp"
#include "mscd/geometry.hpp"
#include "mscd/instance.hpp"
#include "mscd/instance_io.hpp"
#include "mscd/oracle.hpp"
#include "mscd/preemptive.hpp"
#include "mscd/primal_dual.hpp"
#include "mscd/routing.hpp"
#include "mscd/trees.hpp"
#include "mscd/union_find.hpp"
