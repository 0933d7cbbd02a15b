#pragma once

#include "mixrough/calculus.hpp"
#include "mixrough/errors.hpp"
#include "mixrough/experiments.hpp"
#include "mixrough/grid.hpp"
#include "mixrough/models.hpp"
#include "mixrough/parallel.hpp"
#include "mixrough/path_io.hpp"
#include "mixrough/paths.hpp"
#include "mixrough/rate.hpp"
#include "mixrough/report_io.hpp"
#include "mixrough/solvers.hpp"
#include "mixrough/zoo.hpp"
