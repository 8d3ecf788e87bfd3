#pragma once

#include "homchain/errors.hpp"
#include "homchain/format.hpp"
#include "homchain/ext_real.hpp"
#include "homchain/potential.hpp"
#include "homchain/stats.hpp"
#include "homchain/parallel.hpp"
#include "homchain/random_medium.hpp"
#include "homchain/strain_problem.hpp"
#include "homchain/cell_solver.hpp"
#include "homchain/chain_energy.hpp"
#include "homchain/config.hpp"
#include "homchain/homogenized_limit.hpp"
#include "homchain/io.hpp"
#include "homchain/cli.hpp"
