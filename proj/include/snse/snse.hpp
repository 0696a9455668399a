#pragma once

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/grid.hpp"
#include "snse/heat_solver.hpp"
#include "snse/initial_data.hpp"
#include "snse/io.hpp"
#include "snse/ledger.hpp"
#include "snse/monitors.hpp"
#include "snse/noise.hpp"
#include "snse/operators.hpp"
#include "snse/snse_solver.hpp"
#include "snse/spectral.hpp"
#include "snse/stopping.hpp"
