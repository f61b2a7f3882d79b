#pragma once

#include "awva/core.hpp"
#include "awva/rng.hpp"
#include "awva/signal_model.hpp"
#include "awva/noise.hpp"
#include "awva/fit.hpp"
#include "awva/theta.hpp"
#include "awva/experiment.hpp"
#include "awva/config.hpp"
#include "awva/csv.hpp"
#include "awva/svg.hpp"
#include "awva/metadata.hpp"
