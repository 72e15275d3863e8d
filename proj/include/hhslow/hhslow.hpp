#pragma once

// Umbrella header.

#include "compensated.hpp"
#include "contour.hpp"
#include "error.hpp"
#include "integrate.hpp"
#include "model.hpp"
#include "predictor.hpp"
#include "runge_kutta.hpp"
#include "section.hpp"
#include "series.hpp"
#include "stats.hpp"
#include "version.hpp"
