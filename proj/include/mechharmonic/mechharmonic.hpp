#pragma once

// Umbrella header for the mechharmonic library.

#include "mechharmonic/planar.hpp"
#include "mechharmonic/harmonics.hpp"
#include "mechharmonic/fivebar.hpp"
#include "mechharmonic/objectives.hpp"
#include "mechharmonic/singledof.hpp"
#include "mechharmonic/optimize.hpp"
#include "mechharmonic/dynamics.hpp"
#include "mechharmonic/io.hpp"
