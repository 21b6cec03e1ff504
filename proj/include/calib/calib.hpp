#pragma once

#include "calib/benchmark.hpp"
#include "calib/calibration.hpp"
#include "calib/error.hpp"
#include "calib/format.hpp"
#include "calib/numerics.hpp"
#include "calib/prediction_io.hpp"
#include "calib/prediction_store.hpp"
#include "calib/rng.hpp"
#include "calib/smoothing.hpp"
#include "calib/temperature.hpp"
#include "calib/training.hpp"
#include "calib/version.hpp"
