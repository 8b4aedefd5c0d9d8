#pragma once

#include "rssloc/baselines.hpp"
#include "rssloc/errors.hpp"
#include "rssloc/geometry.hpp"
#include "rssloc/harness.hpp"
#include "rssloc/io.hpp"
#include "rssloc/measurement_model.hpp"
#include "rssloc/obl_saa.hpp"
#include "rssloc/random.hpp"
