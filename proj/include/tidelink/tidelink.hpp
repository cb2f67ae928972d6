#pragma once

#include "tidelink/analysis.hpp"
#include "tidelink/config.hpp"
#include "tidelink/elastic.hpp"
#include "tidelink/errors.hpp"
#include "tidelink/geo.hpp"
#include "tidelink/instrument.hpp"
#include "tidelink/rng.hpp"
#include "tidelink/tide.hpp"
#include "tidelink/timeutil.hpp"
