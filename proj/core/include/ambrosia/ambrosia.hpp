#pragma once

#include "ambrosia/anomaly.hpp"
#include "ambrosia/applications.hpp"
#include "ambrosia/energy.hpp"
#include "ambrosia/error.hpp"
#include "ambrosia/forecast.hpp"
#include "ambrosia/metrics.hpp"
#include "ambrosia/protocol.hpp"
#include "ambrosia/random.hpp"
#include "ambrosia/timeseries.hpp"
#include "ambrosia/version.hpp"
