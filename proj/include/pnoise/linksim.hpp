#pragma once

#include "pnoise/linksim/constellation.hpp"
#include "pnoise/linksim/rrc.hpp"
#include "pnoise/linksim/simulate.hpp"
#include "pnoise/linksim/sir.hpp"
#include "pnoise/linksim/tracking.hpp"
