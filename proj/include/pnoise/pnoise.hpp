#pragma once

#include "pnoise/analysis.hpp"
#include "pnoise/db.hpp"
#include "pnoise/error.hpp"
#include "pnoise/fitting.hpp"
#include "pnoise/linksim.hpp"
#include "pnoise/psd_models.hpp"
#include "pnoise/spectral.hpp"
#include "pnoise/timegen.hpp"
#include "pnoise/version.hpp"
