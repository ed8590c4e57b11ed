#pragma once

#include <cmath>
#include <string>

#include "pnoise/error.hpp"

namespace pnoise {

/// 10*log10 of a strictly positive linear power-like quantity.
inline double db(double linear) {
    if (!(linear > 0.0)) {
        throw domain_error("db: argument must be positive, got " + std::to_string(linear));
    }
    return 10.0 * std::log10(linear);
}

inline double undb(double decibels) { return std::pow(10.0, decibels / 10.0); }

}  // namespace pnoise
