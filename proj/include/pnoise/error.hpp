#pragma once

#include <stdexcept>
#include <string>

namespace pnoise {

/// Argument outside the mathematical domain of a model (e.g. f = 0 on a
/// free-running spectrum, rho <= 0).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parameters are legal but violate the regime in which an approximation
/// holds (f3dB*Ts too large, l_inf^2*B_theta too large, ...).
class validity_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical procedure failed: quadrature did not converge, non-finite
/// samples appeared in a simulation.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace detail
}  // namespace pnoise
