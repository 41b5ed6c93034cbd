#pragma once
// Error-rate upper bound for linear-weighted majority voting under the
// one-coin worker model:
//
//   mean error <= exp( -2 F(S)^2 / (L^2 (L-1)^2) + ln(L-1) )
//
// The bound depends on the worker set only through F(S); it can exceed 1
// (vacuous, e.g. for a pool of random guessers) but is never negative.

#include <cmath>
#include <span>

#include "crowdsel/estimation.hpp"

namespace crowdsel {

inline double error_upper_bound(std::span<const double> reliabilities, int num_classes) {
    const double f = f_true(reliabilities, num_classes).value;
    const double l = static_cast<double>(num_classes);
    return std::exp(-2.0 * f * f / (l * l * (l - 1.0) * (l - 1.0)) + std::log(l - 1.0));
}

} // namespace crowdsel
