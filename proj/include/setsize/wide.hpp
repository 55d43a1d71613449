#pragma once

// Extended-precision scalar for the alternating sums behind B(p)^-1. Entries
// of B^-1 reach C(W, W/2) p^-W, so W = 30 at p = 0.1 needs ~40 digits before
// cancellation leaves anything; 100 decimal digits keeps W <= 50 honest.

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace setsize {

using WideReal = boost::multiprecision::cpp_bin_float_100;

}  // namespace setsize
