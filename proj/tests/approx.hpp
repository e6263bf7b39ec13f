#pragma once

#include <doctest.h>

namespace nvd::testing {

// Purely relative comparison; doctest's default adds an absolute scale of 1.
inline doctest::Approx approx(double value) { return doctest::Approx(value).scale(0.0); }

}  // namespace nvd::testing
