#pragma once

#include <cstdint>

#include "mlsvm/dataset.hpp"

namespace mlsvm {

// Classic synthetic binary benchmarks, drawn from their published generative
// definitions with a seeded RNG. Labels are balanced coin flips unless noted.

// +1: N(0, 4I); -1: N(a..a, I) with a = 2/sqrt(d).
Dataset gen_ringnorm(std::size_t n, int d, std::uint64_t seed);

// +1: N(a..a, I); -1: N(-a..-a, I) with a = 2/sqrt(d).
Dataset gen_twonorm(std::size_t n, int d, std::uint64_t seed);

// +1: even mixture of N(a..a, I) and N(-a..-a, I); -1: N((a,-a,a,...), I).
Dataset gen_threenorm(std::size_t n, int d, std::uint64_t seed);

// Two Gaussians at +/- (separation/2) e1 with unit covariance scaled by
// sigma; the +1 class holds round(n * minority_fraction) samples.
Dataset gen_two_gaussians(std::size_t n, int d, double separation,
                          double minority_fraction, std::uint64_t seed,
                          double sigma_plus = 1.0, double sigma_minus = 1.0);

}  // namespace mlsvm
