#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace pwarp {

using Interval = std::pair<double, double>;

// Deterministic low-discrepancy point stream: per-coordinate additive
// (Kronecker) sequences with irrational strides, phase-shifted by the seed.
// Identical (box, seed) always yields identical points.
class PointSampler {
  public:
    PointSampler(std::vector<Interval> box, std::uint64_t seed);

    std::vector<double> next();

    // n points, in order.
    std::vector<std::vector<double>> take(int n);

    // Uniform-ish scalar in [lo, hi] from the same deterministic stream,
    // for auxiliary draws (plane coefficients and the like).
    double next_scalar(double lo, double hi);

  private:
    std::vector<Interval> box_;
    std::vector<double> stride_;
    std::vector<double> phase_;
    std::uint64_t n_ = 0;
    double aux_phase_ = 0.0;
    std::uint64_t aux_n_ = 0;
};

} // namespace pwarp
