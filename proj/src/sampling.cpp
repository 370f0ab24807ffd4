#include "pwarp/sampling.hpp"

#include <cmath>

namespace pwarp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double frac(double x) { return x - std::floor(x); }

const double kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

} // namespace

PointSampler::PointSampler(std::vector<Interval> box, std::uint64_t seed)
    : box_(std::move(box)) {
    stride_.resize(box_.size());
    phase_.resize(box_.size());
    for (std::size_t j = 0; j < box_.size(); ++j) {
        stride_[j] = frac(std::sqrt(kPrimes[j % (sizeof(kPrimes) / sizeof(kPrimes[0]))]));
        phase_[j] = unit_from_bits(splitmix64(seed ^ (0x1234567ULL + j)));
    }
    aux_phase_ = unit_from_bits(splitmix64(seed ^ 0xabcdef01ULL));
}

std::vector<double> PointSampler::next() {
    ++n_;
    std::vector<double> p(box_.size());
    for (std::size_t j = 0; j < box_.size(); ++j) {
        double u = frac(phase_[j] + stride_[j] * static_cast<double>(n_));
        p[j] = box_[j].first + u * (box_[j].second - box_[j].first);
    }
    return p;
}

std::vector<std::vector<double>> PointSampler::take(int n) {
    std::vector<std::vector<double>> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pts.push_back(next());
    return pts;
}

double PointSampler::next_scalar(double lo, double hi) {
    ++aux_n_;
    double u = frac(aux_phase_ + 0.6180339887498949 * static_cast<double>(aux_n_));
    return lo + u * (hi - lo);
}

} // namespace pwarp
