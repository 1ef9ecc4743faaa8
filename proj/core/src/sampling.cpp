#include "hybrid/sampling.hpp"

#include <array>
#include <cmath>

namespace hybrid {

namespace {

constexpr std::array<unsigned, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                              41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double map_coordinate(const Interval& iv, double u, const SampleOptions& opt) {
  const double w = opt.window;
  if (iv.lower == iv.upper) return iv.lower;

  double lo = 0.0;
  double hi = 0.0;
  if (iv.lower_finite() && iv.upper_finite()) {
    const double ext = 0.1 * (iv.upper - iv.lower);
    lo = iv.lower - (iv.lower_closed ? ext : 0.0);
    hi = iv.upper + (iv.upper_closed ? ext : 0.0);
  } else if (iv.lower_finite()) {
    lo = iv.lower - (iv.lower_closed ? 0.25 * w : 0.0);
    hi = iv.lower + w;
  } else if (iv.upper_finite()) {
    lo = iv.upper - w;
    hi = iv.upper + (iv.upper_closed ? 0.25 * w : 0.0);
  } else {
    lo = -w;
    hi = w;
  }
  double x = iv.clamp(lo + (hi - lo) * u);
  if (!iv.lower_closed && x <= iv.lower) x = std::nextafter(iv.lower, iv.upper);
  if (!iv.upper_closed && x >= iv.upper) x = std::nextafter(iv.upper, iv.lower);
  return x;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

HaltonSequence::HaltonSequence(std::size_t dim, std::uint64_t seed) : dim_(dim), shift_(dim) {
  for (std::size_t k = 0; k < dim; ++k) shift_[k] = to_unit(mix_seed(seed, k));
}

std::vector<double> HaltonSequence::next() {
  std::vector<double> out(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    const unsigned base = kPrimes[k % kPrimes.size()];
    // Reuse of a base beyond 24 dimensions is decorrelated by the skip.
    const std::uint64_t idx = index_ + 7919ULL * (k / kPrimes.size());
    double u = radical_inverse(idx, base) + shift_[k];
    out[k] = u - std::floor(u);
  }
  ++index_;
  return out;
}

std::vector<Vector> sample_box(const BoxSpace& box, std::size_t count, std::uint64_t seed,
                               const SampleOptions& options) {
  if (box.dim() == 0) return {Vector(0)};
  std::vector<Vector> out;
  out.reserve(count);
  HaltonSequence seq(box.dim(), seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto u = seq.next();
    Vector x(static_cast<Eigen::Index>(box.dim()));
    for (std::size_t k = 0; k < box.dim(); ++k) {
      x[static_cast<Eigen::Index>(k)] = map_coordinate(box[k], u[k], options);
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace hybrid
