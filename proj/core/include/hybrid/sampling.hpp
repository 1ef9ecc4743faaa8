#pragma once

#include <cstdint>
#include <vector>

#include "hybrid/box.hpp"

namespace hybrid {

/// Controls how unbounded coordinates are windowed when sampling a box.
struct SampleOptions {
  /// Half-width of the window used for (-inf, inf); width for half-lines.
  double window = 4.0;
};

/// SplitMix64 step; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Halton sequence with a seeded Cranley-Patterson rotation.
class HaltonSequence {
 public:
  HaltonSequence(std::size_t dim, std::uint64_t seed);

  /// Next point of [0,1)^dim.
  std::vector<double> next();

 private:
  std::size_t dim_;
  std::uint64_t index_ = 1;
  std::vector<double> shift_;
};

/// Deterministic low-discrepancy samples of a box.
///
/// Closed finite endpoints are reached by clipping a slightly enlarged
/// window, so a fraction of the samples lands exactly on the boundary.
/// Open endpoints are never produced. A zero-dimensional box yields a
/// single (empty) point regardless of `count`.
std::vector<Vector> sample_box(const BoxSpace& box, std::size_t count, std::uint64_t seed,
                               const SampleOptions& options = {});

}  // namespace hybrid
