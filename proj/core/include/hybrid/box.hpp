#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hybrid/types.hpp"

namespace hybrid {

/// One coordinate range of a box. Infinite endpoints are always open.
struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool lower_closed = false;
  bool upper_closed = false;

  static Interval real_line() { return {}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval at_least(double lo) {
    return {lo, std::numeric_limits<double>::infinity(), true, false};
  }
  static Interval greater_than(double lo) {
    return {lo, std::numeric_limits<double>::infinity(), false, false};
  }

  bool lower_finite() const { return std::isfinite(lower); }
  bool upper_finite() const { return std::isfinite(upper); }

  /// Membership with an outward slack of `tol` on every endpoint.
  bool contains(double x, double tol = 0.0) const;

  /// Nearest point of the closure.
  double clamp(double x) const;

  std::string to_string() const;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box, the chart used for every node state space.
/// A box of dimension zero is a single point.
class BoxSpace {
 public:
  BoxSpace() = default;
  explicit BoxSpace(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {}

  static BoxSpace point() { return BoxSpace{}; }
  static BoxSpace real(std::size_t dim) {
    return BoxSpace(std::vector<Interval>(dim, Interval::real_line()));
  }

  std::size_t dim() const { return intervals_.size(); }
  const std::vector<Interval>& intervals() const { return intervals_; }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }

  bool contains(const Vector& x, double tol = 0.0) const;

  /// Index of the first coordinate outside the box, or dim() if none.
  std::size_t first_violation(const Vector& x, double tol = 0.0) const;

  /// Projects onto the closure of the box.
  Vector clamp(const Vector& x) const;

  /// Cartesian product, coordinates of `*this` first.
  BoxSpace times(const BoxSpace& other) const;

  bool well_formed() const;

  std::string to_string() const;

  friend bool operator==(const BoxSpace&, const BoxSpace&) = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace hybrid
