#include "hybrid/box.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybrid {

namespace {

std::string endpoint(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool Interval::contains(double x, double tol) const {
  if (std::isnan(x)) return false;
  const bool above = lower_closed ? x >= lower - tol : x > lower - tol;
  const bool below = upper_closed ? x <= upper + tol : x < upper + tol;
  return above && below;
}

double Interval::clamp(double x) const { return std::clamp(x, lower, upper); }

std::string Interval::to_string() const {
  return std::string(lower_closed ? "[" : "(") + endpoint(lower) + ", " + endpoint(upper) +
         (upper_closed ? "]" : ")");
}

bool BoxSpace::contains(const Vector& x, double tol) const {
  return first_violation(x, tol) == dim() && static_cast<std::size_t>(x.size()) == dim();
}

std::size_t BoxSpace::first_violation(const Vector& x, double tol) const {
  const std::size_t n = std::min<std::size_t>(dim(), static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (!intervals_[i].contains(x[static_cast<Eigen::Index>(i)], tol)) return i;
  }
  return static_cast<std::size_t>(x.size()) == dim() ? dim() : n;
}

Vector BoxSpace::clamp(const Vector& x) const {
  Vector out = x;
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = intervals_[i].clamp(x[k]);
  }
  return out;
}

BoxSpace BoxSpace::times(const BoxSpace& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return BoxSpace(std::move(all));
}

bool BoxSpace::well_formed() const {
  return std::all_of(intervals_.begin(), intervals_.end(), [](const Interval& iv) {
    if (std::isnan(iv.lower) || std::isnan(iv.upper)) return false;
    if (iv.lower > iv.upper) return false;
    if (iv.lower == iv.upper) return iv.lower_closed && iv.upper_closed;
    return true;
  });
}

std::string BoxSpace::to_string() const {
  if (intervals_.empty()) return "point";
  std::string out;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (i) out += " x ";
    out += intervals_[i].to_string();
  }
  return out;
}

}  // namespace hybrid
