#pragma once

#include <compare>
#include <cstdio>
#include <cstddef>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hybrid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Index of a node in a source graph.
struct NodeId {
  std::size_t index = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// Index of an edge in a source graph.
struct EdgeId {
  std::size_t index = 0;
  friend auto operator<=>(const EdgeId&, const EdgeId&) = default;
};

/// Thrown when an input object is malformed or used outside its domain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Concatenates two coordinate vectors.
inline Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

inline double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// printf "%.17g"; round-trips every double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// "(a, b, c)" with 17 significant digits.
inline std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace hybrid
