#pragma once

#include <string>
#include <vector>

namespace hybrid {

/// List of violated conditions; empty means the checked object is valid.
struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string message) { violations.push_back(std::move(message)); }
  void merge(const ValidationReport& other, const std::string& prefix = {}) {
    for (const auto& v : other.violations) violations.push_back(prefix + v);
  }
};

}  // namespace hybrid
