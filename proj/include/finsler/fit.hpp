#pragma once

#include <string>
#include <utility>
#include <vector>

namespace finsler {

/// Outcome of one residual test at one point. Parameters are the fitted
/// free scalars or covectors of the defining equation, in insertion order.
struct FitResult {
  std::vector<std::pair<std::string, std::vector<double>>> params;
  double residual = 0.0;
  double reference = 0.0;
  bool vacuous = false;
  std::string note;

  void set(const std::string& name, std::vector<double> v) { params.emplace_back(name, std::move(v)); }
  /// nullptr when absent.
  const std::vector<double>* param(const std::string& name) const {
    for (const auto& [k, v] : params) {
      if (k == name) return &v;
    }
    return nullptr;
  }
  double scalar(const std::string& name) const {
    const auto* v = param(name);
    return v && !v->empty() ? v->front() : 0.0;
  }
};

/// One named identity evaluated at one point: `residual` is already
/// normalised by `reference`.
struct IdentityValue {
  std::string name;
  double residual = 0.0;
  double reference = 0.0;
};

}  // namespace finsler
