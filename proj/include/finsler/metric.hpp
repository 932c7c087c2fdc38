#pragma once

// Metric definitions and the flat key-value metric file format:
//
//   [metric]  name, kind (general | alpha_beta | randers), dim,
//             region_center, region_radius
//   [general] f2 = "expression in x1..xn, y1..yn"
//   [alpha]   a_ij = "expression in x1..xn"   (i <= j only)
//   [beta]    b_i  = "expression in x1..xn"
//   [phi]     phi  = "expression in s"

#include <optional>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"

namespace finsler {

enum class MetricKind { general, alpha_beta, randers };

std::string to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);

/// Ball-shaped sampling region in chart coordinates.
struct Region {
  std::vector<double> center;
  double radius = 1.0;

  bool contains(std::span<const double> x) const;
};

struct MetricSpec {
  std::string name;
  MetricKind kind = MetricKind::general;
  int dim = 0;
  Region region;

  // general
  Expression f2;
  // alpha_beta / randers: upper triangle of a_ij, row-major (i <= j).
  std::vector<Expression> alpha;
  std::vector<Expression> beta;
  Expression phi;

  const Expression& a(int i, int j) const;
  bool is_alpha_beta() const { return kind != MetricKind::general; }

  /// Structural checks (dimensions, variables, symmetric storage). Does not
  /// evaluate anything.
  void validate_structure() const;
};

/// Parses the metric file format. Errors cite line numbers.
MetricSpec parse_metric_file(const std::string& text, const std::string& origin = "<metric>");
MetricSpec load_metric_file(const std::string& path);
std::string format_metric_file(const MetricSpec& spec);

/// Compiled, evaluation-ready metric. Thread-safe after construction.
class Metric {
 public:
  explicit Metric(MetricSpec spec);

  const MetricSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }

  /// F^2 as a jet. `x` and `y` hold one jet per coordinate, all sharing a
  /// configuration (usually 2n variables: x then y).
  Jet f2(std::span<const Jet> x, std::span<const Jet> y) const;
  /// F = sqrt(F^2).
  Jet norm(std::span<const Jet> x, std::span<const Jet> y) const;
  double f2(std::span<const double> x, std::span<const double> y) const;
  double norm(std::span<const double> x, std::span<const double> y) const;

  // (alpha, beta) building blocks; throw InputError for general metrics.
  Jet a(int i, int j, std::span<const Jet> x) const;
  Jet b(int i, std::span<const Jet> x) const;
  double a(int i, int j, std::span<const double> x) const;
  double b(int i, std::span<const double> x) const;
  Jet phi(const Jet& s) const;
  double phi(double s) const;

  /// Norm evaluated for many y directions at a fixed jet-valued x, caching
  /// x-only subexpressions for (alpha, beta) metrics.
  class FiberEvaluator {
   public:
    Jet norm(std::span<const double> y) const;

   private:
    friend class Metric;
    const Metric* metric_ = nullptr;
    std::vector<Jet> x_;
    std::vector<Jet> a_;  // full n x n
    std::vector<Jet> b_;
  };
  FiberEvaluator fiber(std::span<const Jet> x) const;

  /// Checks F^2(x, t y) = t^2 F^2(x, y) for t in {2, 3} at `samples`
  /// deterministic points of the region (relative 1e-9).
  void check_homogeneity(int samples = 5) const;

 private:
  Jet f2_general(std::span<const Jet> x, std::span<const Jet> y) const;

  MetricSpec spec_;
  CompiledExpression f2_;
  std::vector<CompiledExpression> a_;  // upper triangle
  std::vector<CompiledExpression> b_;
  CompiledExpression phi_;
};

/// Variable names x1..xn and y1..yn.
std::vector<std::string> coordinate_names(int dim);

}  // namespace finsler
