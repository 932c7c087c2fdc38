#pragma once

// Projective changes G^i -> G^i + P y^i of a metric's spray and checks of
// what they preserve.

#include <memory>
#include <string>
#include <vector>

#include "finsler/classify.hpp"

namespace finsler {

/// Projective factor P(x, y), positively 1-homogeneous in y. The expression
/// may use x1..xn, y1..yn and the metric's `norm` (F); (alpha, beta)
/// metrics also provide `alpha` and `beta`.
class ProjectiveFactor {
 public:
  /// Throws InputError on unknown identifiers or failed homogeneity.
  ProjectiveFactor(const std::string& text, std::shared_ptr<const Metric> metric);

  const std::string& text() const { return text_; }
  const Metric& metric() const { return *metric_; }
  bool is_zero() const;

  Jet eval(std::span<const Jet> x, std::span<const Jet> y) const;
  double eval(std::span<const double> x, std::span<const double> y) const;

  /// P(x, t y) = t P(x, y) for t in {2, 3} at 5 seeded points, relative 1e-9.
  void check_homogeneity() const;

 private:
  std::string text_;
  std::shared_ptr<const Metric> metric_;
  CompiledExpression expr_;
  bool uses_alpha_ = false, uses_beta_ = false, uses_norm_ = false;
};

class ProjectiveSpray : public Spray {
 public:
  ProjectiveSpray(std::shared_ptr<const Spray> base, ProjectiveFactor P)
      : base_(std::move(base)), P_(std::move(P)) {}
  int dim() const override { return base_->dim(); }
  std::vector<Jet> coefficients(const EvalPoint& p, int order) const override;
  std::string describe() const override { return base_->describe() + " + (" + P_.text() + ") y"; }
  const Spray& base() const { return *base_; }
  const ProjectiveFactor& factor() const { return P_; }

 private:
  std::shared_ptr<const Spray> base_;
  ProjectiveFactor P_;
};

/// Per-point results of the projective checks. Residuals use base-metric g
/// and F for projections and normalisation.
struct ProjectivePoint {
  double douglas = 0.0;              // |D - Dbar| / |D|
  double riemann = 0.0;              // R law, P_|k w.r.t. the base spray
  double riemann_transformed = 0.0;  // same with P_|k w.r.t. the transformed spray
  double d_parallel = 0.0;           // D_||0 - D_|0 - P_.r D^r y
  double berwald_expansion = 0.0;    // Bbar = B + P terms vs direct
  double weyl = 0.0;                 // |Wbar - W| / (|R| + |Rbar|)
  double gdw_base = 0.0, gdw_transformed = 0.0;
  double gdw_projection = 0.0;       // |Cbar - C| / (|C| + |Cbar|), C = projected Dtilde
  FitResult wgdw_base, wgdw_transformed;
  bool lambda_relation_defined = false;
  double lambda_relation = 0.0;  // |lambdabar F - (lambda F + 2P)|
};

ProjectivePoint projective_point(const Metric& metric, const ProjectiveFactor& P, const EvalPoint& p,
                                 const ClassifyOptions& o);

}  // namespace finsler
