#pragma once

// Curvature tensors of a spray. A CurvatureBundle evaluates the spray once
// per point at a fixed jet order and derives every tensor from it on demand.
//
// Index layouts (written order, variance):
//   R^i_k "ul", R^i_kl "ull", R_j^i_kl "lull", Ric scalar,
//   B, D, Dtilde, W_j^i_kl, Wtilde "lull", E, H "ll",
//   Dtilde_|m "lullL", stretch Douglas "lulll", W^i_k "ul", theta "lll".

#include <map>
#include <optional>
#include <string>

#include "finsler/geometry.hpp"

namespace finsler {

/// How "R_{.l}" inside theta is read: the Ricci scalar, or Ric/(n-1) as in
/// the Weyl curvature. Only the latter satisfies the W/D/theta identity.
enum class ThetaReading { ricci, ricci_over_n1 };

class CurvatureBundle {
 public:
  /// `f2_order` is the F^2 jet order the spray is evaluated at (G gets
  /// f2_order - 2).
  CurvatureBundle(const Spray& spray, const EvalPoint& p, int f2_order);

  int dim() const { return S_.n; }
  const EvalPoint& point() const { return S_.p; }
  const SprayJets& spray() const { return S_; }
  int g_order() const { return g_order_; }

  const JetTensor& G();
  const JetTensor& R();
  const JetTensor& Ric();
  const JetTensor& R_kl();
  const JetTensor& R_jkl();
  const JetTensor& B();
  const JetTensor& E();
  const JetTensor& H();
  const JetTensor& D();
  /// Douglas tensor from B and E (second form).
  const JetTensor& D_from_E();
  const JetTensor& Dtilde();
  const JetTensor& Dtilde_m();
  const JetTensor& Dtilde_0();
  const JetTensor& stretch_douglas();
  const JetTensor& D_m();
  const JetTensor& W();
  const JetTensor& W_jkl();
  const JetTensor& Wtilde();
  const JetTensor& Wtilde_0();
  const JetTensor& theta(ThetaReading reading = ThetaReading::ricci_over_n1);

  /// Sampled tensor by registry name (see tensor_names()).
  TensorSample sample(const std::string& name);
  static const std::vector<std::string>& tensor_names();

 private:
  void need(Quantity q, const char* what) const;

  SprayJets S_;
  int g_order_;
  std::map<std::string, JetTensor> cache_;
};

// Free-standing formulas, usable on any SprayJets.
JetTensor riemann_jets(const SprayJets& S);
JetTensor berwald_jets(const SprayJets& S);
JetTensor mean_berwald_jets(const JetTensor& B);
JetTensor douglas_jets(const SprayJets& S, const JetTensor& B);
JetTensor douglas_from_mean(const SprayJets& S, const JetTensor& B, const JetTensor& E);
JetTensor ricci_jets(const JetTensor& R);
JetTensor weyl_jets(const SprayJets& S, const JetTensor& R, const JetTensor& Ric);
/// Y^i_kl = (X^i_{k.l} - X^i_{l.k}) / 3 for X "ul".
JetTensor antisym_vertical(const JetTensor& X, const SprayJets& S);

}  // namespace finsler
