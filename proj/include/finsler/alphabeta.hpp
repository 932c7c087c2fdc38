#pragma once

// (alpha, beta)-metrics F = alpha phi(beta / alpha): closed forms for the
// fundamental tensor, the spray split G = G_alpha + P y + Q^i, covariant data
// of beta, and the Killing-form identities. Derivatives of phi come from the
// jet engine run in the single variable s.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/fit.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

struct AlphaBetaData {
  EvalPoint at;
  int n = 0;
  double alpha = 0.0, beta = 0.0, s = 0.0, b2 = 0.0;
  double phi = 0.0, dphi = 0.0, d2phi = 0.0, d3phi = 0.0;
  double rho = 0.0, rho0 = 0.0, rho1 = 0.0;
  double Q = 0.0, Theta = 0.0, Psi = 0.0;

  std::vector<double> a, a_inv;   // n x n
  std::vector<double> b_lower, b_upper;
  std::vector<double> alpha_christoffel;  // [(m*n + i)*n + j]
  std::vector<double> r, s_ij;     // r_ij, s_ij (n x n)
  std::vector<double> r_j, s_j;
  std::vector<double> r_i0, s_i0, s_up0;  // r_i0, s_i0, s^i_0
  double r00 = 0.0, r0 = 0.0, s0 = 0.0;
};

/// Taylor coefficients c[m] = f^(m)(s0) / m!, m = 0..order, of a function of
/// one variable evaluated on jets.
std::vector<double> univariate_taylor(const std::function<Jet(const Jet&)>& f, double s0, int order);
/// f^(k) composed with the jet s, from the Taylor data of f at s.value().
Jet compose_derivative(const std::function<Jet(const Jet&)>& f, const Jet& s, int k);

/// Q(s) = phi' / (phi - s phi') as a function on jets.
std::function<Jet(const Jet&)> q_function(const Metric& metric);

AlphaBetaData alpha_beta_data(const Metric& metric, const EvalPoint& p);

// ---------------------------------------------------------------------------
// Regularity

/// phi and its first two derivatives at s.
using PhiEvaluator = std::function<std::array<double, 3>(double)>;

PhiEvaluator phi_evaluator(const Metric& metric);
/// phi = exp(int_0^s f), f = (k1 t + k2 sqrt(b^2 - t^2)) / (1 + t (k1 t + k2 sqrt(b^2 - t^2))),
/// with the integral by Gauss-Legendre quadrature.
PhiEvaluator exponential_family_phi(double k1, double k2, double b, double c = 1.0);

struct RegularityResult {
  bool pass = true;
  double b0 = 0.0;
  // first violation
  double s = 0.0;
  double b = 0.0;
  double value = 0.0;
  std::string reason;
};

/// Grid check (step 1e-3) of phi(s) > 0 for |s| <= b0 and
/// phi - s phi' + (b^2 - s^2) phi'' > 0 for |s| <= b <= b0. The second
/// condition is linear in b^2, so b = |s| and b = b0 are the extremes.
RegularityResult regularity_check(const PhiEvaluator& phi, double b0, double step = 1e-3);
/// b0 = 1.05 max ||beta|| over 1000 seeded points of the region.
double default_b0(const Metric& metric);

struct RandersFit {
  bool randers_type = false;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double max_deviation = 0.0;
};
/// Best fit of phi to c1 sqrt(1 + c2 s^2) + c3 s on |s| <= b0.
RandersFit randers_fit(const PhiEvaluator& phi, double b0, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Closed forms

struct ClosedFormG {
  std::vector<double> g;  // n x n
  double det = 0.0;
};
ClosedFormG gij_closed_form(const Metric& metric, const EvalPoint& p);

struct GeodesicSplit {
  double P = 0.0;
  std::vector<double> Q;       // Q^i
  std::vector<double> G_alpha; // spray of alpha
  std::vector<double> G;       // G_alpha + P y + Q
};
GeodesicSplit geodesic_split(const Metric& metric, const EvalPoint& p);

/// Berwald curvature from (alpha Q)_{.j.k} s^i_l + ... + (alpha Q)_{.j.k.l} s^i_0,
/// valid when r_ij = 0 and s_i = 0. Layout [j][i][k][l].
TensorSample berwald_closed_form(const Metric& metric, const EvalPoint& p);

/// Throws NumericError listing ||r_ij|| and ||s_i|| unless both are below tol.
void require_killing(const AlphaBetaData& d, double tol = 1e-7);

/// Lemma identities and the (alpha Q) expansions, evaluated with the
/// Berwald connection of F.
std::vector<IdentityValue> killing_lemma_suite(const Metric& metric, const EvalPoint& p);

struct WgdwCondition {
  FitResult fit;        // lambda, residual with y_m = g_mr y^r
  double u = 0.0, v = 0.0;
  double u_alpha = 0.0, v_alpha = 0.0;  // same with y_m = a_mr y^r
};
/// b^l (s^m_{l|0|0} + lambda F s^m_{l|0}) y_m = 0 solved for lambda.
WgdwCondition wgdw_condition_check(const Metric& metric, const EvalPoint& p);
/// Hypotheses of the condition: non-Randers phi, r = 0, s_i = 0, s_ij != 0.
/// Returns the violated ones (empty when all hold).
std::vector<std::string> wgdw_condition_hypotheses(const Metric& metric, const std::vector<EvalPoint>& points);

}  // namespace finsler
