#include "finsler/alphabeta.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "finsler/sampling.hpp"

namespace finsler {

namespace {

void require_alpha_beta(const Metric& m) {
  if (!m.spec().is_alpha_beta()) throw InputError("'" + m.spec().name + "' is not an (alpha, beta)-metric");
}

std::shared_ptr<const Metric> borrow(const Metric& m) {
  return std::shared_ptr<const Metric>(&m, [](const Metric*) {});
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// d^|idx| f / dy^idx at the expansion point.
double ypartial(const Jet& f, int n, std::initializer_list<int> idx) {
  std::vector<int> e(2 * n, 0);
  for (int i : idx) ++e[n + i];
  return f.partial(e);
}

Eigen::MatrixXd a_matrix(const Metric& m, std::span<const double> x) {
  const int n = m.dim();
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = m.a(i, j, x);
  }
  return a;
}

struct YJets {
  Jet alpha, beta, s;
};

YJets y_jets(const Metric& m, const Frame& fr) {
  const int n = m.dim();
  Jet a2(fr.cfg);
  Jet beta(fr.cfg);
  std::vector<Jet> b;
  for (int i = 0; i < n; ++i) b.push_back(m.b(i, fr.x));
  for (int i = 0; i < n; ++i) {
    beta += b[i] * fr.y[i];
    for (int j = 0; j < n; ++j) a2 += m.a(i, j, fr.x) * fr.y[i] * fr.y[j];
  }
  YJets out{sqrt(a2), beta, Jet(fr.cfg)};
  out.s = out.beta / out.alpha;
  return out;
}

}  // namespace

std::vector<double> univariate_taylor(const std::function<Jet(const Jet&)>& f, double s0, int order) {
  const JetConfig cfg{2, std::max(order, 1)};
  const Jet v = f(Jet::variable(cfg, 0, s0));
  std::vector<double> c(order + 1);
  for (int m = 0; m <= order; ++m) {
    const int e[2] = {m, 0};
    c[m] = v.coeff(e);
  }
  return c;
}

Jet compose_derivative(const std::function<Jet(const Jet&)>& f, const Jet& s, int k) {
  const int K = s.order();
  const auto c = univariate_taylor(f, s.value(), K + k);
  std::vector<double> d(K + 1);
  for (int m = 0; m <= K; ++m) d[m] = c[m + k] * factorial(m + k) / factorial(m);
  return compose(s, d);
}

std::function<Jet(const Jet&)> q_function(const Metric& metric) {
  return [&metric](const Jet& s) {
    const Jet phi = metric.phi(s);
    const Jet dphi = compose_derivative([&metric](const Jet& t) { return metric.phi(t); }, s, 1);
    return dphi / (phi - s * dphi);
  };
}

AlphaBetaData alpha_beta_data(const Metric& metric, const EvalPoint& p) {
  require_alpha_beta(metric);
  const int n = metric.dim();
  AlphaBetaData d;
  d.at = p;
  d.n = n;
  Frame fr(p, 1);

  std::vector<Jet> aj(n * n), bj(n);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    bj[i] = metric.b(i, fr.x);
    for (int j = 0; j < n; ++j) {
      aj[i * n + j] = metric.a(i, j, fr.x);
      a(i, j) = aj[i * n + j].value();
    }
  }
  const Eigen::MatrixXd ainv = a.inverse();
  d.a.resize(n * n);
  d.a_inv.resize(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d.a[i * n + j] = a(i, j);
      d.a_inv[i * n + j] = ainv(i, j);
    }
  }
  d.b_lower.resize(n);
  d.b_upper.assign(n, 0.0);
  for (int i = 0; i < n; ++i) d.b_lower[i] = bj[i].value();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d.b_upper[i] += ainv(i, j) * d.b_lower[j];
  }

  // Christoffel symbols of alpha.
  auto da = [&](int i, int j, int k) { return aj[i * n + j].d1(k); };
  d.alpha_christoffel.assign(n * n * n, 0.0);
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += ainv(m, k) * (da(k, j, i) + da(k, i, j) - da(i, j, k));
        d.alpha_christoffel[(m * n + i) * n + j] = 0.5 * v;
      }
    }
  }
  d.r.assign(n * n, 0.0);
  d.s_ij.assign(n * n, 0.0);
  std::vector<double> cov(n * n);  // b_{i||j}
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = bj[i].d1(j);
      for (int m = 0; m < n; ++m) v -= d.alpha_christoffel[(m * n + i) * n + j] * d.b_lower[m];
      cov[i * n + j] = v;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d.r[i * n + j] = 0.5 * (cov[i * n + j] + cov[j * n + i]);
      d.s_ij[i * n + j] = 0.5 * (cov[i * n + j] - cov[j * n + i]);
    }
  }
  d.r_j.assign(n, 0.0);
  d.s_j.assign(n, 0.0);
  d.r_i0.assign(n, 0.0);
  d.s_i0.assign(n, 0.0);
  d.s_up0.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      d.r_j[j] += d.b_upper[i] * d.r[i * n + j];
      d.s_j[j] += d.b_upper[i] * d.s_ij[i * n + j];
      d.r_i0[j] += d.r[j * n + i] * p.y[i];
      d.s_i0[j] += d.s_ij[j * n + i] * p.y[i];
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) d.s_up0[i] += ainv(i, k) * d.s_i0[k];
    d.r00 += d.r_i0[i] * p.y[i];
    d.r0 += d.r_j[i] * p.y[i];
    d.s0 += d.s_j[i] * p.y[i];
  }

  double a2 = 0.0;
  for (int i = 0; i < n; ++i) {
    d.beta += d.b_lower[i] * p.y[i];
    d.b2 += d.b_lower[i] * d.b_upper[i];
    for (int j = 0; j < n; ++j) a2 += a(i, j) * p.y[i] * p.y[j];
  }
  if (!(a2 > 0.0)) throw DomainError("alpha is not positive at the point");
  d.alpha = std::sqrt(a2);
  d.s = d.beta / d.alpha;

  const auto c = univariate_taylor([&metric](const Jet& t) { return metric.phi(t); }, d.s, 3);
  d.phi = c[0];
  d.dphi = c[1];
  d.d2phi = 2.0 * c[2];
  d.d3phi = 6.0 * c[3];
  const double ph = d.phi, p1 = d.dphi, p2 = d.d2phi, s = d.s;
  d.rho = ph * (ph - s * p1);
  d.rho0 = ph * p2 + p1 * p1;
  d.rho1 = s * (ph * p2 + p1 * p1) - ph * p1;
  const double den = (ph - s * p1) + (d.b2 - s * s) * p2;
  d.Q = p1 / (ph - s * p1);
  d.Theta = (ph * p1 - s * (ph * p2 + p1 * p1)) / (2.0 * ph * den);
  d.Psi = 0.5 * p2 / den;
  return d;
}

// ---------------------------------------------------------------------------
// Regularity

PhiEvaluator phi_evaluator(const Metric& metric) {
  require_alpha_beta(metric);
  return [&metric](double s) -> std::array<double, 3> {
    const auto c = univariate_taylor([&metric](const Jet& t) { return metric.phi(t); }, s, 2);
    return {c[0], c[1], 2.0 * c[2]};
  };
}

PhiEvaluator exponential_family_phi(double k1, double k2, double b, double c) {
  auto f = [k1, k2, b](const Jet& t) {
    const Jet w = k1 * t + k2 * sqrt(b * b - t * t);
    return w / (1.0 + t * w);
  };
  std::vector<double> nodes, weights;
  gauss_legendre(64, nodes, weights);
  return [f, c, nodes, weights](double s) -> std::array<double, 3> {
    double integral = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double t = 0.5 * s * (nodes[q] + 1.0);
      integral += 0.5 * s * weights[q] * f(Jet::constant({2, 1}, t)).value();
    }
    const double phi = c * std::exp(integral);
    const Jet fs = f(Jet::variable({2, 1}, 0, s));
    const double fv = fs.value();
    return {phi, fv * phi, (fs.d1(0) + fv * fv) * phi};
  };
}

RegularityResult regularity_check(const PhiEvaluator& phi, double b0, double step) {
  if (!(b0 > 0.0) || !(step > 0.0)) throw InputError("regularity check needs b0 > 0 and step > 0");
  RegularityResult res;
  res.b0 = b0;
  const int half = static_cast<int>(std::ceil(b0 / step));
  for (int k = -half; k <= half; ++k) {
    const double s = b0 * k / half;
    std::array<double, 3> v{};
    try {
      v = phi(s);
    } catch (const Error& e) {
      res = {false, b0, s, std::abs(s), std::numeric_limits<double>::quiet_NaN(),
             std::string("phi is not smooth here: ") + e.what()};
      return res;
    }
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
      res = {false, b0, s, std::abs(s), std::numeric_limits<double>::quiet_NaN(), "phi or a derivative is not finite"};
      return res;
    }
    if (!(v[0] > 0.0)) {
      res = {false, b0, s, std::abs(s), v[0], "phi(s) > 0 fails"};
      return res;
    }
    for (double b : {std::abs(s), b0}) {
      const double w = v[0] - s * v[1] + (b * b - s * s) * v[2];
      if (!(w > 0.0)) {
        res = {false, b0, s, b, w, "phi - s phi' + (b^2 - s^2) phi'' > 0 fails"};
        return res;
      }
    }
  }
  return res;
}

double default_b0(const Metric& metric) {
  require_alpha_beta(metric);
  const int n = metric.dim();
  Pcg64 rng(0xb0);
  double best = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto x = sample_in_region(metric.spec().region, n, rng);
    const Eigen::MatrixXd ainv = a_matrix(metric, x).inverse();
    double b2 = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b2 += ainv(i, j) * metric.b(i, x) * metric.b(j, x);
    }
    best = std::max(best, std::sqrt(std::max(b2, 0.0)));
  }
  return 1.05 * best;
}

RandersFit randers_fit(const PhiEvaluator& phi, double b0, double tol) {
  constexpr int kGrid = 201;
  std::vector<double> s(kGrid), f(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    s[k] = b0 * (2.0 * k / (kGrid - 1) - 1.0);
    f[k] = phi(s[k])[0];
  }
  // For fixed c2 the fit is linear in (c1, c3).
  auto solve = [&](double c2, RandersFit& out) {
    Eigen::MatrixXd A(kGrid, 2);
    Eigen::VectorXd rhs(kGrid);
    for (int k = 0; k < kGrid; ++k) {
      const double q = 1.0 + c2 * s[k] * s[k];
      if (q <= 0.0) return std::numeric_limits<double>::infinity();
      A(k, 0) = std::sqrt(q);
      A(k, 1) = s[k];
      rhs(k) = f[k];
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(rhs);
    const double dev = (A * c - rhs).cwiseAbs().maxCoeff();
    out.c1 = c(0);
    out.c2 = c2;
    out.c3 = c(1);
    out.max_deviation = dev;
    return dev;
  };
  const double lo = -0.999 / (b0 * b0);
  const double hi = 10.0 / (b0 * b0);
  RandersFit best;
  best.max_deviation = std::numeric_limits<double>::infinity();
  double best_c2 = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double c2 = lo + (hi - lo) * k / 400.0;
    RandersFit t;
    if (solve(c2, t) < best.max_deviation) {
      best = t;
      best_c2 = c2;
    }
  }
  // Golden-section refinement around the best grid value.
  double a = std::max(lo, best_c2 - (hi - lo) / 400.0);
  double b = std::min(hi, best_c2 + (hi - lo) / 400.0);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    const double m1 = b - gr * (b - a);
    const double m2 = a + gr * (b - a);
    RandersFit t1, t2;
    const double d1 = solve(m1, t1);
    const double d2 = solve(m2, t2);
    if (d1 < best.max_deviation) best = t1;
    if (d2 < best.max_deviation) best = t2;
    if (d1 < d2) {
      b = m2;
    } else {
      a = m1;
    }
  }
  best.randers_type = best.max_deviation < tol && best.c1 > 0.0;
  return best;
}

// ---------------------------------------------------------------------------
// Closed forms

ClosedFormG gij_closed_form(const Metric& metric, const EvalPoint& p) {
  const AlphaBetaData d = alpha_beta_data(metric, p);
  const int n = d.n;
  std::vector<double> ad(n, 0.0);  // alpha_.i
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) ad[i] += d.a[i * n + j] * p.y[j];
    ad[i] /= d.alpha;
  }
  ClosedFormG out;
  out.g.resize(n * n);
  const auto& b = d.b_lower;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.g[i * n + j] = d.rho * d.a[i * n + j] + d.rho0 * b[i] * b[j] - d.rho1 * (b[i] * ad[j] + b[j] * ad[i]) +
                         d.s * d.rho1 * ad[i] * ad[j];
    }
  }
  const double ps = d.phi - d.s * d.dphi;
  const Eigen::Map<const Eigen::MatrixXd> a(d.a.data(), n, n);
  out.det = std::pow(d.phi, n + 1) * std::pow(ps, n - 2) * (ps + (d.b2 - d.s * d.s) * d.d2phi) * a.determinant();
  return out;
}

GeodesicSplit geodesic_split(const Metric& metric, const EvalPoint& p) {
  const AlphaBetaData d = alpha_beta_data(metric, p);
  const int n = d.n;
  GeodesicSplit out;
  const double bracket = d.r00 - 2.0 * d.alpha * d.Q * d.s0;
  out.P = d.Theta * bracket / d.alpha;
  out.Q.resize(n);
  for (int i = 0; i < n; ++i) out.Q[i] = d.alpha * d.Q * d.s_up0[i] + d.Psi * bracket * d.b_upper[i];

  Frame fr(p, 3);
  Jet a2(fr.cfg);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a2 += metric.a(i, j, fr.x) * fr.y[i] * fr.y[j];
  }
  const auto Ga = spray_from_f2(a2, fr.y);
  out.G_alpha.resize(n);
  out.G.resize(n);
  for (int i = 0; i < n; ++i) {
    out.G_alpha[i] = Ga[i].value();
    out.G[i] = out.G_alpha[i] + out.P * p.y[i] + out.Q[i];
  }
  return out;
}

TensorSample berwald_closed_form(const Metric& metric, const EvalPoint& p) {
  const AlphaBetaData d = alpha_beta_data(metric, p);
  const int n = d.n;
  Frame fr(p, 3);
  const YJets yj = y_jets(metric, fr);
  const Jet X = yj.alpha * compose(yj.s, univariate_taylor(q_function(metric), yj.s.value(), 3));
  std::vector<double> s_up(n * n, 0.0);  // s^i_l
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) s_up[i * n + l] += d.a_inv[i * n + k] * d.s_ij[k * n + l];
    }
  }
  TensorSample B;
  B.label = "B";
  B.dim = n;
  B.variance = "lull";
  B.at = p;
  B.values.assign(n * n * n * n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          B.values[((j * n + i) * n + k) * n + l] =
              ypartial(X, n, {j, k}) * s_up[i * n + l] + ypartial(X, n, {j, l}) * s_up[i * n + k] +
              ypartial(X, n, {l, k}) * s_up[i * n + j] + ypartial(X, n, {j, k, l}) * d.s_up0[i];
        }
      }
    }
  }
  return B;
}

void require_killing(const AlphaBetaData& d, double tol) {
  const double r = frobenius(d.r);
  const double si = frobenius(d.s_j);
  if (r > tol || si > tol) {
    throw NumericError("hypotheses r_ij = 0, s_i = 0 do not hold: |r_ij| = " + std::to_string(r) +
                       ", |s_i| = " + std::to_string(si));
  }
}

// ---------------------------------------------------------------------------
// Lemma identities

namespace {

/// Value and term scale of T_{...|0} contracted with b on every index.
IdentityValue contracted_h0(const std::string& name, const JetTensor& T, const SprayJets& S,
                            std::span<const double> b, double factor = 1.0) {
  const JetTensor H = horizontal_derivative_0(T, S);
  const auto scale = horizontal_term_scale(T, S);
  double v = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < H.size(); ++k) {
    double w = 1.0;
    for (int i : H.unflat(k)) w *= b[i];
    v += H[k].value() * w;
    ref += scale[k] * std::abs(w);
  }
  v *= factor;
  ref *= std::abs(factor);
  return {name, ref > 0.0 ? std::abs(v) / ref : std::abs(v), ref};
}

IdentityValue compare(const std::string& name, std::span<const double> lhs, std::span<const double> rhs) {
  std::vector<double> diff(lhs.size());
  for (std::size_t k = 0; k < lhs.size(); ++k) diff[k] = lhs[k] - rhs[k];
  const double ref = frobenius(lhs) + frobenius(rhs);
  const double r = frobenius(diff);
  return {name, ref > 0.0 ? r / ref : r, ref};
}

}  // namespace

std::vector<IdentityValue> killing_lemma_suite(const Metric& metric, const EvalPoint& p) {
  const AlphaBetaData d = alpha_beta_data(metric, p);
  require_killing(d);
  const int n = d.n;
  MetricSpray spray(borrow(metric));
  const SprayJets S = spray_jets(spray, p, 2);
  Frame fr(p, 4);
  const YJets yj = y_jets(metric, fr);
  const auto qf = q_function(metric);
  const Jet Q = compose(yj.s, univariate_taylor(qf, yj.s.value(), 4));
  const Jet X = yj.alpha * Q;

  const JetTensor alpha = scalar_tensor(yj.alpha, n);
  const JetTensor s = scalar_tensor(yj.s, n);
  const JetTensor aq = scalar_tensor(X, n);
  const JetTensor a1 = vertical_derivative(alpha, S);
  const JetTensor a2 = vertical_derivative(a1, S);
  const JetTensor a3 = vertical_derivative(a2, S);
  const JetTensor s1 = vertical_derivative(s, S);
  const JetTensor q2 = vertical_derivative(vertical_derivative(aq, S), S);
  const JetTensor q3 = vertical_derivative(q2, S);
  const auto& b = d.b_upper;

  std::vector<IdentityValue> out;
  out.push_back(contracted_h0("s_|0", s, S, b));
  out.push_back(contracted_h0("alpha_|0", alpha, S, b));
  out.push_back(contracted_h0("alpha_.k|0 b^k", a1, S, b));
  out.push_back(contracted_h0("alpha s_.j|0 b^j", s1, S, b, d.alpha));
  out.push_back(contracted_h0("alpha_.j.k|0 b^j b^k", a2, S, b));
  out.push_back(contracted_h0("alpha_.j.k.l|0 b^j b^k b^l", a3, S, b));
  out.push_back(contracted_h0("(alpha Q)_.j.k|0 b^j b^k", q2, S, b));
  out.push_back(contracted_h0("(alpha Q)_.j.k.l|0 b^j b^k b^l", q3, S, b));

  // Expansions of (alpha Q) derivatives.
  const auto qc = univariate_taylor(qf, d.s, 3);
  const double q0 = qc[0], q1 = qc[1], qq2 = 2.0 * qc[2], qq3 = 6.0 * qc[3];
  const double sv = d.s, al = d.alpha;
  auto A1 = [&](int j) { return ypartial(yj.alpha, n, {j}); };
  auto A2 = [&](int j, int k) { return ypartial(yj.alpha, n, {j, k}); };
  auto S1 = [&](int j) { return ypartial(yj.s, n, {j}); };
  std::vector<double> l1, r1, l2, r2, l3, r3, ls, rs;
  for (int j = 0; j < n; ++j) {
    l1.push_back(ypartial(X, n, {j}));
    r1.push_back((q0 - sv * q1) * A1(j) + d.b_lower[j] * q1);
    for (int k = 0; k < n; ++k) {
      l2.push_back(ypartial(X, n, {j, k}));
      r2.push_back((q0 - sv * q1) * A2(j, k) + al * qq2 * S1(j) * S1(k));
      ls.push_back(al * ypartial(yj.s, n, {j, k}));
      rs.push_back(-sv * A2(j, k) - A1(j) * S1(k) - A1(k) * S1(j));
      for (int l = 0; l < n; ++l) {
        l3.push_back(ypartial(X, n, {j, k, l}));
        r3.push_back((q0 - sv * q1) * ypartial(yj.alpha, n, {j, k, l}) -
                     qq2 * (sv * (S1(j) * A2(k, l) + S1(k) * A2(j, l) + S1(l) * A2(k, j)) +
                            (A1(j) * S1(k) * S1(l) + A1(k) * S1(j) * S1(l) + A1(l) * S1(k) * S1(j))) +
                     al * qq3 * S1(j) * S1(k) * S1(l));
      }
    }
  }
  out.push_back(compare("alpha s_.j.l expansion", ls, rs));
  out.push_back(compare("(alpha Q)_.j expansion", l1, r1));
  out.push_back(compare("(alpha Q)_.j.k expansion", l2, r2));
  out.push_back(compare("(alpha Q)_.j.k.l expansion", l3, r3));
  return out;
}

// ---------------------------------------------------------------------------
// W-GDW condition

WgdwCondition wgdw_condition_check(const Metric& metric, const EvalPoint& p) {
  const AlphaBetaData d = alpha_beta_data(metric, p);
  const int n = d.n;
  MetricSpray spray(borrow(metric));
  const SprayJets S = spray_jets(spray, p, 4);
  Frame fr(p, 4);
  std::vector<Jet> b, a;
  for (int i = 0; i < n; ++i) b.push_back(metric.b(i, fr.x));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a.push_back(metric.a(i, j, fr.x));
  }
  const auto ainv = invert(a, n);
  // s_ij = (b_i,j - b_j,i) / 2; the Christoffel terms cancel.
  JetTensor T(n, "ul", JetConfig{2 * n, 3});
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      Jet v(JetConfig{2 * n, 3});
      for (int i = 0; i < n; ++i) {
        v += ainv[m * n + i] * (b[i].derivative(fr.xvar(l)) - b[l].derivative(fr.xvar(i))) * 0.5;
      }
      T.at({m, l}) = v;
    }
  }
  const JetTensor T1 = horizontal_derivative_0(T, S);
  const JetTensor T2 = horizontal_derivative_0(T1, S);
  const FundamentalData fd = fundamental_tensor(metric, p);
  std::vector<double> ya(n, 0.0);
  for (int m = 0; m < n; ++m) {
    for (int r = 0; r < n; ++r) ya[m] += d.a[m * n + r] * p.y[r];
  }
  WgdwCondition out;
  double scale = 0.0;
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      const double t1 = T1.at({m, l}).value() * d.b_upper[l];
      const double t2 = T2.at({m, l}).value() * d.b_upper[l];
      out.u += t2 * fd.y_lower[m];
      out.v += t1 * fd.y_lower[m];
      out.u_alpha += t2 * ya[m];
      out.v_alpha += t1 * ya[m];
      scale = std::max({scale, std::abs(t1), std::abs(t2)});
    }
  }
  const double F = fd.F;
  const double eps = 1e-10 * std::max(scale, 1.0);
  double lambda = 0.0;
  if (std::abs(out.v) > eps) {
    lambda = -out.u / (F * out.v);
  } else {
    out.fit.note = std::abs(out.u) > eps ? "v = 0 with u != 0: no lambda solves the condition"
                                          : "u = v = 0: condition holds for every lambda";
    out.fit.vacuous = std::abs(out.u) <= eps;
  }
  out.fit.set("lambda", {lambda});
  out.fit.reference = std::abs(out.u) + std::abs(out.v);
  out.fit.residual = std::abs(out.u + lambda * F * out.v) / (out.fit.reference + 1e-300);
  if (out.fit.vacuous) out.fit.residual = 0.0;
  return out;
}

std::vector<std::string> wgdw_condition_hypotheses(const Metric& metric, const std::vector<EvalPoint>& points) {
  std::vector<std::string> bad;
  if (!metric.spec().is_alpha_beta()) {
    bad.push_back("not an (alpha, beta)-metric");
    return bad;
  }
  const RandersFit rf = randers_fit(phi_evaluator(metric), default_b0(metric));
  if (rf.randers_type) bad.push_back("phi is of Randers type (max deviation " + std::to_string(rf.max_deviation) + ")");
  double r = 0.0, si = 0.0, sij = 0.0;
  for (const auto& p : points) {
    const AlphaBetaData d = alpha_beta_data(metric, p);
    r = std::max(r, frobenius(d.r));
    si = std::max(si, frobenius(d.s_j));
    sij = std::max(sij, frobenius(d.s_ij));
  }
  if (r > 1e-7) bad.push_back("r_ij != 0 (max " + std::to_string(r) + ")");
  if (si > 1e-7) bad.push_back("s_i != 0 (max " + std::to_string(si) + ")");
  if (sij < 1e-3) bad.push_back("beta is closed (max |s_ij| " + std::to_string(sij) + ")");
  return bad;
}

}  // namespace finsler
