#include "finsler/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

std::string vec_str(std::span<const double> v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

std::size_t ipow(int n, int r) {
  std::size_t s = 1;
  for (int k = 0; k < r; ++k) s *= static_cast<std::size_t>(n);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Orders

int required_f2_order(Quantity q) {
  // F^2 order K gives G^i of order K-2; each y- or x-derivative and each
  // horizontal derivative costs one order.
  switch (q) {
    case Quantity::g: return 2;
    case Quantity::spray: return 2;
    case Quantity::connection: return 3;
    case Quantity::gamma: return 4;
    case Quantity::riemann: return 4;
    case Quantity::riemann_kl: return 5;
    case Quantity::riemann_jkl: return 6;
    case Quantity::berwald: return 5;
    case Quantity::mean_berwald: return 5;
    case Quantity::weyl: return 5;
    case Quantity::douglas: return 6;
    case Quantity::h_curvature: return 6;
    case Quantity::dtilde: return 7;
    case Quantity::theta: return 7;
    case Quantity::weakly_weyl: return 7;
    case Quantity::rieber: return 7;
    case Quantity::dtilde_0: return 8;
    case Quantity::stretch_douglas: return 8;
    case Quantity::d_recurrent: return 8;
    case Quantity::wtilde: return 8;
    case Quantity::lemma_identity: return 8;
    case Quantity::wtilde_0: return 9;
    case Quantity::s_value: return 3;
    case Quantity::s_hessian: return 5;
  }
  return 9;
}

const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::g: return "g";
    case Quantity::spray: return "G";
    case Quantity::connection: return "N";
    case Quantity::gamma: return "Gamma";
    case Quantity::riemann: return "R";
    case Quantity::riemann_kl: return "R_kl";
    case Quantity::riemann_jkl: return "R_jkl";
    case Quantity::berwald: return "B";
    case Quantity::mean_berwald: return "E";
    case Quantity::douglas: return "D";
    case Quantity::weyl: return "W";
    case Quantity::h_curvature: return "H";
    case Quantity::dtilde: return "Dtilde";
    case Quantity::dtilde_0: return "Dtilde_0";
    case Quantity::stretch_douglas: return "StretchD";
    case Quantity::theta: return "theta";
    case Quantity::weakly_weyl: return "W_jkl";
    case Quantity::rieber: return "RieBer";
    case Quantity::d_recurrent: return "sigma_0";
    case Quantity::wtilde: return "Wtilde";
    case Quantity::lemma_identity: return "lemma";
    case Quantity::wtilde_0: return "Wtilde_0";
    case Quantity::s_value: return "S";
    case Quantity::s_hessian: return "S_yy";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Frame

Frame::Frame(const EvalPoint& point, int order) : p(point) {
  const int n = static_cast<int>(point.x.size());
  if (point.y.size() != point.x.size()) throw InputError("x and y must have the same dimension");
  cfg = {2 * n, order};
  cfg.validate();
  for (int i = 0; i < n; ++i) x.push_back(Jet::variable(cfg, i, point.x[i]));
  for (int i = 0; i < n; ++i) y.push_back(Jet::variable(cfg, n + i, point.y[i]));
}

// ---------------------------------------------------------------------------
// Tensors

double frobenius(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double TensorSample::norm() const { return frobenius(values); }

JetTensor::JetTensor(int dim, std::string variance, JetConfig cfg)
    : dim_(dim), variance_(std::move(variance)), data_(ipow(dim, static_cast<int>(variance_.size())), Jet(cfg)) {}

int JetTensor::order() const {
  int o = 1 << 20;
  for (const auto& j : data_) o = std::min(o, j.order());
  return data_.empty() ? 0 : o;
}

std::size_t JetTensor::flat(std::span<const int> idx) const {
  std::size_t k = 0;
  for (int i : idx) k = k * dim_ + i;
  return k;
}

std::vector<int> JetTensor::unflat(std::size_t k) const {
  std::vector<int> idx(variance_.size());
  for (std::size_t a = idx.size(); a-- > 0;) {
    idx[a] = static_cast<int>(k % dim_);
    k /= dim_;
  }
  return idx;
}

TensorSample JetTensor::sample(const std::string& label, const EvalPoint& at) const {
  TensorSample t;
  t.label = label;
  t.dim = dim_;
  t.variance = variance_;
  t.at = at;
  t.values.reserve(data_.size());
  for (const auto& j : data_) t.values.push_back(j.value());
  return t;
}

JetTensor scalar_tensor(const Jet& f, int dim) {
  JetTensor t(dim, "", f.config());
  t[0] = f;
  return t;
}

// ---------------------------------------------------------------------------
// Jet linear algebra

std::vector<Jet> invert(const std::vector<Jet>& m, int n) {
  std::vector<Jet> a = m;
  std::vector<Jet> inv;
  const JetConfig cfg = m[0].config();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) inv.push_back(Jet::constant(cfg, i == j ? 1.0 : 0.0));
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c].value()) > std::abs(a[piv * n + c].value())) piv = r;
    }
    if (a[piv * n + c].value() == 0.0) throw NumericError("singular jet matrix");
    if (piv != c) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[c * n + j], a[piv * n + j]);
        std::swap(inv[c * n + j], inv[piv * n + j]);
      }
    }
    const Jet r = reciprocal(a[c * n + c]);
    for (int j = 0; j < n; ++j) {
      a[c * n + j] = a[c * n + j] * r;
      inv[c * n + j] = inv[c * n + j] * r;
    }
    for (int rr = 0; rr < n; ++rr) {
      if (rr == c) continue;
      const Jet f = a[rr * n + c];
      if (f.is_constant() && f.value() == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a[rr * n + j] -= f * a[c * n + j];
        inv[rr * n + j] -= f * inv[c * n + j];
      }
    }
  }
  return inv;
}

Jet determinant(const std::vector<Jet>& m, int n) {
  std::vector<Jet> a = m;
  Jet det = Jet::constant(m[0].config(), 1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c].value()) > std::abs(a[piv * n + c].value())) piv = r;
    }
    if (a[piv * n + c].value() == 0.0) return Jet(m[0].config());
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
      det = -det;
    }
    det = det * a[c * n + c];
    const Jet r = reciprocal(a[c * n + c]);
    for (int rr = c + 1; rr < n; ++rr) {
      const Jet f = a[rr * n + c] * r;
      for (int j = c; j < n; ++j) a[rr * n + j] -= f * a[c * n + j];
    }
  }
  return det;
}

// ---------------------------------------------------------------------------
// Fundamental tensor

JetTensor fundamental_jets(const Jet& f2, int n) {
  if (f2.order() < 2) throw OrderError("fundamental tensor", 2, f2.order());
  std::vector<Jet> dy;
  for (int i = 0; i < n; ++i) dy.push_back(f2.derivative(n + i));
  JetTensor g(n, "ll", JetConfig{2 * n, f2.order() - 2});
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      g.at({i, j}) = dy[i].derivative(n + j) * 0.5;
      if (j != i) g.at({j, i}) = g.at({i, j});
    }
  }
  return g;
}

FundamentalData fundamental_tensor(const Metric& metric, const EvalPoint& p) {
  const int n = metric.dim();
  Frame fr(p, 2);
  const Jet f2 = metric.f2(fr.x, fr.y);
  if (!(f2.value() > 0.0)) throw DomainError("F^2 is not positive at x = " + vec_str(p.x) + ", y = " + vec_str(p.y));
  const JetTensor gj = fundamental_jets(f2, n);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = gj.at({i, j}).value();
  }
  // Cholesky with an explicit pivot floor.
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = g(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 1e-12)) {
      throw DomainError("fundamental tensor is not positive definite at x = " + vec_str(p.x) + ", y = " +
                        vec_str(p.y));
    }
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  if (!(cond <= 1e12)) throw DomainError("fundamental tensor is near-singular (condition number " + std::to_string(cond) + ")");
  const Eigen::MatrixXd ginv = g.inverse();

  FundamentalData out;
  out.F = std::sqrt(f2.value());
  out.condition = cond;
  out.y_lower.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.y_lower[i] += g(i, j) * p.y[j];
  }
  auto make = [&](const char* label) {
    TensorSample t;
    t.label = label;
    t.dim = n;
    t.variance = "ll";
    t.at = p;
    t.values.assign(n * n, 0.0);
    return t;
  };
  out.g = make("g");
  out.g_inv = make("g_inv");
  out.g_inv.variance = "uu";
  out.h = make("h");
  const double F2 = f2.value();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.g.values[i * n + j] = g(i, j);
      out.g_inv.values[i * n + j] = ginv(i, j);
      out.h.values[i * n + j] = g(i, j) - out.y_lower[i] * out.y_lower[j] / F2;
    }
  }
  return out;
}

void validate_point(const Metric& metric, const EvalPoint& p) {
  const int n = metric.dim();
  if (static_cast<int>(p.x.size()) != n || static_cast<int>(p.y.size()) != n) {
    throw InputError("point dimension does not match metric dimension " + std::to_string(n));
  }
  if (!metric.spec().region.contains(p.x)) {
    throw DomainError("x = " + vec_str(p.x) + " lies outside the sampling region of '" + metric.spec().name + "'");
  }
  const double ynorm = frobenius(p.y);
  if (ynorm == 0.0) throw DomainError("y must be non-zero");
  const double F = metric.norm(p.x, p.y);
  if (!(F > 1e-6 * ynorm)) throw DomainError("degenerate direction: F = " + std::to_string(F) + " at y = " + vec_str(p.y));
  fundamental_tensor(metric, p);
}

EvalPoint normalized(const Metric& metric, EvalPoint p) {
  const double F = metric.norm(p.x, p.y);
  if (!(F > 0.0)) throw DomainError("F is not positive at y = " + vec_str(p.y));
  for (double& v : p.y) v /= F;
  return p;
}

// ---------------------------------------------------------------------------
// Sprays

std::vector<Jet> spray_from_f2(const Jet& f2, std::span<const Jet> y) {
  const int n = static_cast<int>(y.size());
  const int K = f2.order();
  if (K < 2) throw OrderError("spray coefficients", 2, K);
  const JetTensor g = fundamental_jets(f2, n);
  std::vector<Jet> gm(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) gm[k] = g[k];
  const std::vector<Jet> ginv = invert(gm, n);
  std::vector<Jet> dx;
  for (int k = 0; k < n; ++k) dx.push_back(f2.derivative(k));
  // bracket_l = (d^2 F^2 / dx^k dy^l) y^k - dF^2/dx^l
  std::vector<Jet> bracket;
  for (int l = 0; l < n; ++l) {
    Jet s = -dx[l].truncated(K - 2);
    for (int k = 0; k < n; ++k) s += dx[k].derivative(n + l) * y[k];
    bracket.push_back(s);
  }
  std::vector<Jet> G;
  for (int i = 0; i < n; ++i) {
    Jet s(JetConfig{2 * n, K - 2});
    for (int l = 0; l < n; ++l) s += ginv[i * n + l] * bracket[l];
    G.push_back(s * 0.25);
  }
  return G;
}

std::vector<Jet> MetricSpray::coefficients(const EvalPoint& p, int order) const {
  Frame fr(p, order + 2);
  return spray_from_f2(metric_->f2(fr.x, fr.y), fr.y);
}

SprayJets spray_jets(const Spray& spray, const EvalPoint& p, int g_order) {
  SprayJets S;
  S.p = p;
  S.n = spray.dim();
  const int n = S.n;
  Frame fr(p, std::max(g_order, 1));
  S.y = fr.y;
  S.G = spray.coefficients(p, g_order);
  if (g_order >= 1) {
    S.N.reserve(n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) S.N.push_back(S.G[i].derivative(n + j));
    }
  }
  if (g_order >= 2) {
    S.Gamma.reserve(n * n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          if (k < j) {
            S.Gamma.push_back(S.Gamma[(i * n + k) * n + j]);
          } else {
            S.Gamma.push_back(S.N[i * n + j].derivative(n + k));
          }
        }
      }
    }
  }
  return S;
}

TensorSample spray_coefficients(const Spray& spray, const EvalPoint& p) {
  const auto G = spray.coefficients(p, 1);
  TensorSample t;
  t.label = "G";
  t.dim = spray.dim();
  t.variance = "u";
  t.at = p;
  for (const auto& g : G) t.values.push_back(g.value());
  return t;
}

ConnectionData connection(const Spray& spray, const EvalPoint& p) {
  const SprayJets S = spray_jets(spray, p, 2);
  const int n = S.n;
  ConnectionData c;
  c.G = spray_coefficients(spray, p);
  c.N.label = "N";
  c.N.dim = n;
  c.N.variance = "ul";
  c.N.at = p;
  for (const auto& j : S.N) c.N.values.push_back(j.value());
  c.Gamma.label = "Gamma";
  c.Gamma.dim = n;
  c.Gamma.variance = "ull";
  c.Gamma.at = p;
  for (const auto& j : S.Gamma) c.Gamma.values.push_back(j.value());
  return c;
}

// ---------------------------------------------------------------------------
// Covariant derivatives

namespace {

void require_order(const char* what, const JetTensor& T, const SprayJets& S) {
  if (T.order() < 1) throw OrderError(std::string(what) + " (tensor jet)", 1, T.order());
  if (S.Gamma.empty()) throw OrderError(std::string(what) + " (connection jet)", 2, S.G.empty() ? 0 : S.G[0].order());
}

}  // namespace

JetTensor horizontal_derivative(const JetTensor& T, const SprayJets& S) {
  require_order("horizontal derivative", T, S);
  const int n = S.n;
  const int r = T.rank();
  const JetConfig cfg{2 * n, std::max(0, std::min(T.order() - 1, S.Gamma[0].order()))};
  JetTensor out(n, T.variance() + "l", cfg);
  const std::size_t sz = T.size();
  std::vector<Jet> dx(sz * n), dy(sz * n);
  for (std::size_t k = 0; k < sz; ++k) {
    for (int m = 0; m < n; ++m) {
      dx[k * n + m] = T[k].derivative(S.xvar(m));
      dy[k * n + m] = T[k].derivative(S.yvar(m));
    }
  }
  for (std::size_t k = 0; k < sz; ++k) {
    std::vector<int> idx = T.unflat(k);
    for (int m = 0; m < n; ++m) {
      Jet v = dx[k * n + m];
      for (int q = 0; q < n; ++q) v -= S.Nij(q, m) * dy[k * n + q];
      for (int a = 0; a < r; ++a) {
        const int orig = idx[a];
        for (int q = 0; q < n; ++q) {
          idx[a] = q;
          const Jet& Tq = T[T.flat(idx)];
          if (T.variance()[a] == 'u') {
            v += Tq * S.Gam(orig, q, m);
          } else {
            v -= Tq * S.Gam(q, orig, m);
          }
        }
        idx[a] = orig;
      }
      out[k * n + m] = v;
    }
  }
  return out;
}

JetTensor contract_y(const JetTensor& T, const SprayJets& S) {
  const int n = S.n;
  const std::string var = T.variance().substr(0, T.rank() - 1);
  JetTensor out(n, var, JetConfig{2 * n, std::max(0, T.order())});
  for (std::size_t k = 0; k < out.size(); ++k) {
    Jet s = T[k * n] * S.y[0];
    for (int m = 1; m < n; ++m) s += T[k * n + m] * S.y[m];
    out[k] = s;
  }
  return out;
}

JetTensor horizontal_derivative_0(const JetTensor& T, const SprayJets& S) {
  return contract_y(horizontal_derivative(T, S), S);
}

std::vector<double> horizontal_term_scale(const JetTensor& T, const SprayJets& S) {
  require_order("horizontal derivative", T, S);
  const int n = S.n;
  const int r = T.rank();
  std::vector<double> scale(T.size(), 0.0);
  for (std::size_t k = 0; k < T.size(); ++k) {
    std::vector<int> idx = T.unflat(k);
    double s = 0.0;
    for (int m = 0; m < n; ++m) {
      const double ym = std::abs(S.p.y[m]);
      s = std::max(s, std::abs(T[k].d1(S.xvar(m))) * ym);
      for (int q = 0; q < n; ++q) s = std::max(s, std::abs(S.Nij(q, m).value() * T[k].d1(S.yvar(q))) * ym);
      for (int a = 0; a < r; ++a) {
        const int orig = idx[a];
        for (int q = 0; q < n; ++q) {
          idx[a] = q;
          const double Tq = T[T.flat(idx)].value();
          const double gam = T.variance()[a] == 'u' ? S.Gam(orig, q, m).value() : S.Gam(q, orig, m).value();
          s = std::max(s, std::abs(Tq * gam) * ym);
        }
        idx[a] = orig;
      }
    }
    scale[k] = s;
  }
  return scale;
}

JetTensor vertical_derivative(const JetTensor& T, const SprayJets& S) {
  const int n = S.n;
  if (T.order() < 1) throw OrderError("vertical derivative", 1, T.order());
  JetTensor out(n, T.variance() + "l", JetConfig{2 * n, T.order() - 1});
  for (std::size_t k = 0; k < T.size(); ++k) {
    for (int m = 0; m < n; ++m) out[k * n + m] = T[k].derivative(S.yvar(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// S-curvature

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = m * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged node.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= m; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = m * (z * p1 - p2) / (z * z - 1.0);
    nodes[i] = -z;
    nodes[m - 1 - i] = z;
    weights[i] = weights[m - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

Jet indicatrix_volume(const Metric& metric, const Frame& frame, const QuadratureOptions& q) {
  const int n = metric.dim();
  const auto fiber = metric.fiber(frame.x);
  Jet vol(frame.cfg);
  if (n == 2) {
    const int m = q.circle_points;
    const double w = 2.0 * std::numbers::pi / m;
    for (int k = 0; k < m; ++k) {
      const double t = w * k;
      const double dir[2] = {std::cos(t), std::sin(t)};
      const Jet F = fiber.norm(dir);
      const Jet r = reciprocal(F);
      vol += (r * r) * w;
    }
    return vol * 0.5;
  }
  if (n == 3) {
    std::vector<double> tn, tw, pn, pw;
    gauss_legendre(q.polar_points, tn, tw);
    gauss_legendre(q.azimuth_points, pn, pw);
    for (int a = 0; a < q.polar_points; ++a) {
      const double ct = tn[a];
      const double st = std::sqrt(1.0 - ct * ct);
      for (int b = 0; b < q.azimuth_points; ++b) {
        const double ph = std::numbers::pi * (pn[b] + 1.0);
        const double dir[3] = {st * std::cos(ph), st * std::sin(ph), ct};
        const Jet r = reciprocal(fiber.norm(dir));
        vol += (r * r * r) * (tw[a] * pw[b] * std::numbers::pi);
      }
    }
    return vol * (1.0 / 3.0);
  }
  throw InputError("S-curvature quadrature supports n = 2 and n = 3 only (got n = " + std::to_string(n) + ")");
}

Jet s_curvature_jet(const Metric& metric, const Spray& spray, const EvalPoint& p, int order,
                    const QuadratureOptions& q) {
  const int n = metric.dim();
  // tau needs one more order than S; g needs two more than tau.
  Frame fr(p, order + 3);
  const Jet f2 = metric.f2(fr.x, fr.y);
  const JetTensor g = fundamental_jets(f2, n);
  std::vector<Jet> gm(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) gm[k] = g[k];
  const Jet detg = determinant(gm, n);
  if (!(detg.value() > 0.0)) throw DomainError("det g is not positive");
  Frame fx(p, order + 1);
  const Jet vol = indicatrix_volume(metric, fx, q);
  // tau = 1/2 ln det g - ln(vol(B^n) / vol(indicatrix)); the ball volume is
  // constant and drops out of S.
  const Jet tau = log(detg) * 0.5 + log(vol);
  const SprayJets S = spray_jets(spray, p, order + 1);
  Jet s(JetConfig{2 * n, order});
  for (int m = 0; m < n; ++m) {
    Jet d = tau.derivative(m);
    for (int r = 0; r < n; ++r) d -= S.Nij(r, m) * tau.derivative(n + r);
    s += d * S.y[m];
  }
  return s;
}

double s_curvature(const Metric& metric, const EvalPoint& p, const QuadratureOptions& q) {
  auto m = std::make_shared<const Metric>(metric.spec());
  MetricSpray spray(m);
  return s_curvature_jet(metric, spray, p, 0, q).value();
}

}  // namespace finsler
