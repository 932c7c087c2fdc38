#include "finsler/projective.hpp"

#include <cmath>
#include <cstdio>

#include "finsler/sampling.hpp"

namespace finsler {

namespace {

std::vector<std::string> factor_slots(int n) {
  auto names = coordinate_names(n);
  names.push_back("alpha");
  names.push_back("beta");
  names.push_back("norm");
  return names;
}

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

}  // namespace

ProjectiveFactor::ProjectiveFactor(const std::string& text, std::shared_ptr<const Metric> metric)
    : text_(text), metric_(std::move(metric)) {
  const Expression e = parse(text);
  const auto vars = e.free_variables();
  uses_alpha_ = vars.count("alpha") > 0;
  uses_beta_ = vars.count("beta") > 0;
  uses_norm_ = vars.count("norm") > 0;
  if ((uses_alpha_ || uses_beta_) && !metric_->spec().is_alpha_beta()) {
    throw InputError("projective factor uses alpha/beta but '" + metric_->spec().name +
                     "' is not an (alpha, beta)-metric");
  }
  expr_ = CompiledExpression(e, factor_slots(metric_->dim()));
  check_homogeneity();
}

bool ProjectiveFactor::is_zero() const {
  const ExprNode& r = expr_.expression().root();
  return r.kind == NodeKind::constant && r.number == 0.0;
}

Jet ProjectiveFactor::eval(std::span<const Jet> x, std::span<const Jet> y) const {
  const int n = metric_->dim();
  const JetConfig cfg = x[0].config();
  std::vector<Jet> v;
  v.reserve(2 * n + 3);
  for (const auto& j : x) v.push_back(j);
  for (const auto& j : y) v.push_back(j);
  Jet alpha(cfg), beta(cfg), norm(cfg);
  if (uses_alpha_) {
    Jet a2(cfg);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a2 += metric_->a(i, j, x) * y[i] * y[j];
    }
    alpha = sqrt(a2);
  }
  if (uses_beta_) {
    for (int i = 0; i < n; ++i) beta += metric_->b(i, x) * y[i];
  }
  if (uses_norm_) norm = metric_->norm(x, y);
  v.push_back(alpha);
  v.push_back(beta);
  v.push_back(norm);
  return expr_.eval(std::span<const Jet>(v));
}

double ProjectiveFactor::eval(std::span<const double> x, std::span<const double> y) const {
  Frame fr(EvalPoint{{x.begin(), x.end()}, {y.begin(), y.end()}}, 1);
  return eval(fr.x, fr.y).value();
}

void ProjectiveFactor::check_homogeneity() const {
  const auto pts = sample_points(*metric_, 5, 0x9e3779b97f4a7c15ULL);
  for (const auto& p : pts) {
    const double base = eval(p.x, p.y);
    for (double t : {2.0, 3.0}) {
      std::vector<double> ty = p.y;
      for (double& v : ty) v *= t;
      const double scaled = eval(p.x, ty);
      if (std::abs(scaled - t * base) > 1e-9 * std::max(std::abs(scaled), std::abs(t * base))) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "P(x, %g y) = %.10g but %g P(x, y) = %.10g", t, scaled, t, t * base);
        throw InputError("projective factor '" + text_ + "' is not 1-homogeneous in y: " + msg);
      }
    }
  }
}

std::vector<Jet> ProjectiveSpray::coefficients(const EvalPoint& p, int order) const {
  std::vector<Jet> G = base_->coefficients(p, order);
  Frame fr(p, std::max(order, 1));
  const Jet P = P_.eval(fr.x, fr.y);
  for (std::size_t i = 0; i < G.size(); ++i) G[i] = G[i] + P * fr.y[i];
  return G;
}

ProjectivePoint projective_point(const Metric& metric, const ProjectiveFactor& P, const EvalPoint& p0,
                                 const ClassifyOptions& o) {
  const EvalPoint p = normalized(metric, p0);
  const int n = metric.dim();
  const int order = std::max(o.f2_order, 8);
  auto base = std::make_shared<MetricSpray>(std::shared_ptr<const Metric>(&metric, [](const Metric*) {}));
  ProjectiveSpray bar(base, P);
  CurvatureBundle cb(*base, p, order);
  CurvatureBundle cbar(bar, p, order);
  const FundamentalData fd = fundamental_tensor(metric, p);
  const double vac = o.vacuity;
  ProjectivePoint out;

  // Douglas tensor.
  const TensorSample D = cb.sample("D");
  const TensorSample Dbar = cbar.sample("D");
  out.douglas = relative_residual(frobenius(diff(Dbar.values, D.values)), D.norm(), vac);

  // P as a jet field and its derivatives.
  Frame fr(p, order);
  const Jet Pj = P.eval(fr.x, fr.y);
  const double Pv = Pj.value();
  const JetTensor Ps = scalar_tensor(Pj, n);
  const JetTensor Pdot = vertical_derivative(Ps, cb.spray());  // P_.k

  // Riemann law.
  const TensorSample R = cb.sample("R");
  const TensorSample Rbar = cbar.sample("R");
  auto riemann_law = [&](const SprayJets& S) {
    const JetTensor Ph = horizontal_derivative(Ps, S);  // P_|k
    Jet y_ph = Ph[0] * S.y[0];
    for (int m = 1; m < n; ++m) y_ph += Ph[m] * S.y[m];
    const Jet Xi = Pj * Pj - y_ph;
    std::vector<double> pred(n * n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        const double tau =
            3.0 * (Ph[k].value() - Pv * Pdot[k].value()) + Xi.derivative(S.yvar(k)).value();
        pred[i * n + k] = R.values[i * n + k] + (i == k ? Xi.value() : 0.0) + tau * p.y[i];
      }
    }
    return relative_residual(frobenius(diff(Rbar.values, pred)), R.norm() + Rbar.norm(), vac);
  };
  out.riemann = riemann_law(cb.spray());
  out.riemann_transformed = riemann_law(cbar.spray());

  // D_||0 - D_|0 = P_.r D^r y.
  {
    const JetTensor& Dj = cb.D();
    const TensorSample h0 = horizontal_derivative_0(Dj, cb.spray()).sample("D_|0", p);
    const TensorSample hb0 = horizontal_derivative_0(Dj, cbar.spray()).sample("D_||0", p);
    std::vector<double> r = diff(hb0.values, h0.values);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
          for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int q = 0; q < n; ++q) s += Pdot[q].value() * D.values[((j * n + q) * n + k) * n + l];
            r[((j * n + i) * n + k) * n + l] -= s * p.y[i];
          }
        }
      }
    }
    out.d_parallel = relative_residual(frobenius(r), h0.norm() + hb0.norm(), vac);
  }

  // Bbar = B + P_.j.k.l y^i + P_.j.k delta^i_l + P_.j.l delta^i_k + P_.k.l delta^i_j.
  {
    const TensorSample B = cb.sample("B");
    const TensorSample Bbar = cbar.sample("B");
    std::vector<double> pred = B.values;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
          for (int l = 0; l < n; ++l) {
            auto pd = [&](std::initializer_list<int> idx) {
              std::vector<int> e(2 * n, 0);
              for (int a : idx) ++e[n + a];
              return Pj.partial(e);
            };
            double v = pd({j, k, l}) * p.y[i];
            if (i == l) v += pd({j, k});
            if (i == k) v += pd({j, l});
            if (i == j) v += pd({k, l});
            pred[((j * n + i) * n + k) * n + l] += v;
          }
        }
      }
    }
    out.berwald_expansion = relative_residual(frobenius(diff(Bbar.values, pred)), B.norm() + Bbar.norm(), vac);
  }

  // Weyl invariance.
  out.weyl = relative_residual(frobenius(diff(cbar.sample("W").values, cb.sample("W").values)),
                               R.norm() + Rbar.norm(), vac);

  {
    const TensorSample C = project_off_y(cb.sample("Dtilde"), 1, fd);
    const TensorSample Cbar = project_off_y(cbar.sample("Dtilde"), 1, fd);
    out.gdw_projection = relative_residual(frobenius(diff(Cbar.values, C.values)), C.norm() + Cbar.norm(), vac);
  }
  out.gdw_base = test_gdw(cb, fd, o).residual;
  out.gdw_transformed = test_gdw(cbar, fd, o).residual;
  out.wgdw_base = test_wgdw(cb, fd, o);
  out.wgdw_transformed = test_wgdw(cbar, fd, o);
  out.lambda_relation_defined = out.wgdw_base.note.empty() && out.wgdw_transformed.note.empty();
  if (out.lambda_relation_defined) {
    out.lambda_relation = std::abs(out.wgdw_transformed.scalar("lambda") * fd.F -
                                   (out.wgdw_base.scalar("lambda") * fd.F + 2.0 * Pv));
  }
  return out;
}

}  // namespace finsler
