#include "finsler/identities.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "finsler/alphabeta.hpp"
#include "finsler/error.hpp"
#include "finsler/projective.hpp"

namespace finsler {

namespace {

struct Value {
  std::string suite;
  std::string name;
  double residual = 0.0;
  double bound = 0.0;
  std::string note;
};

using Values = std::vector<Value>;

std::vector<double> minus(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

// Contraction of slot `slot` of a lower-index sample with y.
std::vector<double> contract_slot(const TensorSample& T, int slot) {
  const int n = T.dim;
  std::size_t inner = 1;
  for (int a = slot + 1; a < T.rank(); ++a) inner *= n;
  const std::size_t outer = T.values.size() / (inner * n);
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (int m = 0; m < n; ++m) {
      for (std::size_t q = 0; q < inner; ++q) {
        out[o * inner + q] += T.values[(o * n + m) * inner + q] * T.at.y[m];
      }
    }
  }
  return out;
}

void riemann_berwald(CurvatureBundle& cb, double vac, Values& out) {
  const int n = cb.dim();
  const SprayJets& S = cb.spray();
  const TensorSample Bh = horizontal_derivative(cb.B(), S).sample("B_|k", cb.point());  // [j][i][m][l][k]
  const TensorSample Rv = vertical_derivative(cb.R_jkl(), S).sample("R.m", cb.point());  // [j][i][k][l][m]
  std::vector<double> lhs(Rv.values.size()), rhs(Rv.values.size());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
          for (int l = 0; l < n; ++l) {
            const std::size_t f = (((j * n + i) * n + m) * n + k) * n + l;
            lhs[f] = Bh.values[(((j * n + i) * n + m) * n + l) * n + k] -
                     Bh.values[(((j * n + i) * n + m) * n + k) * n + l];
            rhs[f] = Rv.values[(((j * n + i) * n + k) * n + l) * n + m];
          }
        }
      }
    }
  }
  out.push_back({"riemann_berwald", "rieber", relative_residual(frobenius(minus(lhs, rhs)),
                                                                frobenius(lhs) + frobenius(rhs), vac),
                 1e-6, ""});
}

void es_identity(const Metric& metric, const Spray& spray, CurvatureBundle& cb, const ClassifyOptions& o,
                 Values& out) {
  const int n = cb.dim();
  const Jet S = s_curvature_jet(metric, spray, cb.point(), 2, o.quad);
  const TensorSample E = cb.sample("E");
  std::vector<double> half_hess(n * n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      std::vector<int> e(2 * n, 0);
      ++e[n + j];
      ++e[n + k];
      half_hess[j * n + k] = 0.5 * S.partial(e);
    }
  }
  out.push_back({"es", "mean_berwald_vs_s_hessian",
                 relative_residual(frobenius(minus(E.values, half_hess)), E.norm() + frobenius(half_hess),
                                   o.vacuity),
                 1e-3, ""});
}

void lemma_identity(CurvatureBundle& cb, double vac, Values& out) {
  const int n = cb.dim();
  const TensorSample Wt = cb.sample("Wtilde");
  const TensorSample Dt = cb.sample("Dtilde");
  const TensorSample th = cb.sample("theta");
  const auto& y = cb.point().y;
  std::vector<double> r(Wt.values.size());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const std::size_t f = ((j * n + i) * n + k) * n + l;
          r[f] = Wt.values[f] - Dt.values[f] + th.values[(j * n + k) * n + l] * y[i] / (n + 1);
        }
      }
    }
  }
  out.push_back({"lemma_wdtheta", "wtilde_dtilde_theta",
                 relative_residual(frobenius(r), Wt.norm() + Dt.norm(), vac), 1e-6, ""});
}

void structure(CurvatureBundle& cb, const FundamentalData& fd, double vac, Values& out) {
  const int n = cb.dim();
  const TensorSample R = cb.sample("R");
  const TensorSample W = cb.sample("W");
  const TensorSample B = cb.sample("B");
  const TensorSample D = cb.sample("D");
  const TensorSample D2 = cb.sample("D2");
  const TensorSample& h = fd.h;

  std::vector<double> trace(n * n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int m = 0; m < n; ++m) trace[j * n + k] += D.values[((j * n + m) * n + k) * n + m];
    }
  }
  double wtrace = 0.0;
  for (int m = 0; m < n; ++m) wtrace += W.values[m * n + m];

  auto row = [&](const char* name, double diff, double ref, double bound) {
    out.push_back({"structure", name, relative_residual(diff, ref, vac), bound, ""});
  };
  row("douglas_trace", frobenius(trace), D.norm(), 1e-9);
  row("weyl_trace", std::abs(wtrace), W.norm(), 1e-9);
  row("riemann_y", frobenius(contract_slot(R, 1)), R.norm(), 1e-9);
  row("weyl_y", frobenius(contract_slot(W, 1)), W.norm(), 1e-9);
  row("berwald_y", frobenius(contract_slot(B, 3)), B.norm(), 1e-9);
  row("douglas_y", frobenius(contract_slot(D, 3)), D.norm(), 1e-9);
  row("angular_y", frobenius(contract_slot(h, 1)), h.norm(), 1e-9);
  row("douglas_forms", frobenius(minus(D.values, D2.values)), D.norm(), 1e-10);
}

void killing(const Metric& metric, CurvatureBundle& cb, double vac, Values& out) {
  const EvalPoint& p = cb.point();
  for (const auto& v : killing_lemma_suite(metric, p)) out.push_back({"killing", v.name, v.residual, 1e-7, ""});
  const TensorSample B = cb.sample("B");
  const TensorSample Bc = berwald_closed_form(metric, p);
  out.push_back({"killing", "berwald_closed_form",
                 relative_residual(frobenius(minus(B.values, Bc.values)), B.norm(), vac), 1e-7, ""});
  out.push_back({"killing", "mean_berwald_vanishes", cb.sample("E").norm(), 1e-6, ""});
  out.push_back({"killing", "douglas_equals_berwald",
                 relative_residual(frobenius(minus(cb.sample("D").values, B.values)), B.norm(), vac), 1e-7, ""});
}

void projective(const Metric& metric, const ProjectiveFactor& P, const EvalPoint& p, const ClassifyOptions& o,
                Values& out) {
  const ProjectivePoint r = projective_point(metric, P, p, o);
  const std::string tag = "[" + P.text() + "]";
  auto row = [&](const std::string& name, double v, double bound, std::string note = {}) {
    out.push_back({"projective", name + tag, v, bound, std::move(note)});
  };
  row("douglas_invariance", r.douglas, 1e-7);
  row("riemann_law", r.riemann, 1e-6);
  row("d_parallel", r.d_parallel, 1e-7);
  row("berwald_expansion", r.berwald_expansion, 1e-10);
  row("weyl_invariance", r.weyl, 1e-6);
  row("gdw_projection_invariance", r.gdw_projection, 1e-7);
  const bool base_pass = r.wgdw_base.residual < o.tol;
  const bool bar_pass = r.wgdw_transformed.residual < o.tol;
  row("wgdw_verdict_preserved", base_pass == bar_pass ? 0.0 : 1.0, 0.5);
  if (r.lambda_relation_defined) {
    row("lambda_relation", r.lambda_relation, 1e-4);
  } else {
    row("lambda_relation", 0.0, 1e-4, "projected Dtilde vanishes: relation not defined");
  }
}

bool killing_applies(const Metric& metric, const std::vector<EvalPoint>& points, std::string* why) {
  if (!metric.spec().is_alpha_beta()) {
    if (why) *why = "killing suite needs an (alpha, beta)-metric; '" + metric.spec().name + "' is general";
    return false;
  }
  try {
    for (const auto& p : points) require_killing(alpha_beta_data(metric, normalized(metric, p)));
  } catch (const NumericError& e) {
    if (why) *why = std::string("killing suite hypotheses fail: ") + e.what();
    return false;
  }
  return true;
}

}  // namespace

const std::vector<std::string>& identity_suites() {
  static const std::vector<std::string> names{"all",       "riemann_berwald", "es",        "lemma_wdtheta",
                                              "structure", "killing",         "projective"};
  return names;
}

bool all_pass(const std::vector<IdentityRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const IdentityRow& r) { return r.pass; });
}

std::vector<IdentityRow> run_identities(std::shared_ptr<const Metric> metric, const std::string& suite,
                                        const std::vector<EvalPoint>& points, const IdentityOptions& o) {
  const auto& names = identity_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    std::string list;
    for (const auto& s : names) list += (list.empty() ? "" : ", ") + s;
    throw InputError("unknown identity suite '" + suite + "' (expected one of " + list + ")");
  }
  auto want = [&](const char* s) { return suite == "all" || suite == s; };
  bool with_killing = false;
  if (suite == "killing") {
    std::string why;
    if (!killing_applies(*metric, points, &why)) throw InputError(why);
    with_killing = true;
  } else if (suite == "all") {
    with_killing = killing_applies(*metric, points, nullptr);
  }

  std::vector<ProjectiveFactor> factors;
  if (want("projective")) {
    std::vector<std::string> texts = o.factors;
    if (texts.empty()) {
      texts.push_back("0.1*norm");
      if (metric->spec().is_alpha_beta()) texts.push_back("beta");
    }
    for (const auto& t : texts) factors.emplace_back(t, metric);
  }

  const ClassifyOptions& co = o.classify;
  const bool need_bundle = want("riemann_berwald") || want("es") || want("lemma_wdtheta") ||
                           want("structure") || with_killing;
  MetricSpray spray(metric);
  std::vector<Values> per_point(points.size());
  parallel_for(static_cast<int>(points.size()), co.threads, [&](int k) {
    const EvalPoint p = normalized(*metric, points[k]);
    Values& out = per_point[k];
    if (need_bundle) {
      CurvatureBundle cb(spray, p, co.f2_order);
      const FundamentalData fd = fundamental_tensor(*metric, p);
      if (want("riemann_berwald")) riemann_berwald(cb, co.vacuity, out);
      if (want("es")) es_identity(*metric, spray, cb, co, out);
      if (want("lemma_wdtheta")) lemma_identity(cb, co.vacuity, out);
      if (want("structure")) structure(cb, fd, co.vacuity, out);
      if (with_killing) killing(*metric, cb, co.vacuity, out);
    }
    for (const auto& P : factors) projective(*metric, P, p, co, out);
  });

  std::vector<IdentityRow> rows;
  std::map<std::string, std::size_t> index;
  for (const auto& values : per_point) {
    for (const auto& v : values) {
      const std::string key = v.suite + "/" + v.name;
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, rows.size()).first;
        IdentityRow r;
        r.suite = v.suite;
        r.name = v.name;
        r.bound = v.bound;
        rows.push_back(std::move(r));
      }
      IdentityRow& r = rows[it->second];
      r.residuals.push_back(v.residual);
      r.worst = std::max(r.worst, v.residual);
      if (!v.note.empty() && r.note.empty()) r.note = v.note;
    }
  }
  for (auto& r : rows) r.pass = r.worst < r.bound;
  return rows;
}

}  // namespace finsler
