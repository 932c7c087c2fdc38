// Acceptance run: one PASS/FAIL line per criterion with the measured values
// and the pinned bounds. Exit status is 0 when the failing set equals the
// --known-failure list.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "finsler/alphabeta.hpp"
#include "finsler/gallery.hpp"
#include "finsler/identities.hpp"
#include "finsler/projective.hpp"
#include "finsler/sampling.hpp"
#include "support.hpp"

using namespace finsler;

namespace {

int g_threads = 1;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records "label value rel bound" and folds the comparison into pass.
  void less(const std::string& label, double v, double bound) { add(label, v, "<", bound, v < bound); }
  void more(const std::string& label, double v, double bound) { add(label, v, ">", bound, v > bound); }
  void flag(const std::string& label, bool ok) {
    detail += (detail.empty() ? "" : "; ") + label + (ok ? " yes" : " NO");
    pass = pass && ok;
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }

 private:
  void add(const std::string& label, double v, const char* rel, double bound, bool ok) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.2e %s %.0e%s", label.c_str(), v, rel, bound, ok ? "" : " (!)");
    detail += (detail.empty() ? "" : "; ") + std::string(buf);
    pass = pass && ok;
  }
};

std::shared_ptr<const Metric> gallery_metric(const std::string& name) {
  return std::make_shared<const Metric>(gallery_load(name).spec);
}

std::vector<EvalPoint> points_of(const Metric& m, int count, std::uint64_t seed = 42) {
  auto pts = sample_points(m, count, seed);
  for (auto& p : pts) p = normalized(m, p);
  return pts;
}

ClassifyOptions options() {
  ClassifyOptions o;
  o.threads = g_threads;
  return o;
}

const ClassResult& find(const std::vector<ClassResult>& cs, const std::string& name) {
  for (const auto& c : cs) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no class " + name);
}

double worst_row(const std::vector<IdentityRow>& rows, const std::string& prefix) {
  double w = 0.0;
  for (const auto& r : rows) {
    if (r.name.rfind(prefix, 0) == 0) w = std::max(w, r.worst);
  }
  return w;
}

// 1 -------------------------------------------------------------------------
Outcome example1() {
  Outcome o;
  auto m = gallery_metric("funk_ball_randers");
  const auto pts = points_of(*m, 20);
  const auto cs = classify_points(*m, pts, options());
  std::vector<double> r(pts.size()), e(pts.size()), s(pts.size());
  MetricSpray spray(m);
  parallel_for(static_cast<int>(pts.size()), g_threads, [&](int k) {
    CurvatureBundle cb(spray, pts[k], 5);
    r[k] = cb.sample("R").norm();  // F = 1
    e[k] = cb.sample("E").norm();
    s[k] = std::abs(s_curvature(*m, pts[k]));
  });
  auto mx = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
  o.less("|R|/F^2", mx(r), 1e-7);
  o.less("|E|", mx(e), 1e-7);
  o.less("|S|", mx(s), 1e-4);
  o.more("douglas", find(cs, "douglas").worst_residual, 1e-3);
  o.less("weyl", find(cs, "weyl").worst_residual, 1e-7);
  o.less("gen-Dtilde", find(cs, "generalized_dtilde").worst_residual, 1e-6);
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome example2() {
  Outcome o;
  auto m = gallery_metric("shen_avec_randers");
  const auto pts = points_of(*m, 20);
  const auto cs = classify_points(*m, pts, options());
  const auto& K = find(cs, "scalar_flag_curvature").fits;
  double k_err = 0.0, e_err = 0.0, s_err = 0.0;
  MetricSpray spray(m);
  std::vector<std::array<double, 3>> per(pts.size());
  parallel_for(static_cast<int>(pts.size()), g_threads, [&](int q) {
    const EvalPoint& p = pts[q];
    const auto& x = p.x;
    const double x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double F = m->norm(p.x, p.y);
    const double c = -x[0];       // <a, x>
    const double c0 = -p.y[0];    // c_{;0}
    const double Kx = 3.0 * c0 / F + 3.0 * c * c - 2.0 * x2;
    per[q][0] = std::abs(K[q].scalar("K") - Kx) / std::abs(Kx);

    CurvatureBundle cb(spray, p, 5);
    const FundamentalData fd = fundamental_tensor(*m, p);
    std::vector<double> Ex = fd.h.values;
    for (double& v : Ex) v *= 0.5 * (3 + 1) * c / F;
    per[q][1] = test::rel_diff(cb.sample("E").values, Ex);

    const double delta = 1.0 - x2 * x2;
    std::vector<double> sx(9);
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) sx[j * 3 + k] = -2.0 / (delta * delta) * ((k == 0) * x[j] - (j == 0) * x[k]);
    }
    per[q][2] = test::frob_diff(alpha_beta_data(*m, p).s_ij, sx);
  });
  for (const auto& v : per) {
    k_err = std::max(k_err, v[0]);
    e_err = std::max(e_err, v[1]);
    s_err = std::max(s_err, v[2]);
  }
  o.less("weyl", find(cs, "weyl").worst_residual, 1e-6);
  o.less("K rel", k_err, 1e-4);
  o.less("E rel", e_err, 1e-6);
  o.less("s_jk", s_err, 1e-8);
  o.more("rel-iso-Dtilde", find(cs, "relatively_isotropic_dtilde").worst_residual, 1e-2);
  o.more("gen-Dtilde", find(cs, "generalized_dtilde").worst_residual, 1e-2);
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome identity_suite() {
  Outcome o;
  double rieber = 0, es = 0, lemma = 0, trace = 0, yann = 0, forms = 0;
  for (const auto& name : gallery_names()) {
    auto m = gallery_metric(name);
    const auto pts = points_of(*m, 10);
    IdentityOptions io;
    io.classify = options();
    std::vector<IdentityRow> rows;
    for (const char* suite : {"riemann_berwald", "es", "lemma_wdtheta", "structure"}) {
      auto r = run_identities(m, suite, pts, io);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    rieber = std::max(rieber, worst_row(rows, "rieber"));
    es = std::max(es, worst_row(rows, "mean_berwald_vs_s_hessian"));
    lemma = std::max(lemma, worst_row(rows, "wtilde_dtilde_theta"));
    trace = std::max({trace, worst_row(rows, "douglas_trace"), worst_row(rows, "weyl_trace")});
    for (const char* y : {"riemann_y", "weyl_y", "berwald_y", "douglas_y", "angular_y"}) yann = std::max(yann, worst_row(rows, y));
    forms = std::max(forms, worst_row(rows, "douglas_forms"));
  }
  o.less("RieBer", rieber, 1e-6);
  o.less("ES", es, 1e-3);
  o.less("W/D/theta", lemma, 1e-6);
  o.less("traces", trace, 1e-9);
  o.less("y-annihilation", yann, 1e-9);
  o.less("Douglas forms", forms, 1e-10);
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome alpha_beta_oracles() {
  Outcome o;
  double g_err = 0, det_err = 0, G_err = 0;
  for (const char* name : {"funk_ball_randers", "shen_avec_randers", "killing_s3_alphabeta"}) {
    auto m = gallery_metric(name);
    MetricSpray spray(m);
    for (const auto& p : points_of(*m, 10)) {
      const ClosedFormG c = gij_closed_form(*m, p);
      const FundamentalData fd = fundamental_tensor(*m, p);
      g_err = std::max(g_err, test::rel_diff(c.g, fd.g.values));
      const auto& g = fd.g.values;
      const double det = g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6]) +
                         g[2] * (g[3] * g[7] - g[4] * g[6]);
      det_err = std::max(det_err, std::abs(c.det - det) / std::abs(det));
      G_err = std::max(G_err, test::rel_diff(geodesic_split(*m, p).G, spray_coefficients(spray, p).values));
    }
  }
  double b_err = 0, lemma = 0;
  auto m = gallery_metric("killing_s3_alphabeta");
  MetricSpray spray(m);
  for (const auto& p : points_of(*m, 10)) {
    CurvatureBundle cb(spray, p, 5);
    const TensorSample B = cb.sample("B");
    b_err = std::max(b_err, test::frob_diff(berwald_closed_form(*m, p).values, B.values) / B.norm());
    for (const auto& v : killing_lemma_suite(*m, p)) lemma = std::max(lemma, v.residual);
  }
  o.less("g", g_err, 1e-8);
  o.less("det", det_err, 1e-8);
  o.less("G split", G_err, 1e-8);
  o.less("Berwald closed form", b_err, 1e-7);
  o.less("Killing lemma", lemma, 1e-7);
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome projective_closure() {
  Outcome o;
  double douglas = 0, riemann = 0, riemann_bar = 0, dpar = 0, lambda = 0;
  int flips = 0, defined = 0, total = 0;
  for (const char* name : {"funk_ball_randers", "shen_avec_randers"}) {
    auto m = gallery_metric(name);
    const auto pts = points_of(*m, 10);
    for (const char* factor : {"beta", "0.1*norm"}) {
      const ProjectiveFactor P(factor, m);
      std::vector<ProjectivePoint> res(pts.size());
      parallel_for(static_cast<int>(pts.size()), g_threads,
                   [&](int k) { res[k] = projective_point(*m, P, pts[k], options()); });
      for (const auto& r : res) {
        douglas = std::max(douglas, r.douglas);
        riemann = std::max(riemann, r.riemann);
        riemann_bar = std::max(riemann_bar, r.riemann_transformed);
        dpar = std::max(dpar, r.d_parallel);
        flips += (r.wgdw_base.residual < 1e-5) != (r.wgdw_transformed.residual < 1e-5);
        ++total;
        if (r.lambda_relation_defined) {
          ++defined;
          lambda = std::max(lambda, r.lambda_relation);
        }
      }
    }
  }
  o.less("Douglas", douglas, 1e-7);
  o.less("Riemann law", riemann, 1e-6);
  o.less("D||0 - D|0", dpar, 1e-7);
  o.flag("W-GDW verdict preserved", flips == 0);
  if (defined > 0) {
    o.less("lambda shift", lambda, 1e-4);
  } else {
    o.note("lambda shift: base fit vacuous at all " + std::to_string(total) + " points");
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "[P_|k along Gbar: %.1e]", riemann_bar);
  o.note(buf);
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome hierarchy() {
  Outcome o;
  const std::vector<std::pair<const char*, const char*>> edges{{"douglas", "generalized_dtilde"},
                                                               {"generalized_dtilde", "wgdw"},
                                                               {"weyl", "generalized_weakly_weyl"},
                                                               {"generalized_weakly_weyl", "wgdw"},
                                                               {"gdw", "wgdw"}};
  const ClassifyOptions opt = options();
  int checked = 0, violations = 0, raw = 0;
  double worst_ratio = 0.0;
  for (const auto& name : gallery_names()) {
    auto m = gallery_metric(name);
    const auto cs = classify_points(*m, points_of(*m, 20), opt);
    for (const auto& [sub, super] : edges) {
      const auto& a = find(cs, sub).fits;
      const auto& b = find(cs, super).fits;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const bool dominated = b[k].residual <= 10.0 * a[k].residual + 1e-9;
        raw += !dominated;
        if (a[k].residual >= opt.tol) continue;
        ++checked;
        violations += !dominated;
        worst_ratio = std::max(worst_ratio, b[k].residual - 10.0 * a[k].residual);
      }
    }
  }
  o.flag("domination at " + std::to_string(checked) + " subclass-pass points", violations == 0);
  char buf[96];
  std::snprintf(buf, sizeof buf, "max excess %.1e <= 1e-9", worst_ratio);
  o.note(buf);
  o.note("[" + std::to_string(raw) + " violations if applied at failing points too]");
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome witnesses() {
  Outcome o;
  auto k = gallery_metric("killing_s3_alphabeta");
  const auto pts = points_of(*k, 10);
  const ClassifyOptions opt = options();
  const auto cs = classify_points(*k, pts, opt);
  o.more("Killing GDW", find(cs, "gdw").worst_residual, 0.1);
  const bool fit_verdict = find(cs, "wgdw").pass;
  bool cond_verdict = true;
  double cond_worst = 0.0;
  for (const auto& p : pts) {
    const WgdwCondition c = wgdw_condition_check(*k, p);
    cond_worst = std::max(cond_worst, c.fit.residual);
  }
  cond_verdict = cond_worst < opt.tol;
  char buf[200];
  std::snprintf(buf, sizeof buf, "W-GDW fit %s (worst %.2e), condition %s (worst %.2e)", fit_verdict ? "pass" : "fail",
                find(cs, "wgdw").worst_residual, cond_verdict ? "pass" : "fail", cond_worst);
  o.note(buf);
  o.flag("verdicts agree", fit_verdict == cond_verdict);

  auto e2 = gallery_metric("shen_avec_randers");
  const auto c2 = classify_points(*e2, points_of(*e2, 10), opt);
  o.less("Ex2 weyl", find(c2, "weyl").worst_residual, opt.tol);
  o.more("Ex2 gen-Dtilde", find(c2, "generalized_dtilde").worst_residual, opt.tol);
  return o;
}

// 8 -------------------------------------------------------------------------
template <class T>
T fd_function(const std::array<T, 4>& z) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  return exp(0.3 * z[0]) * sin(z[1] + 0.5 * z[2]) + sqrt(2.0 + z[2] * z[3]) / (1.5 + cos(z[0] * z[3])) +
         log(3.0 + z[1] * z[1]) * pow(2.0 + z[0], 1.5);
}

Outcome engine() {
  Outcome o;
  const JetConfig cfg{4, 5};
  const auto table = MonomialTable::get(4, 5);
  Pcg64 rng(8);
  std::vector<double> worst(50, 0.0);
  std::vector<std::array<double, 4>> z0(50);
  for (auto& z : z0) {
    for (double& v : z) v = -0.5 + rng.uniform();
  }
  parallel_for(50, g_threads, [&](int t) {
    std::array<Jet, 4> z;
    for (int i = 0; i < 4; ++i) z[i] = Jet::variable(cfg, i, z0[t][i]);
    const Jet f = fd_function<Jet>(z);
    for (std::size_t idx = 0; idx < table->size(); ++idx) {
      const auto ex = table->exponents(idx);
      const std::vector<int> e(ex.begin(), ex.end());
      const double jet = f.partial(e);
      const double fd = test::fd_partial<4>(fd_function<double>, z0[t], e, 0.05);
      worst[t] = std::max(worst[t], std::abs(jet - fd) / std::max(1.0, std::abs(jet)));
    }
  });
  o.less("jet vs FD", *std::max_element(worst.begin(), worst.end()), 1e-5);

  double chris = 0.0;
  {
    auto m = gallery_metric("riemannian_diag");
    MetricSpray spray(m);
    for (const auto& p : points_of(*m, 10)) {
      std::vector<double> ex(27, 0.0);
      ex[0] = p.x[0] / (1.0 + p.x[0] * p.x[0]);
      chris = std::max(chris, test::frob_diff(connection(spray, p).Gamma.values, ex));
    }
  }
  {
    auto m = gallery_metric("sphere2");
    MetricSpray spray(m);
    for (const auto& p : points_of(*m, 10)) {
      const double f = -2.0 / (1.0 + p.x[0] * p.x[0] + p.x[1] * p.x[1]);
      std::vector<double> ex(8);
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            ex[(k * 2 + i) * 2 + j] = f * ((i == k) * p.x[j] + (j == k) * p.x[i] - (i == j) * p.x[k]);
      chris = std::max(chris, test::frob_diff(connection(spray, p).Gamma.values, ex));
    }
  }
  o.less("Christoffel", chris, 1e-9);

  auto m = gallery_metric("killing_s3_alphabeta");
  auto report = [&](int threads) {
    ClassifyOptions opt = options();
    opt.threads = threads;
    ClassificationReport r;
    r.config.metric = m->spec().name;
    r.config.points = 5;
    r.config.seed = 42;
    r.points = points_of(*m, 5);
    r.classes = classify_points(*m, r.points, opt);
    return r.to_json();
  };
  const std::string a = report(1), b = report(1), c = report(std::max(2, g_threads));
  o.flag("byte-identical seeded reports", a == b && a == c);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> known;
  g_threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--known-failure", known, "criterion expected to fail (repeatable)");
  app.add_option("--threads", g_threads, "worker threads");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Example 1 reproduction", example1},
      {"Example 2 reproduction", example2},
      {"identity suite", identity_suite},
      {"(alpha, beta) oracle equivalence", alpha_beta_oracles},
      {"projective closure", projective_closure},
      {"hierarchy implications", hierarchy},
      {"non-membership witnesses", witnesses},
      {"engine validation", engine},
  };
  const std::set<int> expected(known.begin(), known.end());
  std::set<int> failed;
  double total = 0.0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("error: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += dt;
    if (id <= 2 && dt >= 60.0) {
      o.pass = false;
      o.note("runtime over 60 s");
    }
    if (!o.pass) failed.insert(id);
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str(), dt);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed in %.1f s", criteria.size() - failed.size(), criteria.size(), total);
  if (!expected.empty()) {
    std::printf("; known failures:");
    for (int k : expected) std::printf(" %d", k);
  }
  std::printf("\n");
  if (failed != expected) {
    std::printf("failing set differs from the known-failure list\n");
    return 1;
  }
  return 0;
}
