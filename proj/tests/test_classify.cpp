#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "doctest.h"
#include "finsler/classify.hpp"
#include "finsler/gallery.hpp"
#include "finsler/sampling.hpp"
#include "support.hpp"

using namespace finsler;

namespace {

std::shared_ptr<const Metric> gallery_metric(const std::string& name) {
  return std::make_shared<const Metric>(gallery_load(name).spec);
}

std::vector<EvalPoint> points_of(const Metric& m, int count, std::uint64_t seed = 3) {
  auto pts = sample_points(m, count, seed);
  for (auto& p : pts) p = normalized(m, p);
  return pts;
}

const ClassResult& find(const std::vector<ClassResult>& cs, const std::string& name) {
  for (const auto& c : cs) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no class " + name);
}

// Residual of a fit as a function of its parameters, rebuilt from raw tensors.
using ResidualFn = std::function<double(const std::vector<double>&)>;

// The fitted parameters must not be beaten by any +-h perturbation.
void check_optimal(const ResidualFn& f, const std::vector<double>& u, double fitted, double h = 1e-3) {
  CHECK(f(u) == doctest::Approx(fitted).epsilon(1e-9).scale(1e-12));
  for (std::size_t q = 0; q < u.size(); ++q) {
    for (double s : {-h, h}) {
      std::vector<double> v = u;
      v[q] += s;
      CHECK(f(v) >= fitted * (1.0 - 1e-12));
    }
  }
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("project_off_y removes the y component") {
    auto m = gallery_metric("killing_s3_alphabeta");
    const MetricSpray spray(m);
    const EvalPoint p = points_of(*m, 1)[0];
    CurvatureBundle cb(spray, p, 7);
    const FundamentalData fd = fundamental_tensor(*m, p);
    const TensorSample Dt = cb.sample("Dtilde");
    const TensorSample C = project_off_y(Dt, 1, fd);
    const int n = 3;
    double along = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += fd.y_lower[i] * C.values[((j * n + i) * n + k) * n + l];
          along = std::max(along, std::abs(s));
        }
      }
    }
    CHECK(along < 1e-12 * Dt.norm());
    CHECK(test::frob_diff(project_off_y(C, 1, fd).values, C.values) < 1e-13 * C.norm());
    CHECK_THROWS_AS(project_off_y(Dt, 0, fd), InputError);
  }

  TEST_CASE("relative residuals respect the vacuity threshold") {
    CHECK(relative_residual(1e-3, 1.0, 1e-9) == doctest::Approx(1e-3));
    CHECK(relative_residual(1e-12, 1e-10, 1e-9) == doctest::Approx(1e-12));
  }

  TEST_CASE("fitted scalars are least-squares optimal") {
    auto m = gallery_metric("killing_s3_alphabeta");
    const MetricSpray spray(m);
    const ClassifyOptions o;
    for (const auto& p : points_of(*m, 3)) {
      CurvatureBundle cb(spray, p, 9);
      const FundamentalData fd = fundamental_tensor(*m, p);
      const int n = 3;
      const auto& y = p.y;
      const TensorSample Dt = cb.sample("Dtilde"), D0 = cb.sample("Dtilde_0");
      const TensorSample Wt = cb.sample("Wtilde"), W0 = cb.sample("Wtilde_0");
      const double ref_d = Dt.norm() + D0.norm();
      const double ref_w = Wt.norm() + W0.norm();

      SUBCASE("generalized Dtilde") {
        const FitResult r = test_generalized_dtilde(cb, fd, o);
        ResidualFn f = [&](const std::vector<double>& mu) {
          std::vector<double> res(D0.values);
          for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
              for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                  for (int q = 0; q < n; ++q)
                    res[((j * n + i) * n + k) * n + l] += mu[q] * Dt.values[((j * n + q) * n + k) * n + l] * y[i];
          return test::frob(res) / ref_d;
        };
        check_optimal(f, *r.param("mu"), r.residual);
      }
      SUBCASE("generalized weakly-Weyl") {
        const FitResult r = test_generalized_weakly_weyl(cb, fd, o);
        std::vector<double> u{r.scalar("lambda")};
        for (double v : *r.param("mu")) u.push_back(v);
        ResidualFn f = [&](const std::vector<double>& u) {
          std::vector<double> res(W0.values);
          for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
              for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                  const std::size_t row = ((j * n + i) * n + k) * n + l;
                  res[row] += u[0] * fd.F * Wt.values[row];
                  for (int q = 0; q < n; ++q) res[row] -= u[1 + q] * Wt.values[((j * n + q) * n + k) * n + l] * y[i];
                }
          return test::frob(res) / ref_w;
        };
        check_optimal(f, u, r.residual);
      }
      SUBCASE("W-GDW and relatively isotropic Dtilde") {
        const TensorSample C = project_off_y(Dt, 1, fd), A = project_off_y(D0, 1, fd);
        const FitResult w = test_wgdw(cb, fd, o);
        check_optimal(
            [&](const std::vector<double>& l) {
              std::vector<double> res(A.values);
              for (std::size_t k = 0; k < res.size(); ++k) res[k] += l[0] * fd.F * C.values[k];
              return test::frob(res) / ref_d;
            },
            {w.scalar("lambda")}, w.residual);
        const FitResult ri = test_relatively_isotropic_dtilde(cb, fd, o);
        check_optimal(
            [&](const std::vector<double>& l) {
              std::vector<double> res(D0.values);
              for (std::size_t k = 0; k < res.size(); ++k) res[k] += l[0] * fd.F * Dt.values[k];
              return test::frob(res) / ref_d;
            },
            {ri.scalar("lambda")}, ri.residual);
      }
      SUBCASE("scalar flag curvature") {
        const TensorSample R = cb.sample("R");
        const FitResult r = fit_scalar_flag_curvature(cb, fd, o);
        check_optimal(
            [&](const std::vector<double>& K) {
              std::vector<double> res(R.values);
              for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) res[i * n + k] -= K[0] * ((i == k) - y[i] * fd.y_lower[k]);
              return test::frob(res) / R.norm();
            },
            {r.scalar("K")}, r.residual);
      }
    }
  }

  TEST_CASE("Example 1 verdicts") {
    auto m = gallery_metric("funk_ball_randers");
    ClassifyOptions o;
    o.threads = 4;
    const auto cs = classify_points(*m, points_of(*m, 6), o);
    for (const char* pass : {"weyl", "gdw", "wgdw", "generalized_dtilde", "isotropic_stretch_douglas",
                             "scalar_flag_curvature", "weakly_berwald", "isotropic_mean_berwald"}) {
      CAPTURE(pass);
      CHECK(find(cs, pass).pass);
    }
    for (const char* fail : {"berwald", "douglas"}) {
      CAPTURE(fail);
      CHECK_FALSE(find(cs, fail).pass);
    }
    for (const auto& f : find(cs, "scalar_flag_curvature").fits) CHECK(std::abs(f.scalar("K")) < 1e-7);
    for (const auto& f : find(cs, "gdw").fits) CHECK(f.vacuous);
  }

  TEST_CASE("Example 2 verdicts and fitted flag curvature") {
    auto m = gallery_metric("shen_avec_randers");
    ClassifyOptions o;
    o.threads = 4;
    const auto pts = points_of(*m, 6);
    const auto cs = classify_points(*m, pts, o);
    for (const char* pass : {"weyl", "gdw", "wgdw", "generalized_weakly_weyl", "isotropic_mean_berwald",
                             "scalar_flag_curvature"}) {
      CAPTURE(pass);
      CHECK(find(cs, pass).pass);
    }
    for (const char* fail : {"berwald", "douglas", "generalized_dtilde", "relatively_isotropic_dtilde"}) {
      CAPTURE(fail);
      CHECK_FALSE(find(cs, fail).pass);
    }
    CHECK(find(cs, "generalized_dtilde").worst_residual > 1e-2);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& x = pts[k].x;
      const double c = -x[0];
      const double c0 = -pts[k].y[0];
      const double K = 3.0 * c0 + 3.0 * c * c - 2.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      CHECK(find(cs, "scalar_flag_curvature").fits[k].scalar("K") == doctest::Approx(K).epsilon(1e-4));
      CHECK(find(cs, "isotropic_mean_berwald").fits[k].scalar("c") == doctest::Approx(c).epsilon(1e-6));
    }
  }

  TEST_CASE("Killing metric is not GDW") {
    auto m = gallery_metric("killing_s3_alphabeta");
    ClassifyOptions o;
    o.threads = 4;
    const auto cs = classify_points(*m, points_of(*m, 6), o);
    CHECK(find(cs, "gdw").worst_residual > 0.1);
    CHECK_FALSE(find(cs, "douglas").pass);
  }

  TEST_CASE("hierarchy: a passing subclass implies its superclass") {
    const std::vector<std::pair<const char*, const char*>> edges{
        {"douglas", "generalized_dtilde"}, {"generalized_dtilde", "wgdw"},      {"weyl", "generalized_weakly_weyl"},
        {"generalized_weakly_weyl", "wgdw"}, {"gdw", "wgdw"},                   {"berwald", "douglas"}};
    ClassifyOptions o;
    o.threads = 4;
    for (const auto& name : gallery_names()) {
      CAPTURE(name);
      auto m = gallery_metric(name);
      const auto cs = classify_points(*m, points_of(*m, 5), o);
      for (const auto& [sub, super] : edges) {
        CAPTURE(sub);
        const auto& a = find(cs, sub).fits;
        const auto& b = find(cs, super).fits;
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (a[k].residual < o.tol) CHECK(b[k].residual <= 10.0 * a[k].residual + 1e-9);
        }
      }
    }
  }

  TEST_CASE("reports: thread determinism, rescaling and JSON round trip") {
    auto m = gallery_metric("killing_s3_alphabeta");
    const auto pts = points_of(*m, 4);
    ClassifyOptions o1, o4;
    o4.threads = 4;
    const auto a = classify_points(*m, pts, o1);
    const auto b = classify_points(*m, pts, o4);
    auto scaled = pts;
    for (auto& p : scaled)
      for (double& v : p.y) v *= 3.0;
    const auto c = classify_points(*m, scaled, o1);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CAPTURE(a[k].name);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        CHECK(a[k].fits[q].residual == b[k].fits[q].residual);
        const double ra = a[k].fits[q].residual, rc = c[k].fits[q].residual;
        CHECK(std::abs(ra - rc) <= 1e-8 * std::max(ra, rc) + 1e-12);
      }
    }

    ClassificationReport r;
    r.config.metric = m->spec().name;
    r.config.points = 4;
    r.config.seed = 3;
    r.points = pts;
    r.classes = a;
    const std::string json = r.to_json();
    const ClassificationReport back = ClassificationReport::from_json(json);
    CHECK(back.to_json() == json);
    CHECK(back.classes.size() == a.size());
    CHECK(back.find("gdw")->worst_residual == a[4].worst_residual);
    CHECK_THROWS_AS(ClassificationReport::from_json("{\"metric\": 1}"), InputError);
    CHECK(r.to_csv().rfind("point_index,class,residual,verdict", 0) == 0);
  }
}
