#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "finsler/alphabeta.hpp"
#include "finsler/classify.hpp"
#include "finsler/gallery.hpp"
#include "finsler/sampling.hpp"
#include "support.hpp"

using namespace finsler;

namespace {

std::shared_ptr<const Metric> gallery_metric(const std::string& name) {
  return std::make_shared<const Metric>(gallery_load(name).spec);
}

std::vector<EvalPoint> points_of(const Metric& m, int count, std::uint64_t seed = 5) {
  auto pts = sample_points(m, count, seed);
  for (auto& p : pts) p = normalized(m, p);
  return pts;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size())) {
    s.replace(at, from.size(), to);
  }
  return s;
}

const char* kFlatConstant = R"([metric]
name = "flat_constant"
kind = "alpha_beta"
dim = 3
region_center = [0, 0, 0]
region_radius = 1

[alpha]
a_11 = "1"
a_12 = "0"
a_13 = "0"
a_22 = "1"
a_23 = "0"
a_33 = "1"

[beta]
b_1 = "0.2"
b_2 = "-0.1"
b_3 = "0.3"

[phi]
phi = "1 + s + 0.25*s^2"
)";

double det3(const std::vector<double>& g) {
  return g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6]) + g[2] * (g[3] * g[7] - g[4] * g[6]);
}

}  // namespace

TEST_SUITE("alphabeta") {
  TEST_CASE("closed-form fundamental tensor and determinant") {
    for (const char* name : {"funk_ball_randers", "shen_avec_randers", "killing_s3_alphabeta"}) {
      CAPTURE(name);
      auto m = gallery_metric(name);
      for (const auto& p : points_of(*m, 10)) {
        const ClosedFormG c = gij_closed_form(*m, p);
        const FundamentalData fd = fundamental_tensor(*m, p);
        CHECK(test::rel_diff(c.g, fd.g.values) < 1e-10);
        CHECK(c.det == doctest::Approx(det3(c.g)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("geodesic split reconstructs the spray") {
    for (const char* name : {"funk_ball_randers", "shen_avec_randers", "killing_s3_alphabeta"}) {
      CAPTURE(name);
      auto m = gallery_metric(name);
      const MetricSpray spray(m);
      for (const auto& p : points_of(*m, 10)) {
        const GeodesicSplit g = geodesic_split(*m, p);
        CHECK(test::rel_diff(g.G, spray_coefficients(spray, p).values) < 1e-8);
        EvalPoint q = p;
        for (double& v : q.y) v *= 2.0;
        const GeodesicSplit g2 = geodesic_split(*m, q);
        CHECK(g2.P == doctest::Approx(2.0 * g.P).epsilon(1e-9).scale(1e-12));
        std::vector<double> Q4 = g.Q;
        for (double& v : Q4) v *= 4.0;
        CHECK(test::frob_diff(g2.Q, Q4) <= 1e-9 * std::max(1e-3, test::frob(Q4)));
      }
    }
  }

  TEST_CASE("Killing metric: hypotheses, closed-form Berwald, lemma identities") {
    auto m = gallery_metric("killing_s3_alphabeta");
    const MetricSpray spray(m);
    for (const auto& p : points_of(*m, 10)) {
      const AlphaBetaData d = alpha_beta_data(*m, p);
      CHECK(test::frob(d.r) < 1e-8);
      CHECK(test::frob(d.s_j) < 1e-8);
      CHECK(test::frob(d.s_ij) > 1e-3);
      CHECK_NOTHROW(require_killing(d));
      CurvatureBundle cb(spray, p, 6);
      const TensorSample B = cb.sample("B");
      CHECK(test::frob_diff(berwald_closed_form(*m, p).values, B.values) < 1e-7 * B.norm());
      CHECK(cb.sample("E").norm() < 1e-6);
      CHECK(test::frob_diff(cb.sample("D").values, B.values) < 1e-7 * B.norm());
      for (const auto& v : killing_lemma_suite(*m, p)) {
        CAPTURE(v.name);
        CHECK(v.residual < 1e-7);
      }
      const GeodesicSplit g = geodesic_split(*m, p);
      const double alpha = d.alpha;
      for (int i = 0; i < 3; ++i) CHECK(std::abs(g.Q[i] - alpha * d.Q * d.s_up0[i]) < 1e-10);
    }
  }

  TEST_CASE("flat alpha with constant beta") {
    auto m = std::make_shared<const Metric>(parse_metric_file(kFlatConstant));
    for (const auto& p : points_of(*m, 3)) {
      const AlphaBetaData d = alpha_beta_data(*m, p);
      CHECK(test::frob(d.r) < 1e-14);
      CHECK(test::frob(d.s_ij) < 1e-14);
      for (const auto& v : killing_lemma_suite(*m, p)) CHECK(v.residual < 1e-12);
      const GeodesicSplit g = geodesic_split(*m, p);
      CHECK(test::frob(g.G) < 1e-14);
    }
  }

  TEST_CASE("Example 2: Killing hypotheses fail, displayed data agree") {
    auto m = gallery_metric("shen_avec_randers");
    const auto pts = points_of(*m, 10);
    CHECK_THROWS_AS(require_killing(alpha_beta_data(*m, pts[0])), NumericError);
    for (const auto& p : pts) {
      const AlphaBetaData d = alpha_beta_data(*m, p);
      const auto& x = p.x;
      const double x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      const double delta = 1.0 - x2 * x2;
      const double c = -x[0];
      const std::vector<double> dc{-1.0, 0.0, 0.0};
      std::vector<double> b(3), a(9), s(9);
      for (int k = 0; k < 3; ++k) b[k] = 2.0 * c / delta * x[k] - x2 / delta * dc[k];
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          a[j * 3 + k] = (j == k) / delta + b[j] * b[k];
          s[j * 3 + k] = -2.0 / (delta * delta) * ((k == 0) * x[j] - (j == 0) * x[k]);
        }
      }
      CHECK(test::frob_diff(d.b_lower, b) < 1e-9);
      CHECK(test::frob_diff(d.a, a) < 1e-9);
      CHECK(test::frob_diff(d.s_ij, s) < 1e-8);
    }
    CHECK(test::frob(alpha_beta_data(*m, {{0, 0, 0}, {1, 0, 0}}).s_ij) == 0.0);
  }

  TEST_CASE("Example 2 with the literal Delta = 1 - |a|^2 |x|^2 is not of scalar flag curvature") {
    std::string text = gallery_export("shen_avec_randers");
    text = replace_all(text, "(x1^2 + x2^2 + x3^2)^2", "(x1^2 + x2^2 + x3^2)");
    auto m = std::make_shared<const Metric>(parse_metric_file(text));
    const MetricSpray spray(m);
    double worst = 0.0;
    for (const auto& p : points_of(*m, 5)) {
      CurvatureBundle cb(spray, p, 5);
      worst = std::max(worst, test_weyl(cb, fundamental_tensor(*m, p), {}).residual);
    }
    CHECK(worst > 1e-2);
  }

  TEST_CASE("regularity") {
    auto randers = gallery_metric("funk_ball_randers");
    CHECK(regularity_check(phi_evaluator(*randers), 0.9).pass);

    auto quadratic = std::make_shared<const Metric>(
        parse_metric_file(replace_all(kFlatConstant, "1 + s + 0.25*s^2", "1 + s^2")));
    CHECK(regularity_check(phi_evaluator(*quadratic), 0.5).pass);
    // phi - s phi' + (b^2 - s^2) phi'' = 1 - s^2 at b = |s|.
    const RegularityResult r = regularity_check(phi_evaluator(*quadratic), 1.2);
    CHECK_FALSE(r.pass);
    CHECK(std::abs(r.s) >= 1.0);
    CHECK(r.value <= 0.0);

    const RegularityResult e = regularity_check(exponential_family_phi(1.0, 1.0, 0.8), 0.8);
    CHECK_FALSE(e.pass);
    CHECK_FALSE(e.reason.empty());

    const double b0 = default_b0(*gallery_metric("killing_s3_alphabeta"));
    CHECK(b0 == doctest::Approx(0.525).epsilon(1e-6));
  }

  TEST_CASE("Randers-type detection") {
    CHECK(randers_fit(phi_evaluator(*gallery_metric("funk_ball_randers")), 0.5).randers_type);
    const RandersFit k = randers_fit(phi_evaluator(*gallery_metric("killing_s3_alphabeta")), 0.5);
    CHECK_FALSE(k.randers_type);
    CHECK(k.max_deviation > 1e-6);
    auto sqrt_type = std::make_shared<const Metric>(
        parse_metric_file(replace_all(kFlatConstant, "1 + s + 0.25*s^2", "2*sqrt(1 + 0.5*s^2) - 0.3*s")));
    CHECK(randers_fit(phi_evaluator(*sqrt_type), 0.5).randers_type);
  }

  TEST_CASE("W-GDW condition") {
    auto killing = gallery_metric("killing_s3_alphabeta");
    const auto pts = points_of(*killing, 5);
    CHECK(wgdw_condition_hypotheses(*killing, pts).empty());
    const auto bad = wgdw_condition_hypotheses(*gallery_metric("shen_avec_randers"), pts);
    CHECK(bad.size() >= 2);

    const MetricSpray spray(killing);
    double worst_fit = 0.0;
    for (const auto& p : pts) {
      const WgdwCondition c = wgdw_condition_check(*killing, p);
      CHECK(c.fit.residual < 1e-5);
      CurvatureBundle cb(spray, p, 9);
      const FitResult w = test_wgdw(cb, fundamental_tensor(*killing, p), {});
      CHECK(std::abs(w.scalar("lambda") - c.fit.scalar("lambda")) < 1e-6);
      worst_fit = std::max(worst_fit, w.residual);
    }
    // The condition is satisfied by lambda = 0 while the full W-GDW fit is not:
    // the condition only sees b^j b^k b^l and y contractions.
    CHECK(worst_fit > 1e-2);
  }
}
