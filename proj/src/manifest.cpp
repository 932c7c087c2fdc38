#include <algorithm>
#include <cmath>

#include "finsler/alphabeta.hpp"
#include "finsler/gallery.hpp"
#include "finsler/identities.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

namespace {

double worst_class(const std::vector<ClassResult>& classes, const std::string& name) {
  for (const auto& c : classes) {
    if (c.name == name) return c.worst_residual;
  }
  throw InputError("manifest names unknown class '" + name + "'");
}

double worst_row(const std::vector<IdentityRow>& rows, const std::string& name) {
  for (const auto& r : rows) {
    if (r.name == name) return r.worst;
  }
  throw InputError("manifest names unknown identity '" + name + "'");
}

}  // namespace

std::vector<ManifestResult> check_manifest(const GalleryEntry& entry, int points, std::uint64_t seed,
                                           const ClassifyOptions& o) {
  auto metric = std::make_shared<const Metric>(entry.spec);
  const auto pts = sample_points(*metric, points, seed);

  auto need = [&](const char* check) {
    return std::any_of(entry.manifest.begin(), entry.manifest.end(),
                       [&](const ExpectedProperty& p) { return p.check == check; });
  };
  const std::vector<IdentityRow> rows = [&] {
    std::vector<IdentityRow> all;
    for (const char* suite : {"riemann_berwald", "lemma_wdtheta", "structure"}) {
      IdentityOptions io;
      io.classify = o;
      auto r = run_identities(metric, suite, pts, io);
      all.insert(all.end(), r.begin(), r.end());
    }
    return all;
  }();
  const std::vector<ClassResult> classes = classify_points(*metric, pts, o);

  // Pointwise quantities.
  struct PointValues {
    double curvature = 0.0, riemann = 0.0, mean_berwald = 0.0, s = 0.0, flag = 0.0;
    double r_ij = 0.0, s_i = 0.0, s_ij = 0.0;
  };
  std::vector<PointValues> pv(pts.size());
  MetricSpray spray(metric);
  parallel_for(static_cast<int>(pts.size()), o.threads, [&](int k) {
    const EvalPoint p = normalized(*metric, pts[k]);
    PointValues& v = pv[k];
    CurvatureBundle cb(spray, p, o.f2_order);
    if (need("max_curvature_norm")) {
      for (const char* t : {"R", "B", "E", "D", "H", "W"}) v.curvature = std::max(v.curvature, cb.sample(t).norm());
    }
    if (need("riemann_over_F2")) v.riemann = cb.sample("R").norm();
    if (need("mean_berwald")) v.mean_berwald = cb.sample("E").norm();
    if (need("s_curvature")) v.s = std::abs(s_curvature(*metric, p, o.quad));
    if (need("flag_curvature_fit")) {
      const FitResult f = fit_scalar_flag_curvature(cb, fundamental_tensor(*metric, p), o);
      v.flag = std::max(f.residual, std::abs(f.scalar("K") - 1.0));
    }
    if (need("r_ij") || need("s_i") || need("s_ij")) {
      const AlphaBetaData d = alpha_beta_data(*metric, p);
      v.r_ij = frobenius(d.r);
      v.s_i = frobenius(d.s_j);
      v.s_ij = frobenius(d.s_ij);
    }
  });
  auto worst = [&](double PointValues::*field) {
    double w = 0.0;
    for (const auto& v : pv) w = std::max(w, v.*field);
    return w;
  };

  std::vector<ManifestResult> out;
  for (const auto& prop : entry.manifest) {
    const std::string& c = prop.check;
    double m = 0.0;
    if (c == "riebers") {
      m = worst_row(rows, "rieber");
    } else if (c == "lemma_identity") {
      m = worst_row(rows, "wtilde_dtilde_theta");
    } else if (c == "douglas_forms" || c == "douglas_trace") {
      m = worst_row(rows, c);
    } else if (c == "y_annihilation") {
      for (const char* r : {"riemann_y", "weyl_y", "berwald_y", "douglas_y", "angular_y"}) {
        m = std::max(m, worst_row(rows, r));
      }
    } else if (c == "max_curvature_norm") {
      m = worst(&PointValues::curvature);
    } else if (c == "riemann_over_F2") {
      m = worst(&PointValues::riemann);
    } else if (c == "mean_berwald") {
      m = worst(&PointValues::mean_berwald);
    } else if (c == "s_curvature") {
      m = worst(&PointValues::s);
    } else if (c == "flag_curvature_fit") {
      m = worst(&PointValues::flag);
    } else if (c == "r_ij") {
      m = worst(&PointValues::r_ij);
    } else if (c == "s_i") {
      m = worst(&PointValues::s_i);
    } else if (c == "s_ij") {
      m = worst(&PointValues::s_ij);
    } else if (c.size() > 9 && c.ends_with("_residual")) {
      m = worst_class(classes, c.substr(0, c.size() - 9));
    } else {
      throw InputError("unknown manifest check '" + c + "'");
    }
    const bool pass = prop.relation == "<" ? m < prop.bound : m > prop.bound;
    out.push_back({prop, m, pass});
  }
  return out;
}

}  // namespace finsler
