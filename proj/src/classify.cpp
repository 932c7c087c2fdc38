#include "finsler/classify.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include "json.hpp"
#include <sstream>
#include <thread>

namespace finsler {

namespace {

using Json = nlohmann::ordered_json;

double ip(const TensorSample& a, const TensorSample& b) { return dot(a.values, b.values); }

std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + a * y[k];
  return out;
}

FitResult norm_test(const TensorSample& T) {
  FitResult r;
  r.residual = T.norm();
  r.reference = r.residual;
  return r;
}

/// Linear least squares M u = rhs with minimum-norm solution.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs, bool& rank_deficient) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  rank_deficient = svd.rank() < M.cols();
  return svd.solve(rhs);
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double relative_residual(double diff, double ref, double vacuity) { return ref >= vacuity ? diff / ref : diff; }

TensorSample project_off_y(const TensorSample& T, int slot, const FundamentalData& fd) {
  if (slot < 0 || slot >= T.rank() || T.variance[slot] != 'u') {
    throw InputError("project_off_y needs an upper index at slot " + std::to_string(slot));
  }
  const int n = T.dim;
  const double F2 = fd.F * fd.F;
  const std::vector<double>& y = T.at.y;
  std::size_t inner = 1;
  for (int a = slot + 1; a < T.rank(); ++a) inner *= n;
  const std::size_t outer = T.values.size() / (inner * n);
  TensorSample out = T;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t q = 0; q < inner; ++q) {
      double c = 0.0;
      for (int m = 0; m < n; ++m) c += fd.y_lower[m] * T.values[(o * n + m) * inner + q];
      c /= F2;
      for (int i = 0; i < n; ++i) out.values[(o * n + i) * inner + q] -= c * y[i];
    }
  }
  return out;
}

FitResult test_berwald(CurvatureBundle& cb, const FundamentalData&, const ClassifyOptions&) {
  return norm_test(cb.sample("B"));
}

FitResult test_douglas(CurvatureBundle& cb, const FundamentalData&, const ClassifyOptions&) {
  return norm_test(cb.sample("D"));
}

FitResult test_weyl(CurvatureBundle& cb, const FundamentalData&, const ClassifyOptions&) {
  return norm_test(cb.sample("W"));
}

FitResult test_weakly_berwald(CurvatureBundle& cb, const FundamentalData&, const ClassifyOptions&) {
  return norm_test(cb.sample("E"));
}

FitResult test_gdw(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const TensorSample Dt = cb.sample("Dtilde");
  const TensorSample C = project_off_y(Dt, 1, fd);
  const int n = Dt.dim;
  FitResult r;
  r.reference = Dt.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual(C.norm(), r.reference, o.vacuity);
  // T_jkl = g_mr Dt_j^m_kl y^r / F^2
  std::vector<double> T(n * n * n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += fd.y_lower[m] * Dt.values[((j * n + m) * n + k) * n + l];
        T[(j * n + k) * n + l] = s / (fd.F * fd.F);
      }
    }
  }
  r.set("T", std::move(T));
  if (r.vacuous) r.note = "Dtilde vanishes: vacuously GDW";
  return r;
}

FitResult test_wgdw(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const TensorSample Dt = cb.sample("Dtilde");
  const TensorSample D0 = cb.sample("Dtilde_0");
  const TensorSample C = project_off_y(Dt, 1, fd);
  const TensorSample A = project_off_y(D0, 1, fd);
  FitResult r;
  double lambda = 0.0;
  if (C.norm() >= o.vacuity) {
    lambda = -ip(A, C) / (fd.F * ip(C, C));
  } else {
    r.note = "projected Dtilde vanishes: lambda indeterminate";
  }
  r.set("lambda", {lambda});
  r.reference = D0.norm() + Dt.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual(frobenius(axpy(A.values, lambda * fd.F, C.values)), r.reference, o.vacuity);
  return r;
}

FitResult test_generalized_dtilde(CurvatureBundle& cb, const FundamentalData&, const ClassifyOptions& o) {
  const TensorSample Dt = cb.sample("Dtilde");
  const TensorSample D0 = cb.sample("Dtilde_0");
  const int n = Dt.dim;
  const auto& y = Dt.at.y;
  const std::size_t N = Dt.values.size();
  Eigen::MatrixXd M(N, n);
  Eigen::VectorXd rhs(N);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const std::size_t row = ((j * n + i) * n + k) * n + l;
          for (int q = 0; q < n; ++q) M(row, q) = Dt.values[((j * n + q) * n + k) * n + l] * y[i];
          rhs(row) = -D0.values[row];
        }
      }
    }
  }
  bool deficient = false;
  const Eigen::VectorXd mu = least_squares(M, rhs, deficient);
  FitResult r;
  r.set("mu", to_vec(mu));
  r.reference = D0.norm() + Dt.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual((M * mu - rhs).norm(), r.reference, o.vacuity);
  if (deficient && !r.vacuous) r.note = "rank-deficient: minimum-norm mu";
  return r;
}

FitResult test_generalized_weakly_weyl(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const TensorSample Wt = cb.sample("Wtilde");
  const TensorSample W0 = cb.sample("Wtilde_0");
  const int n = Wt.dim;
  const auto& y = Wt.at.y;
  const std::size_t N = Wt.values.size();
  Eigen::MatrixXd M(N, n + 1);
  Eigen::VectorXd rhs(N);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const std::size_t row = ((j * n + i) * n + k) * n + l;
          M(row, 0) = fd.F * Wt.values[row];
          for (int q = 0; q < n; ++q) M(row, 1 + q) = -Wt.values[((j * n + q) * n + k) * n + l] * y[i];
          rhs(row) = -W0.values[row];
        }
      }
    }
  }
  bool deficient = false;
  const Eigen::VectorXd u = least_squares(M, rhs, deficient);
  FitResult r;
  r.set("lambda", {u(0)});
  r.set("mu", to_vec(u.tail(n)));
  r.reference = W0.norm() + Wt.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual((M * u - rhs).norm(), r.reference, o.vacuity);
  if (deficient && !r.vacuous) r.note = "rank-deficient: minimum-norm (lambda, mu)";
  return r;
}

FitResult test_relatively_isotropic_dtilde(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const TensorSample Dt = cb.sample("Dtilde");
  const TensorSample D0 = cb.sample("Dtilde_0");
  FitResult r;
  double lambda = 0.0;
  if (Dt.norm() >= o.vacuity) {
    lambda = -ip(D0, Dt) / (fd.F * ip(Dt, Dt));
  } else {
    r.note = "Dtilde vanishes: lambda indeterminate";
  }
  r.set("lambda", {lambda});
  r.reference = D0.norm() + Dt.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual(frobenius(axpy(D0.values, lambda * fd.F, Dt.values)), r.reference, o.vacuity);
  return r;
}

FitResult test_isotropic_stretch_douglas(CurvatureBundle& cb, const FundamentalData&, const ClassifyOptions& o) {
  const TensorSample SD = cb.sample("StretchD");
  const TensorSample Dm = cb.D_m().sample("D_m", cb.point());
  const int n = SD.dim;
  TensorSample X = Dm;
  for (std::size_t k = 0; k < X.values.size(); ++k) {
    const std::size_t l = (k / n) % n, m = k % n;
    const std::size_t swapped = k - l * n - m + m * n + l;
    X.values[k] = Dm.values[k] - Dm.values[swapped];
  }
  FitResult r;
  double lambda = 0.0;
  if (X.norm() >= o.vacuity) lambda = ip(SD, X) / ip(X, X);
  r.set("lambda", {lambda});
  r.reference = SD.norm() + X.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual(frobenius(axpy(SD.values, -lambda, X.values)), r.reference, o.vacuity);
  return r;
}

FitResult test_isotropic_mean_berwald(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const TensorSample E = cb.sample("E");
  const int n = E.dim;
  const double hh = dot(fd.h.values, fd.h.values);
  const double c = 2.0 / (n + 1) * fd.F * dot(E.values, fd.h.values) / hh;
  FitResult r;
  r.set("c", {c});
  r.reference = E.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual =
      relative_residual(frobenius(axpy(E.values, -0.5 * (n + 1) * c / fd.F, fd.h.values)), r.reference, o.vacuity);
  return r;
}

FitResult test_d_recurrent(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const JetTensor& D = cb.D();
  const JetTensor& Dt = cb.Dtilde();
  const TensorSample Ds = D.sample("D", cb.point());
  const TensorSample Dts = Dt.sample("Dtilde", cb.point());
  FitResult r;
  r.reference = Dts.norm();
  if (Ds.norm() < 1e-10) {
    r.vacuous = true;
    r.note = "D vanishes: vacuous";
    r.set("sigma", {0.0});
    return r;
  }
  if (Dts.norm() < o.vacuity) {
    r.set("sigma", {0.0});
    r.residual = 1.0;
    r.note = "sigma vanishes: theorem hypotheses not met (sigma must be non-zero)";
    return r;
  }
  Jet num = Dt[0] * D[0];
  Jet den = D[0] * D[0];
  for (std::size_t k = 1; k < D.size(); ++k) {
    num += Dt[k] * D[k];
    den += D[k] * D[k];
  }
  const Jet sigma = num / den;
  const double s = sigma.value();
  r.set("sigma", {s});
  r.residual = relative_residual(frobenius(axpy(Dts.values, -s, Ds.values)), r.reference, o.vacuity);
  if (r.residual < o.tol && std::abs(s) > 0.0) {
    const JetTensor s0 = horizontal_derivative_0(scalar_tensor(sigma, Ds.dim), cb.spray());
    const double sig0 = s0[0].value();
    r.set("sigma_0", {sig0});
    r.set("lambda", {-(sig0 + s * s) / (fd.F * s)});
  }
  return r;
}

FitResult fit_scalar_flag_curvature(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o) {
  const TensorSample R = cb.sample("R");
  const int n = R.dim;
  const double F2 = fd.F * fd.F;
  std::vector<double> M(n * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) M[i * n + k] = (i == k ? F2 : 0.0) - R.at.y[i] * fd.y_lower[k];
  }
  const double K = dot(R.values, M) / dot(M, M);
  FitResult r;
  r.set("K", {K});
  r.reference = R.norm();
  r.vacuous = r.reference < o.vacuity;
  r.residual = relative_residual(frobenius(axpy(R.values, -K, M)), r.reference, o.vacuity);
  return r;
}

const std::vector<ClassInfo>& class_registry() {
  static const std::vector<ClassInfo> reg{
      {"berwald", test_berwald},
      {"douglas", test_douglas},
      {"weyl", test_weyl},
      {"weakly_berwald", test_weakly_berwald},
      {"gdw", test_gdw},
      {"wgdw", test_wgdw},
      {"generalized_dtilde", test_generalized_dtilde},
      {"generalized_weakly_weyl", test_generalized_weakly_weyl},
      {"relatively_isotropic_dtilde", test_relatively_isotropic_dtilde},
      {"isotropic_stretch_douglas", test_isotropic_stretch_douglas},
      {"isotropic_mean_berwald", test_isotropic_mean_berwald},
      {"d_recurrent", test_d_recurrent},
      {"scalar_flag_curvature", fit_scalar_flag_curvature},
  };
  return reg;
}

// ---------------------------------------------------------------------------

void parallel_for(int count, int threads, const std::function<void(int)>& f) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ClassResult> classify_points(const Metric& metric, const Spray& spray,
                                         const std::vector<EvalPoint>& points, const ClassifyOptions& o) {
  const auto& reg = class_registry();
  const int np = static_cast<int>(points.size());
  std::vector<std::vector<FitResult>> fits(np);
  auto run = [&](const EvalPoint& p) {
    const FundamentalData fd = fundamental_tensor(metric, p);
    CurvatureBundle cb(spray, p, o.f2_order);
    std::vector<FitResult> out;
    for (const auto& c : reg) out.push_back(c.test(cb, fd, o));
    return out;
  };
  parallel_for(np, o.threads, [&](int k) {
    const EvalPoint p = normalized(metric, points[k]);
    fits[k] = run(p);
    if (o.rescaling_check) {
      EvalPoint q = p;
      for (double& v : q.y) v *= 2.0;
      const auto scaled = run(q);
      for (std::size_t c = 0; c < reg.size(); ++c) {
        const auto* l1 = fits[k][c].param("lambda");
        const auto* l2 = scaled[c].param("lambda");
        if (l1 && l2 && std::abs(l1->front()) > 0.0 && std::abs(l2->front()) > 0.0 &&
            (*l1)[0] * (*l2)[0] > 0.0) {
          fits[k][c].set("lambda_degree", {std::log2((*l2)[0] / (*l1)[0])});
        }
        fits[k][c].set("residual_2y", {scaled[c].residual});
      }
    }
  });
  std::vector<ClassResult> out;
  for (std::size_t c = 0; c < reg.size(); ++c) {
    ClassResult cr;
    cr.name = reg[c].name;
    for (int k = 0; k < np; ++k) {
      cr.fits.push_back(fits[k][c]);
      cr.worst_residual = std::max(cr.worst_residual, fits[k][c].residual);
    }
    cr.pass = cr.worst_residual < o.tol;
    out.push_back(std::move(cr));
  }
  return out;
}

std::vector<ClassResult> classify_points(const Metric& metric, const std::vector<EvalPoint>& points,
                                         const ClassifyOptions& o) {
  MetricSpray spray(std::shared_ptr<const Metric>(&metric, [](const Metric*) {}));
  return classify_points(metric, spray, points, o);
}

// ---------------------------------------------------------------------------
// Serialization

const ClassResult* ClassificationReport::find(const std::string& name) const {
  for (const auto& c : classes) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ClassificationReport::to_json() const {
  Json j;
  j["metric"] = config.metric;
  j["config"] = {{"points", config.points},
                 {"seed", config.seed},
                 {"tol", config.tol},
                 {"order", config.f2_order},
                 {"quad",
                  {{"circle", config.quad.circle_points},
                   {"polar", config.quad.polar_points},
                   {"azimuth", config.quad.azimuth_points}}}};
  Json pts = Json::array();
  for (const auto& p : points) pts.push_back({{"x", p.x}, {"y", p.y}});
  j["points"] = pts;
  Json cls = Json::object();
  for (const auto& c : classes) {
    Json fits = Json::array();
    for (const auto& f : c.fits) {
      Json params = Json::object();
      for (const auto& [k, v] : f.params) params[k] = v;
      fits.push_back({{"residual", f.residual},
                      {"reference", f.reference},
                      {"vacuous", f.vacuous},
                      {"params", params},
                      {"note", f.note}});
    }
    cls[c.name] = {{"verdict", c.pass ? "pass" : "fail"}, {"worst_residual", c.worst_residual}, {"fits", fits}};
  }
  j["classes"] = cls;
  Json ids = Json::array();
  for (const auto& r : identities) {
    ids.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"verdict", r.pass ? "pass" : "fail"},
                   {"worst", r.worst},
                   {"bound", r.bound},
                   {"residuals", r.residuals},
                   {"note", r.note}});
  }
  j["identities"] = ids;
  j["timing"] = timing ? Json(*timing) : Json(nullptr);
  return j.dump(2) + "\n";
}

ClassificationReport ClassificationReport::from_json(const std::string& text) {
  ClassificationReport r;
  try {
    const Json j = Json::parse(text);
    r.config.metric = j.at("metric").get<std::string>();
    const auto& c = j.at("config");
    r.config.points = c.at("points").get<int>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.tol = c.at("tol").get<double>();
    r.config.f2_order = c.at("order").get<int>();
    r.config.quad.circle_points = c.at("quad").at("circle").get<int>();
    r.config.quad.polar_points = c.at("quad").at("polar").get<int>();
    r.config.quad.azimuth_points = c.at("quad").at("azimuth").get<int>();
    for (const auto& p : j.at("points")) {
      r.points.push_back({p.at("x").get<std::vector<double>>(), p.at("y").get<std::vector<double>>()});
    }
    for (const auto& [name, v] : j.at("classes").items()) {
      ClassResult cr;
      cr.name = name;
      cr.pass = v.at("verdict").get<std::string>() == "pass";
      cr.worst_residual = v.at("worst_residual").get<double>();
      for (const auto& f : v.at("fits")) {
        FitResult fr;
        fr.residual = f.at("residual").get<double>();
        fr.reference = f.at("reference").get<double>();
        fr.vacuous = f.at("vacuous").get<bool>();
        fr.note = f.at("note").get<std::string>();
        for (const auto& [k, pv] : f.at("params").items()) fr.set(k, pv.get<std::vector<double>>());
        cr.fits.push_back(std::move(fr));
      }
      r.classes.push_back(std::move(cr));
    }
    for (const auto& v : j.at("identities")) {
      IdentityRow row;
      row.suite = v.at("suite").get<std::string>();
      row.name = v.at("name").get<std::string>();
      row.pass = v.at("verdict").get<std::string>() == "pass";
      row.worst = v.at("worst").get<double>();
      row.bound = v.at("bound").get<double>();
      row.residuals = v.at("residuals").get<std::vector<double>>();
      row.note = v.at("note").get<std::string>();
      r.identities.push_back(std::move(row));
    }
    if (!j.at("timing").is_null()) r.timing = j.at("timing").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid report JSON: ") + e.what());
  }
  return r;
}

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string ClassificationReport::to_csv() const {
  std::ostringstream os;
  os << "point_index,class,residual,verdict,params\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (const auto& c : classes) {
      if (k >= c.fits.size()) continue;
      const FitResult& f = c.fits[k];
      std::string params;
      for (const auto& [name, v] : f.params) {
        if (!params.empty()) params += ";";
        params += name + "=";
        for (std::size_t i = 0; i < v.size(); ++i) params += (i ? " " : "") + fmt17(v[i]);
      }
      os << k << "," << c.name << "," << fmt17(f.residual) << "," << (f.residual < config.tol ? "pass" : "fail")
         << "," << params << "\n";
    }
  }
  return os.str();
}

std::string ClassificationReport::to_text() const {
  std::ostringstream os;
  char line[256];
  os << "metric: " << config.metric << "  points: " << points.size() << "  seed: " << config.seed
     << "  tol: " << config.tol << "  order: " << config.f2_order << "\n";
  if (!classes.empty()) {
    std::snprintf(line, sizeof line, "%-30s %-8s %s\n", "class", "verdict", "worst residual");
    os << line;
    for (const auto& c : classes) {
      std::snprintf(line, sizeof line, "%-30s %-8s %.3e\n", c.name.c_str(), c.pass ? "pass" : "fail",
                    c.worst_residual);
      os << line;
    }
  }
  if (!identities.empty()) {
    std::snprintf(line, sizeof line, "%-12s %-40s %-8s %-10s %s\n", "suite", "identity", "verdict", "worst", "bound");
    os << line;
    for (const auto& r : identities) {
      std::snprintf(line, sizeof line, "%-12s %-40s %-8s %.3e  %.1e%s\n", r.suite.c_str(), r.name.c_str(),
                    r.pass ? "pass" : "fail", r.worst, r.bound, r.note.empty() ? "" : ("  " + r.note).c_str());
      os << line;
    }
  }
  if (timing) os << "time: " << *timing << " s\n";
  return os.str();
}

}  // namespace finsler
