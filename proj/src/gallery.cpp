#include "finsler/gallery.hpp"

namespace finsler {

namespace {

const char* kEuclidean = R"MF([metric]
name = "euclidean"
kind = "general"
dim = 3
region_center = [0, 0, 0]
region_radius = 1

[general]
f2 = "y1^2 + y2^2 + y3^2"
)MF";

const char* kRiemannianDiag = R"MF([metric]
name = "riemannian_diag"
kind = "general"
dim = 3
region_center = [0, 0, 0]
region_radius = 1

[general]
f2 = "(1 + x1^2)*y1^2 + y2^2 + y3^2"
)MF";

const char* kSphere2 = R"MF([metric]
name = "sphere2"
kind = "general"
dim = 2
region_center = [0, 0]
region_radius = 1

[general]
f2 = "4*(y1^2 + y2^2)/(1 + x1^2 + x2^2)^2"
)MF";

// F = alpha + beta on the unit ball, w = (-x2, x1, 0), D = 1 - x1^2 - x2^2:
// a_ij = delta_ij/D + w_i w_j/D^2, b_i = w_i/D.
const char* kFunkBall = R"MF([metric]
name = "funk_ball_randers"
kind = "randers"
dim = 3
region_center = [0, 0, 0]
region_radius = 0.5

[alpha]
a_11 = "1/(1 - x1^2 - x2^2) + x2^2/(1 - x1^2 - x2^2)^2"
a_12 = "-x1*x2/(1 - x1^2 - x2^2)^2"
a_13 = "0"
a_22 = "1/(1 - x1^2 - x2^2) + x1^2/(1 - x1^2 - x2^2)^2"
a_23 = "0"
a_33 = "1/(1 - x1^2 - x2^2)"

[beta]
b_1 = "-x2/(1 - x1^2 - x2^2)"
b_2 = "x1/(1 - x1^2 - x2^2)"
b_3 = "0"

[phi]
phi = "1 + s"
)MF";

// a = (-1, 0, 0), w = |x|^2 a - 2 <a,x> x, Delta = 1 - |a|^2 |x|^4 = 1 - |w|^2:
// a_ij = delta_ij/Delta + w_i w_j/Delta^2, b_i = -w_i/Delta.
const char* kShenAvec = R"MF([metric]
name = "shen_avec_randers"
kind = "randers"
dim = 3
region_center = [0, 0, 0]
region_radius = 0.4

[alpha]
a_11 = "1/(1 - (x1^2 + x2^2 + x3^2)^2) + (x1^2 - x2^2 - x3^2)^2/(1 - (x1^2 + x2^2 + x3^2)^2)^2"
a_12 = "2*x1*x2*(x1^2 - x2^2 - x3^2)/(1 - (x1^2 + x2^2 + x3^2)^2)^2"
a_13 = "2*x1*x3*(x1^2 - x2^2 - x3^2)/(1 - (x1^2 + x2^2 + x3^2)^2)^2"
a_22 = "1/(1 - (x1^2 + x2^2 + x3^2)^2) + 4*x1^2*x2^2/(1 - (x1^2 + x2^2 + x3^2)^2)^2"
a_23 = "4*x1^2*x2*x3/(1 - (x1^2 + x2^2 + x3^2)^2)^2"
a_33 = "1/(1 - (x1^2 + x2^2 + x3^2)^2) + 4*x1^2*x3^2/(1 - (x1^2 + x2^2 + x3^2)^2)^2"

[beta]
b_1 = "-(x1^2 - x2^2 - x3^2)/(1 - (x1^2 + x2^2 + x3^2)^2)"
b_2 = "-2*x1*x2/(1 - (x1^2 + x2^2 + x3^2)^2)"
b_3 = "-2*x1*x3/(1 - (x1^2 + x2^2 + x3^2)^2)"

[phi]
phi = "1 + s"
)MF";

// Round S^3 in a stereographic chart, beta = 1/2 times the Hopf one-form
// (unit a-length Killing field V).
const char* kKilling = R"MF([metric]
name = "killing_s3_alphabeta"
kind = "alpha_beta"
dim = 3
region_center = [0, 0, 0]
region_radius = 0.8

[alpha]
a_11 = "4/(1 + x1^2 + x2^2 + x3^2)^2"
a_12 = "0"
a_13 = "0"
a_22 = "4/(1 + x1^2 + x2^2 + x3^2)^2"
a_23 = "0"
a_33 = "4/(1 + x1^2 + x2^2 + x3^2)^2"

[beta]
b_1 = "2*(x1*x3 - x2)/(1 + x1^2 + x2^2 + x3^2)^2"
b_2 = "2*(x1 + x2*x3)/(1 + x1^2 + x2^2 + x3^2)^2"
b_3 = "(1 - x1^2 - x2^2 + x3^2)/(1 + x1^2 + x2^2 + x3^2)^2"

[phi]
phi = "1 + s + 0.25*s^2"
)MF";

struct Raw {
  const char* name;
  const char* text;
  const char* description;
};

const std::vector<Raw>& raw_entries() {
  static const std::vector<Raw> raw{
      {"euclidean", kEuclidean, "flat Euclidean metric on R^3"},
      {"riemannian_diag", kRiemannianDiag, "Riemannian metric diag(1 + x1^2, 1, 1)"},
      {"sphere2", kSphere2, "unit round sphere S^2 in a stereographic chart"},
      {"funk_ball_randers", kFunkBall, "Randers metric on the unit ball with K = 0 and S = 0"},
      {"shen_avec_randers", kShenAvec, "Randers metric of scalar flag curvature, a = (-1, 0, 0)"},
      {"killing_s3_alphabeta", kKilling, "(alpha, beta)-metric on S^3 with a Killing form of constant length"},
  };
  return raw;
}

std::vector<ExpectedProperty> manifest_for(const std::string& name) {
  using P = ExpectedProperty;
  std::vector<P> m{
      {"riebers", "<", 1e-6, "PAPER", "Riemann-Berwald relation"},
      {"lemma_identity", "<", 1e-6, "DERIVED", "Weyl / Douglas / theta identity"},
      {"douglas_forms", "<", 1e-10, "PAPER", "two Douglas formulas agree"},
      {"y_annihilation", "<", 1e-9, "TRIVIAL", "R y = W y = B y = D y = h y = 0"},
      {"douglas_trace", "<", 1e-9, "TRIVIAL", "D_j^m_km = 0"},
  };
  if (name == "euclidean") {
    m.push_back({"max_curvature_norm", "<", 1e-12, "TRIVIAL", "all curvature tensors vanish"});
  } else if (name == "riemannian_diag") {
    m.push_back({"berwald_residual", "<", 1e-9, "TRIVIAL", "Riemannian metrics are Berwald"});
  } else if (name == "sphere2") {
    m.push_back({"flag_curvature_fit", "<", 1e-7, "DERIVED", "K = 1"});
  } else if (name == "funk_ball_randers") {
    m.push_back({"riemann_over_F2", "<", 1e-7, "PAPER", "vanishing flag curvature K = 0"});
    m.push_back({"mean_berwald", "<", 1e-7, "PAPER", "S = 0 implies E = 0"});
    m.push_back({"s_curvature", "<", 1e-4, "PAPER", "S = 0"});
    m.push_back({"douglas_residual", ">", 1e-3, "PAPER", "not of Douglas type"});
    m.push_back({"weyl_residual", "<", 1e-7, "PAPER", "zero Weyl curvature"});
    m.push_back({"generalized_dtilde_residual", "<", 1e-6, "PAPER", "generalized Dtilde-metric"});
  } else if (name == "shen_avec_randers") {
    m.push_back({"weyl_residual", "<", 1e-6, "PAPER", "scalar flag curvature"});
    m.push_back({"douglas_residual", ">", 1e-3, "PAPER", "not a Douglas metric"});
    m.push_back({"generalized_dtilde_residual", ">", 1e-2, "PAPER", "not a generalized Dtilde-metric"});
    m.push_back({"isotropic_mean_berwald_residual", "<", 1e-6, "PAPER", "isotropic S-curvature, c = <a, x>"});
  } else if (name == "killing_s3_alphabeta") {
    m.push_back({"r_ij", "<", 1e-8, "DERIVED", "beta is Killing"});
    m.push_back({"s_i", "<", 1e-8, "DERIVED", "beta has constant length"});
    m.push_back({"s_ij", ">", 1e-3, "DERIVED", "beta is not closed"});
    m.push_back({"gdw_residual", ">", 0.1, "PAPER", "not GDW"});
  }
  return m;
}

}  // namespace

const std::vector<std::string>& gallery_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& r : raw_entries()) v.push_back(r.name);
    return v;
  }();
  return names;
}

GalleryEntry gallery_load(const std::string& name) {
  for (const auto& r : raw_entries()) {
    if (name == r.name) {
      GalleryEntry e;
      e.spec = parse_metric_file(r.text, std::string("gallery:") + r.name);
      e.description = r.description;
      e.manifest = manifest_for(name);
      return e;
    }
  }
  std::string known;
  for (const auto& r : raw_entries()) known += std::string(known.empty() ? "" : ", ") + r.name;
  throw InputError("unknown gallery metric '" + name + "' (known: " + known + ")");
}

std::string gallery_export(const std::string& name) { return format_metric_file(gallery_load(name).spec); }

}  // namespace finsler
