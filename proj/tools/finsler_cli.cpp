// finsler: command-line front end.
//
// Exit codes: 0 success, 1 an identity check failed, 2 input error,
// 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "finsler/error.hpp"
#include "finsler/gallery.hpp"
#include "finsler/identities.hpp"
#include "finsler/projective.hpp"
#include "finsler/sampling.hpp"

using namespace finsler;

namespace {

struct RunConfig {
  std::string metric_path;
  std::string gallery;
  int points = 10;
  std::uint64_t seed = 42;
  double tol = 1e-5;
  std::string order = "auto";
  int quad = 0;
  std::string format = "text";
  std::string out;
  int threads = 1;
  bool timing = false;
  bool rescaling = false;
  std::vector<std::string> factors;
  std::string suite = "all";
  std::string name;
  std::string at;
};

void add_common(CLI::App* cmd, RunConfig& c, bool sampled) {
  auto* src = cmd->add_option_group("source");
  src->add_option("--metric", c.metric_path, "metric file");
  src->add_option("--gallery", c.gallery, "gallery metric name");
  src->require_option(1);
  cmd->add_option("--order", c.order, "F^2 jet order, or auto");
  cmd->add_option("--format", c.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  cmd->add_option("--out", c.out, "output file (default stdout)");
  if (sampled) {
    cmd->add_option("--points", c.points, "number of sampled points")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "sampling seed");
    cmd->add_option("--tol", c.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--quad", c.quad, "Gauss-Legendre polar order for the indicatrix volume")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--timing", c.timing, "include wall time in the report");
  }
}

std::shared_ptr<const Metric> load_metric(const RunConfig& c) {
  MetricSpec spec = c.gallery.empty() ? load_metric_file(c.metric_path) : gallery_load(c.gallery).spec;
  return std::make_shared<const Metric>(std::move(spec));
}

int parse_order(const RunConfig& c, int fallback) {
  if (c.order == "auto") return fallback;
  try {
    std::size_t used = 0;
    const int k = std::stoi(c.order, &used);
    if (used == c.order.size() && k >= 2 && k <= 16) return k;
  } catch (const std::exception&) {
  }
  throw InputError("--order must be an integer in [2, 16] or 'auto', got '" + c.order + "'");
}

ClassifyOptions classify_options(const RunConfig& c) {
  ClassifyOptions o;
  o.tol = c.tol;
  o.f2_order = parse_order(c, 9);
  o.threads = c.threads;
  o.rescaling_check = c.rescaling;
  if (c.quad > 0) {
    o.quad.polar_points = c.quad;
    o.quad.azimuth_points = 2 * c.quad;
    o.quad.circle_points = 8 * c.quad;
  }
  return o;
}

std::vector<EvalPoint> sample(const Metric& m, const RunConfig& c) {
  auto pts = sample_points(m, c.points, c.seed);
  for (auto& p : pts) p = normalized(m, p);
  return pts;
}

RunInfo run_info(const Metric& m, const RunConfig& c, const ClassifyOptions& o) {
  RunInfo info;
  info.metric = m.spec().name;
  info.points = c.points;
  info.seed = c.seed;
  info.tol = o.tol;
  info.f2_order = o.f2_order;
  info.quad = o.quad;
  return info;
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw InputError("cannot write '" + c.out + "'");
  f << text;
}

std::string render(const ClassificationReport& r, const std::string& format) {
  if (format == "json") return r.to_json() + "\n";
  if (format == "csv") return r.to_csv();
  return r.to_text();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

int cmd_classify(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = load_metric(c);
  const ClassifyOptions o = classify_options(c);
  ClassificationReport r;
  r.config = run_info(*m, c, o);
  r.points = sample(*m, c);
  r.classes = classify_points(*m, r.points, o);
  if (c.timing) r.timing = seconds_since(t0);
  emit(c, render(r, c.format));
  return 0;
}

int cmd_identities(const RunConfig& c, bool projective_only) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = load_metric(c);
  IdentityOptions o;
  o.classify = classify_options(c);
  o.factors = c.factors;
  ClassificationReport r;
  r.config = run_info(*m, c, o.classify);
  r.points = sample(*m, c);
  r.identities = run_identities(m, projective_only ? "projective" : c.suite, r.points, o);
  if (c.timing) r.timing = seconds_since(t0);
  emit(c, render(r, c.format));
  if (projective_only) return 0;
  return all_pass(r.identities) ? 0 : 1;
}

const std::map<std::string, std::string>& tensor_aliases() {
  static const std::map<std::string, std::string> m{
      {"spray", "G"},           {"nonlinear_connection", "N"}, {"christoffel", "Gamma"},
      {"riemann", "R"},         {"ricci", "Ric"},              {"riemann_kl", "R_kl"},
      {"riemann_jkl", "R_jkl"}, {"berwald", "B"},              {"mean_berwald", "E"},
      {"h_curvature", "H"},     {"douglas", "D"},              {"douglas_mean", "D2"},
      {"dtilde", "Dtilde"},     {"dtilde_0", "Dtilde_0"},      {"stretch_douglas", "StretchD"},
      {"weyl", "W"},            {"weakly_weyl", "W_jkl"},      {"wtilde", "Wtilde"},
      {"wtilde_0", "Wtilde_0"}};
  return m;
}

int tensor_order(const std::string& name) {
  static const std::map<std::string, Quantity> q{
      {"G", Quantity::spray},          {"N", Quantity::connection},      {"Gamma", Quantity::gamma},
      {"R", Quantity::riemann},        {"Ric", Quantity::riemann},       {"R_kl", Quantity::riemann_kl},
      {"R_jkl", Quantity::riemann_jkl}, {"B", Quantity::berwald},        {"E", Quantity::mean_berwald},
      {"H", Quantity::h_curvature},    {"D", Quantity::douglas},         {"D2", Quantity::douglas},
      {"Dtilde", Quantity::dtilde},    {"Dtilde_0", Quantity::dtilde_0}, {"StretchD", Quantity::stretch_douglas},
      {"W", Quantity::weyl},           {"W_jkl", Quantity::weakly_weyl}, {"Wtilde", Quantity::wtilde},
      {"Wtilde_0", Quantity::wtilde_0}, {"theta", Quantity::theta}};
  return required_f2_order(q.at(name));
}

int cmd_tensor(const RunConfig& c) {
  const auto m = load_metric(c);
  std::string name = c.name;
  if (auto it = tensor_aliases().find(name); it != tensor_aliases().end()) name = it->second;
  const auto& names = CurvatureBundle::tensor_names();
  const bool fundamental = name == "g" || name == "h";
  if (!fundamental && std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list = "g, h";
    for (const auto& [k, v] : tensor_aliases()) list += ", " + k;
    for (const auto& k : names) list += ", " + k;
    throw InputError("unknown tensor '" + c.name + "' (known: " + list + ")");
  }
  const EvalPoint p = parse_point(c.at, m->dim());
  try {
    validate_point(*m, p);
  } catch (const DomainError& e) {
    throw InputError(std::string("invalid point: ") + e.what());
  }
  TensorSample t;
  if (fundamental) {
    const FundamentalData fd = fundamental_tensor(*m, p);
    t = name == "g" ? fd.g : fd.h;
  } else {
    MetricSpray spray(m);
    CurvatureBundle cb(spray, p, parse_order(c, tensor_order(name)));
    t = cb.sample(name);
  }
  const double F = m->norm(p.x, p.y);
  std::ostringstream os;
  if (c.format == "json") {
    nlohmann::ordered_json j;
    j["metric"] = m->spec().name;
    j["tensor"] = t.label;
    j["variance"] = t.variance;
    j["dim"] = t.dim;
    j["at"] = {{"x", p.x}, {"y", p.y}};
    j["F"] = F;
    j["norm"] = t.norm();
    j["values"] = t.values;
    os << j.dump(2) << "\n";
  } else if (c.format == "csv") {
    os << "index,value\n";
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      std::size_t r = k;
      std::string idx;
      for (int a = t.rank() - 1; a >= 0; --a) {
        idx = std::to_string(r % t.dim + 1) + (idx.empty() ? "" : " ") + idx;
        r /= t.dim;
      }
      char v[32];
      std::snprintf(v, sizeof v, "%.17g", t.values[k]);
      os << idx << "," << v << "\n";
    }
  } else {
    char line[160];
    std::snprintf(line, sizeof line, "%s (%s) of %s, n = %d\n", t.label.c_str(), t.variance.c_str(),
                  m->spec().name.c_str(), t.dim);
    os << line;
    std::snprintf(line, sizeof line, "F = %.17g  norm = %.6e  norm/F^2 = %.6e\n", F, t.norm(), t.norm() / (F * F));
    os << line;
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      std::size_t r = k;
      std::string idx;
      for (int a = t.rank() - 1; a >= 0; --a) {
        idx = std::to_string(r % t.dim + 1) + idx;
        r /= t.dim;
      }
      std::snprintf(line, sizeof line, "  [%s] % .17g\n", idx.empty() ? "-" : idx.c_str(), t.values[k]);
      os << line;
    }
  }
  emit(c, os.str());
  return 0;
}

int cmd_gallery_list() {
  for (const auto& n : gallery_names()) std::cout << n << "  " << gallery_load(n).description << "\n";
  return 0;
}

int cmd_gallery_export(const std::string& name, const std::string& out) {
  const std::string text = gallery_export(name);
  RunConfig c;
  c.out = out;
  emit(c, text);
  return 0;
}

int cmd_gallery_check(const std::string& name, int points, std::uint64_t seed, int threads) {
  ClassifyOptions o;
  o.threads = threads;
  const auto results = check_manifest(gallery_load(name), points, seed, o);
  bool ok = true;
  char line[256];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-6s %-34s %.3e %s %.0e  [%s] %s\n", r.pass ? "PASS" : "FAIL",
                  r.property.check.c_str(), r.measured, r.property.relation.c_str(), r.property.bound,
                  r.property.provenance.c_str(), r.property.note.c_str());
    std::cout << line;
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler metric classifier: curvature tensors, identity checks, projective changes"};
  app.require_subcommand(1);
  RunConfig c;

  auto* classify = app.add_subcommand("classify", "residual tests for every metric class");
  add_common(classify, c, true);
  classify->add_flag("--rescaling", c.rescaling, "also fit lambda at (x, 2y) and report its degree");

  auto* tensor = app.add_subcommand("tensor", "print one tensor at a point");
  add_common(tensor, c, false);
  tensor->add_option("--name", c.name, "tensor name")->required();
  tensor->add_option("--at", c.at, "point, e.g. \"x=0.1,0.2,0;y=1,0.5,0.3\"")->required();

  auto* identities = app.add_subcommand("identities", "identity suites at sampled points");
  add_common(identities, c, true);
  identities->add_option("--suite", c.suite, "all, riemann_berwald, es, lemma_wdtheta, structure, killing, projective");
  identities->add_option("--factor", c.factors, "projective factor (repeatable)");

  auto* projective = app.add_subcommand("projective", "invariance checks under G -> G + P y");
  add_common(projective, c, true);
  projective->add_option("--factor", c.factors, "projective factor P(x, y)")->required();

  auto* gallery = app.add_subcommand("gallery", "bundled example metrics");
  gallery->require_subcommand(1);
  gallery->add_subcommand("list", "list gallery metrics");
  std::string export_name, export_out;
  auto* gexport = gallery->add_subcommand("export", "write a gallery metric file");
  gexport->add_option("name", export_name, "gallery metric")->required();
  gexport->add_option("--out", export_out, "output file (default stdout)");
  std::string check_name;
  int check_points = 10, check_threads = 1;
  std::uint64_t check_seed = 42;
  auto* gcheck = gallery->add_subcommand("check", "re-measure a gallery metric's expected properties");
  gcheck->add_option("name", check_name, "gallery metric")->required();
  gcheck->add_option("--points", check_points, "number of sampled points")->check(CLI::PositiveNumber);
  gcheck->add_option("--seed", check_seed, "sampling seed");
  gcheck->add_option("--threads", check_threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*classify) return cmd_classify(c);
    if (*tensor) return cmd_tensor(c);
    if (*identities) return cmd_identities(c, false);
    if (*projective) return cmd_identities(c, true);
    if (gexport->parsed()) return cmd_gallery_export(export_name, export_out);
    if (gcheck->parsed()) return cmd_gallery_check(check_name, check_points, check_seed, check_threads);
    return cmd_gallery_list();
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
