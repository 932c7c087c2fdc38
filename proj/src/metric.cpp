#include "finsler/metric.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace finsler {

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::general: return "general";
    case MetricKind::alpha_beta: return "alpha_beta";
    case MetricKind::randers: return "randers";
  }
  return "general";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "general") return MetricKind::general;
  if (s == "alpha_beta") return MetricKind::alpha_beta;
  if (s == "randers") return MetricKind::randers;
  throw InputError("unknown metric kind '" + s + "' (expected general, alpha_beta or randers)");
}

bool Region::contains(std::span<const double> x) const {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - (i < center.size() ? center[i] : 0.0);
    r2 += d * d;
  }
  return r2 <= radius * radius * (1.0 + 1e-12);
}

std::vector<std::string> coordinate_names(int dim) {
  std::vector<std::string> names;
  for (int i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  for (int i = 1; i <= dim; ++i) names.push_back("y" + std::to_string(i));
  return names;
}

namespace {

int upper_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  // rows 0..i-1 contribute n, n-1, ..., n-i+1 entries
  return i * n - i * (i - 1) / 2 + (j - i);
}

std::set<std::string> x_names(int dim) {
  std::set<std::string> s;
  for (int i = 1; i <= dim; ++i) s.insert("x" + std::to_string(i));
  return s;
}

}  // namespace

const Expression& MetricSpec::a(int i, int j) const { return alpha.at(upper_index(i, j, dim)); }

void MetricSpec::validate_structure() const {
  if (dim < 1 || dim > 8) throw InputError("metric dim must be in [1, 8], got " + std::to_string(dim));
  if (region.center.size() != static_cast<std::size_t>(dim)) {
    throw InputError("region_center has " + std::to_string(region.center.size()) + " entries, expected " +
                     std::to_string(dim));
  }
  if (!(region.radius > 0.0)) throw InputError("region_radius must be positive");
  if (kind == MetricKind::general) {
    if (f2.empty()) throw InputError("general metric requires [general] f2");
    auto names = coordinate_names(dim);
    f2.validate({names.begin(), names.end()});
    return;
  }
  const std::size_t tri = static_cast<std::size_t>(dim * (dim + 1) / 2);
  if (alpha.size() != tri) throw InputError("[alpha] must define all a_ij with i <= j");
  if (beta.size() != static_cast<std::size_t>(dim)) throw InputError("[beta] must define b_1..b_" + std::to_string(dim));
  auto xs = x_names(dim);
  for (std::size_t k = 0; k < tri; ++k) {
    if (alpha[k].empty()) throw InputError("[alpha] is missing an entry");
    alpha[k].validate(xs);
  }
  for (const auto& b : beta) {
    if (b.empty()) throw InputError("[beta] is missing an entry");
    b.validate(xs);
  }
  if (phi.empty()) throw InputError("(alpha, beta) metric requires [phi] phi");
  phi.validate({"s"});
}

// ---------------------------------------------------------------------------
// File format

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void file_error(const std::string& origin, int line, const std::string& msg) {
  throw InputError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string unquote(const std::string& v, const std::string& origin, int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (!v.empty() && (v.front() == '"' || v.back() == '"')) file_error(origin, line, "unterminated string");
  return v;
}

double parse_double(const std::string& v, const std::string& origin, int line) {
  const std::string t = trim(v);
  double d = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), d);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) file_error(origin, line, "expected a number, got '" + t + "'");
  return d;
}

std::vector<double> parse_list(std::string v, const std::string& origin, int line) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') file_error(origin, line, "unterminated list");
    v = v.substr(1, v.size() - 2);
  } else {
    v = unquote(v, origin, line);
  }
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, origin, line));
  return out;
}

Expression parse_expr_value(const std::string& v, const std::string& origin, int line) {
  try {
    return parse(unquote(trim(v), origin, line));
  } catch (const ParseError& e) {
    file_error(origin, line, e.what());
  }
}

}  // namespace

MetricSpec parse_metric_file(const std::string& text, const std::string& origin) {
  MetricSpec spec;
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = raw;
    // Strip comments outside of quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (l[i] == '"') quoted = !quoted;
      if (l[i] == '#' && !quoted) {
        l = l.substr(0, i);
        break;
      }
    }
    l = trim(l);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') file_error(origin, line, "malformed section header");
      section = trim(l.substr(1, l.size() - 2));
      static const std::set<std::string> known{"metric", "general", "alpha", "beta", "phi"};
      if (!known.count(section)) file_error(origin, line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) file_error(origin, line, "expected key = value");
    if (section.empty()) file_error(origin, line, "key outside of a section");
    const std::string key = trim(l.substr(0, eq));
    const std::string value = trim(l.substr(eq + 1));
    if (key.empty()) file_error(origin, line, "empty key");
    if (sections[section].count(key)) file_error(origin, line, "duplicate key '" + key + "'");
    sections[section][key] = {value, line};
  }

  if (!sections.count("metric")) file_error(origin, line, "missing [metric] section");
  auto& m = sections["metric"];
  auto need = [&](const std::string& key) -> std::pair<std::string, int> {
    auto it = m.find(key);
    if (it == m.end()) file_error(origin, 0, "[metric] is missing key '" + key + "'");
    return it->second;
  };
  for (const auto& [k, v] : m) {
    static const std::set<std::string> keys{"name", "kind", "dim", "region_center", "region_radius"};
    if (!keys.count(k)) file_error(origin, v.second, "unknown key '" + k + "' in [metric]");
  }
  {
    auto [v, ln] = need("name");
    spec.name = unquote(v, origin, ln);
  }
  {
    auto [v, ln] = need("kind");
    try {
      spec.kind = metric_kind_from_string(unquote(v, origin, ln));
    } catch (const InputError& e) {
      file_error(origin, ln, e.what());
    }
  }
  {
    auto [v, ln] = need("dim");
    const double d = parse_double(unquote(v, origin, ln), origin, ln);
    if (d != std::floor(d) || d < 1 || d > 8) file_error(origin, ln, "dim must be an integer in [1, 8]");
    spec.dim = static_cast<int>(d);
  }
  {
    auto [v, ln] = need("region_center");
    spec.region.center = parse_list(v, origin, ln);
    if (spec.region.center.size() != static_cast<std::size_t>(spec.dim)) {
      file_error(origin, ln, "region_center must have dim entries");
    }
  }
  {
    auto [v, ln] = need("region_radius");
    spec.region.radius = parse_double(unquote(v, origin, ln), origin, ln);
  }

  const int n = spec.dim;
  if (spec.kind == MetricKind::general) {
    if (!sections.count("general") || !sections["general"].count("f2")) {
      file_error(origin, line, "general metric requires [general] f2");
    }
    for (const auto& [k, v] : sections["general"]) {
      if (k != "f2") file_error(origin, v.second, "unknown key '" + k + "' in [general]");
    }
    auto [v, ln] = sections["general"]["f2"];
    spec.f2 = parse_expr_value(v, origin, ln);
    auto names = coordinate_names(n);
    try {
      spec.f2.validate({names.begin(), names.end()});
    } catch (const InputError& e) {
      file_error(origin, ln, e.what());
    }
  } else {
    spec.alpha.resize(n * (n + 1) / 2);
    spec.beta.resize(n);
    for (const auto& [k, v] : sections["alpha"]) {
      if (k.size() != 4 || k.substr(0, 2) != "a_" || !std::isdigit(k[2]) || !std::isdigit(k[3])) {
        file_error(origin, v.second, "bad [alpha] key '" + k + "' (expected a_ij)");
      }
      const int i = k[2] - '1', j = k[3] - '1';
      if (i < 0 || j < 0 || i >= n || j >= n) file_error(origin, v.second, "index out of range in '" + k + "'");
      if (i > j) file_error(origin, v.second, "only a_ij with i <= j may be given ('" + k + "')");
      auto e = parse_expr_value(v.first, origin, v.second);
      try {
        e.validate(x_names(n));
      } catch (const InputError& err) {
        file_error(origin, v.second, err.what());
      }
      spec.alpha[upper_index(i, j, n)] = e;
    }
    for (const auto& [k, v] : sections["beta"]) {
      if (k.size() != 3 || k.substr(0, 2) != "b_" || !std::isdigit(k[2])) {
        file_error(origin, v.second, "bad [beta] key '" + k + "' (expected b_i)");
      }
      const int i = k[2] - '1';
      if (i < 0 || i >= n) file_error(origin, v.second, "index out of range in '" + k + "'");
      auto e = parse_expr_value(v.first, origin, v.second);
      try {
        e.validate(x_names(n));
      } catch (const InputError& err) {
        file_error(origin, v.second, err.what());
      }
      spec.beta[i] = e;
    }
    if (sections.count("phi") && sections["phi"].count("phi")) {
      auto [v, ln] = sections["phi"]["phi"];
      spec.phi = parse_expr_value(v, origin, ln);
      try {
        spec.phi.validate({"s"});
      } catch (const InputError& err) {
        file_error(origin, ln, err.what());
      }
    } else if (spec.kind == MetricKind::randers) {
      spec.phi = parse("1 + s");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (spec.alpha[upper_index(i, j, n)].empty()) {
          file_error(origin, line, "[alpha] is missing a_" + std::to_string(i + 1) + std::to_string(j + 1));
        }
      }
      if (spec.beta[i].empty()) file_error(origin, line, "[beta] is missing b_" + std::to_string(i + 1));
    }
  }
  try {
    spec.validate_structure();
  } catch (const InputError& e) {
    file_error(origin, 0, e.what());
  }
  return spec;
}

MetricSpec load_metric_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open metric file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_metric_file(ss.str(), path);
}

std::string format_metric_file(const MetricSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "[metric]\n";
  out << "name = \"" << spec.name << "\"\n";
  out << "kind = \"" << to_string(spec.kind) << "\"\n";
  out << "dim = " << spec.dim << "\n";
  out << "region_center = [";
  for (std::size_t i = 0; i < spec.region.center.size(); ++i) out << (i ? ", " : "") << spec.region.center[i];
  out << "]\n";
  out << "region_radius = " << spec.region.radius << "\n";
  if (spec.kind == MetricKind::general) {
    out << "\n[general]\nf2 = \"" << spec.f2.print() << "\"\n";
    return out.str();
  }
  out << "\n[alpha]\n";
  for (int i = 0; i < spec.dim; ++i) {
    for (int j = i; j < spec.dim; ++j) out << "a_" << i + 1 << j + 1 << " = \"" << spec.a(i, j).print() << "\"\n";
  }
  out << "\n[beta]\n";
  for (int i = 0; i < spec.dim; ++i) out << "b_" << i + 1 << " = \"" << spec.beta[i].print() << "\"\n";
  out << "\n[phi]\nphi = \"" << spec.phi.print() << "\"\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Compiled metric

Metric::Metric(MetricSpec spec) : spec_(std::move(spec)) {
  spec_.validate_structure();
  const int n = spec_.dim;
  if (spec_.kind == MetricKind::general) {
    f2_ = CompiledExpression(spec_.f2, coordinate_names(n));
    check_homogeneity();
  } else {
    std::vector<std::string> xs;
    for (int i = 1; i <= n; ++i) xs.push_back("x" + std::to_string(i));
    for (const auto& e : spec_.alpha) a_.emplace_back(e, xs);
    for (const auto& e : spec_.beta) b_.emplace_back(e, xs);
    phi_ = CompiledExpression(spec_.phi, {"s"});
  }
}

Jet Metric::a(int i, int j, std::span<const Jet> x) const {
  if (!spec_.is_alpha_beta()) throw InputError("a_ij requested for a general metric");
  return a_[upper_index(i, j, spec_.dim)].eval(x);
}

Jet Metric::b(int i, std::span<const Jet> x) const {
  if (!spec_.is_alpha_beta()) throw InputError("b_i requested for a general metric");
  return b_[i].eval(x);
}

double Metric::a(int i, int j, std::span<const double> x) const {
  if (!spec_.is_alpha_beta()) throw InputError("a_ij requested for a general metric");
  return a_[upper_index(i, j, spec_.dim)].eval(x);
}

double Metric::b(int i, std::span<const double> x) const {
  if (!spec_.is_alpha_beta()) throw InputError("b_i requested for a general metric");
  return b_[i].eval(x);
}

Jet Metric::phi(const Jet& s) const {
  if (!spec_.is_alpha_beta()) throw InputError("phi requested for a general metric");
  return phi_.eval(std::span<const Jet>(&s, 1));
}

double Metric::phi(double s) const {
  if (!spec_.is_alpha_beta()) throw InputError("phi requested for a general metric");
  return phi_.eval(std::span<const double>(&s, 1));
}

Jet Metric::f2_general(std::span<const Jet> x, std::span<const Jet> y) const {
  std::vector<Jet> slots(x.begin(), x.end());
  slots.insert(slots.end(), y.begin(), y.end());
  return f2_.eval(std::span<const Jet>(slots));
}

Jet Metric::f2(std::span<const Jet> x, std::span<const Jet> y) const {
  if (spec_.kind == MetricKind::general) return f2_general(x, y);
  const Jet f = norm(x, y);
  return f * f;
}

Jet Metric::norm(std::span<const Jet> x, std::span<const Jet> y) const {
  if (spec_.kind == MetricKind::general) return sqrt(f2_general(x, y));
  const int n = spec_.dim;
  Jet alpha2(y[0].config());
  Jet beta(y[0].config());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Jet t = a(i, j, x) * (y[i] * y[j]);
      if (i != j) t *= 2.0;
      alpha2 += t;
    }
    beta += b(i, x) * y[i];
  }
  const Jet alpha = sqrt(alpha2);
  return alpha * phi(beta / alpha);
}

double Metric::f2(std::span<const double> x, std::span<const double> y) const {
  if (spec_.kind == MetricKind::general) {
    std::vector<double> slots(x.begin(), x.end());
    slots.insert(slots.end(), y.begin(), y.end());
    return f2_.eval(std::span<const double>(slots));
  }
  const double f = norm(x, y);
  return f * f;
}

double Metric::norm(std::span<const double> x, std::span<const double> y) const {
  if (spec_.kind == MetricKind::general) {
    const double v = f2(x, y);
    if (!(v > 0.0)) throw DomainError("F^2 is not positive at the requested point");
    return std::sqrt(v);
  }
  const int n = spec_.dim;
  double alpha2 = 0.0, beta = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) alpha2 += a(i, j, x) * y[i] * y[j];
    beta += b(i, x) * y[i];
  }
  if (!(alpha2 > 0.0)) throw DomainError("alpha^2 is not positive at the requested point");
  const double alpha = std::sqrt(alpha2);
  return alpha * phi(beta / alpha);
}

Metric::FiberEvaluator Metric::fiber(std::span<const Jet> x) const {
  FiberEvaluator f;
  f.metric_ = this;
  f.x_.assign(x.begin(), x.end());
  if (spec_.is_alpha_beta()) {
    const int n = spec_.dim;
    f.a_.reserve(n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) f.a_.push_back(a(i, j, x));
    }
    for (int i = 0; i < n; ++i) f.b_.push_back(b(i, x));
  }
  return f;
}

Jet Metric::FiberEvaluator::norm(std::span<const double> y) const {
  const JetConfig cfg = x_[0].config();
  const int n = metric_->dim();
  if (!metric_->spec().is_alpha_beta()) {
    std::vector<Jet> yj;
    for (int i = 0; i < n; ++i) yj.push_back(Jet::constant(cfg, y[i]));
    return metric_->norm(x_, yj);
  }
  Jet alpha2(cfg);
  Jet beta(cfg);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) alpha2 += a_[i * n + j] * (y[i] * y[j]);
    beta += b_[i] * y[i];
  }
  const Jet alpha = sqrt(alpha2);
  return alpha * metric_->phi(beta / alpha);
}

void Metric::check_homogeneity(int samples) const {
  const int n = spec_.dim;
  std::mt19937_64 gen(0x5eed);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int k = 0; k < samples; ++k) {
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = spec_.region.center[i] + 0.5 * spec_.region.radius * uniform() / std::sqrt(double(n));
      y[i] = uniform();
    }
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) y[0] = 1.0;
    double base = 0.0;
    try {
      base = f2(x, y);
    } catch (const DomainError&) {
      continue;
    }
    for (double t : {2.0, 3.0}) {
      std::vector<double> ty(n);
      for (int i = 0; i < n; ++i) ty[i] = t * y[i];
      const double scaled = f2(x, ty);
      const double expect = t * t * base;
      if (std::abs(scaled - expect) > 1e-9 * std::max(std::abs(expect), 1e-300)) {
        std::ostringstream os;
        os.precision(17);
        os << "metric '" << spec_.name << "' is not positively 2-homogeneous in y: F^2(x, " << t
           << " y) = " << scaled << " but " << t * t << " F^2(x, y) = " << expect;
        throw InputError(os.str());
      }
    }
  }
}

}  // namespace finsler
