#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace finsler {

void JetConfig::validate() const {
  if (num_vars < 2 || num_vars % 2 != 0 || num_vars > kMaxVars) {
    throw ConfigError("jet num_vars must be even and in [2, " +
                      std::to_string(kMaxVars) + "], got " +
                      std::to_string(num_vars));
  }
  if (max_order < 1 || max_order > kMaxOrder) {
    throw ConfigError("jet max_order must be in [1, " +
                      std::to_string(kMaxOrder) + "], got " +
                      std::to_string(max_order));
  }
}

std::size_t monomial_count(int num_vars, int order) {
  // C(n + k, k) computed incrementally; exact for the sizes we allow.
  std::size_t c = 1;
  for (int i = 1; i <= order; ++i) {
    c = c * static_cast<std::size_t>(num_vars + i) / static_cast<std::size_t>(i);
  }
  return c;
}

namespace {

std::uint64_t pack(std::span<const std::uint8_t> e) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < e.size(); ++i) key |= std::uint64_t(e[i]) << (4 * i);
  return key;
}

// Appends all exponent vectors of total degree d in graded-lex order
// (larger exponent on earlier variables first).
void enumerate_degree(int num_vars, int d, std::vector<std::uint8_t>& cur, int var,
                      std::vector<std::uint8_t>& out) {
  if (var == num_vars - 1) {
    cur[var] = static_cast<std::uint8_t>(d);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int k = d; k >= 0; --k) {
    cur[var] = static_cast<std::uint8_t>(k);
    enumerate_degree(num_vars, d - k, cur, var + 1, out);
  }
}

}  // namespace

MonomialTable::MonomialTable(int num_vars, int order) : num_vars_(num_vars), order_(order) {
  std::vector<std::uint8_t> cur(num_vars, 0);
  degree_start_.push_back(0);
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(num_vars, d, cur, 0, exps_);
    degree_start_.push_back(exps_.size() / num_vars);
  }
  const std::size_t n = exps_.size() / num_vars;
  degree_.resize(n);
  factorial_.resize(n);
  lookup_.reserve(n * 2);
  for (int d = 0; d <= order; ++d) {
    for (std::size_t i = degree_start_[d]; i < degree_start_[d + 1]; ++i) degree_[i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto e = exponents(i);
    double f = 1.0;
    for (auto k : e) {
      for (int j = 2; j <= k; ++j) f *= j;
    }
    factorial_[i] = f;
    lookup_.emplace(pack(e), static_cast<std::uint32_t>(i));
  }

  raise_.assign(n * num_vars, -1);
  std::vector<std::uint8_t> tmp(num_vars);
  for (std::size_t i = 0; i < n; ++i) {
    if (degree_[i] == order) continue;
    auto e = exponents(i);
    for (int v = 0; v < num_vars; ++v) {
      std::copy(e.begin(), e.end(), tmp.begin());
      ++tmp[v];
      raise_[i * num_vars + v] = lookup_.at(pack(tmp));
    }
  }

  // Truncated product schedule: every pair with deg(lhs) + deg(rhs) <= order.
  for (std::size_t a = 0; a < n; ++a) {
    const int da = degree_[a];
    auto ea = exponents(a);
    const std::size_t nb = degree_start_[order - da + 1];
    for (std::size_t b = 0; b < nb; ++b) {
      auto eb = exponents(b);
      for (int v = 0; v < num_vars; ++v) tmp[v] = static_cast<std::uint8_t>(ea[v] + eb[v]);
      terms_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                        lookup_.at(pack(tmp))});
    }
  }
  std::sort(terms_.begin(), terms_.end(), [](const ProductTerm& x, const ProductTerm& y) {
    return x.out != y.out ? x.out < y.out : (x.lhs != y.lhs ? x.lhs < y.lhs : x.rhs < y.rhs);
  });
  term_start_.assign(order + 2, 0);
  std::size_t t = 0;
  for (int d = 0; d <= order; ++d) {
    while (t < terms_.size() && terms_[t].out < degree_start_[d + 1]) ++t;
    term_start_[d + 1] = t;
  }
}

std::shared_ptr<const MonomialTable> MonomialTable::get(int num_vars, int order) {
  if (num_vars < 1 || num_vars > JetConfig::kMaxVars || order < 0 ||
      order > JetConfig::kMaxOrder) {
    throw ConfigError("unsupported jet shape (" + std::to_string(num_vars) + " vars, order " +
                      std::to_string(order) + ")");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{num_vars, order}];
  if (!slot) slot.reset(new MonomialTable(num_vars, order));
  return slot;
}

std::ptrdiff_t MonomialTable::index_of(std::span<const int> e) const {
  if (static_cast<int>(e.size()) != num_vars_) {
    throw ConfigError("multi-index has " + std::to_string(e.size()) + " entries, expected " +
                      std::to_string(num_vars_));
  }
  int d = 0;
  std::uint64_t key = 0;
  for (int i = 0; i < num_vars_; ++i) {
    if (e[i] < 0) throw ConfigError("negative exponent in multi-index");
    d += e[i];
    if (d > order_) return -1;
    key |= std::uint64_t(e[i]) << (4 * i);
  }
  return lookup_.at(key);
}

// ---------------------------------------------------------------------------

Jet::Jet(JetConfig cfg) : Jet(MonomialTable::get(cfg.num_vars, cfg.max_order)) {}

Jet::Jet(std::shared_ptr<const MonomialTable> table)
    : table_(std::move(table)), coeffs_(table_->size(), 0.0) {}

Jet Jet::constant(JetConfig cfg, double value) {
  Jet j(cfg);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(JetConfig cfg, int index, double value) {
  if (index < 0 || index >= cfg.num_vars) {
    throw ConfigError("variable index " + std::to_string(index) + " out of range for " +
                      std::to_string(cfg.num_vars) + " variables");
  }
  Jet j(cfg);
  j.coeffs_[0] = value;
  if (cfg.max_order >= 1) j.coeffs_[1 + index] = 1.0;
  return j;
}

double Jet::coeff(std::span<const int> e) const {
  auto idx = table_->index_of(e);
  return idx < 0 ? 0.0 : coeffs_[idx];
}

double Jet::partial(std::span<const int> e) const {
  auto idx = table_->index_of(e);
  if (idx < 0) {
    int d = 0;
    for (int k : e) d += k;
    throw OrderError("extract_partial", d, order());
  }
  return coeffs_[idx] * table_->factorial(idx);
}

double Jet::d1(int var) const {
  if (order() < 1) throw OrderError("first partial", 1, order());
  return coeffs_[1 + var];
}

double Jet::d2(int a, int b) const {
  if (order() < 2) throw OrderError("second partial", 2, order());
  auto idx = table_->raised(1 + a, b);
  return coeffs_[idx] * table_->factorial(idx);
}

bool Jet::is_constant() const {
  return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](double c) { return c == 0.0; });
}

int Jet::effective_degree() const {
  for (std::size_t i = coeffs_.size(); i-- > 1;) {
    if (coeffs_[i] != 0.0) return table_->degree(i);
  }
  return 0;
}

Jet Jet::truncated(int order) const {
  if (order >= this->order()) return *this;
  if (order < 0) throw OrderError("truncate", 0, order);
  Jet r(MonomialTable::get(num_vars(), order));
  std::copy_n(coeffs_.begin(), r.coeffs_.size(), r.coeffs_.begin());
  return r;
}

Jet Jet::derivative(int var) const {
  if (order() < 1) throw OrderError("jet derivative", 1, 0);
  if (var < 0 || var >= num_vars()) throw ConfigError("derivative variable out of range");
  Jet r(MonomialTable::get(num_vars(), order() - 1));
  const auto& t = *table_;
  for (std::size_t i = 0; i < r.coeffs_.size(); ++i) {
    const auto up = t.raised(i, var);
    r.coeffs_[i] = coeffs_[up] * (t.exponents(i)[var] + 1);
  }
  return r;
}

namespace {

void check_vars(const Jet& a, const Jet& b) {
  if (a.num_vars() != b.num_vars()) {
    throw ConfigError("jet config mismatch: " + std::to_string(a.num_vars()) + " vs " +
                      std::to_string(b.num_vars()) + " variables");
  }
}

// a * b where b is affine (degree <= 1): b0*a + sum_v b_v * z_v * a.
Jet mul_affine(const Jet& a, const Jet& b, int order) {
  Jet r = a.truncated(order);
  const double b0 = b.value();
  auto rc = r.coeffs();
  for (auto& c : rc) c *= b0;
  const auto& t = a.table();
  const std::size_t src = t.size_upto(order - 1 < 0 ? 0 : order - 1);
  if (order >= 1) {
    for (int v = 0; v < a.num_vars(); ++v) {
      const double bv = b.coeffs()[1 + v];
      if (bv == 0.0) continue;
      for (std::size_t i = 0; i < src; ++i) rc[t.raised(i, v)] += bv * a.coeffs()[i];
    }
  }
  return r;
}

}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  check_vars(*this, o);
  if (o.order() < order()) *this = truncated(o.order());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_vars(*this, o);
  if (o.order() < order()) *this = truncated(o.order());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  if (b.order() < a.order()) {
    Jet r = b;
    r += a;
    return r;
  }
  Jet r = a;
  r += b;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r -= b;
  return r;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_vars(a, b);
  const int order = std::min(a.order(), b.order());
  const int da = a.effective_degree();
  const int db = b.effective_degree();
  if (db == 0) return a.truncated(order) * b.value();
  if (da == 0) return b.truncated(order) * a.value();
  if (db == 1) return mul_affine(a, b, order);
  if (da == 1) return mul_affine(b, a, order);
  Jet r(MonomialTable::get(a.num_vars(), order));
  const double* pa = a.coeffs_.data();
  const double* pb = b.coeffs_.data();
  double* pr = r.coeffs_.data();
  // Products whose factors are already truncated away contribute nothing;
  // walk the schedule of the larger table but only up to `order`.
  const auto& table = a.order() >= b.order() ? *a.table_ : *b.table_;
  for (const auto& t : table.product_terms(order)) pr[t.out] += pa[t.lhs] * pb[t.rhs];
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator/(const Jet& a, double s) {
  if (s == 0.0) throw DomainError("division of a jet by zero");
  return a * (1.0 / s);
}

Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

// ---------------------------------------------------------------------------

Jet compose(const Jet& a, std::span<const double> taylor) {
  const int k = a.order();
  if (static_cast<int>(taylor.size()) < k + 1) {
    throw OrderError("compose: univariate Taylor series too short", k, int(taylor.size()) - 1);
  }
  Jet h = a;
  h.coeffs()[0] = 0.0;
  Jet r = Jet::constant(a.config(), taylor[k]);
  for (int m = k - 1; m >= 0; --m) {
    r = r * h;
    r.coeffs()[0] += taylor[m];
  }
  return r;
}

namespace {

std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0 || !std::isfinite(a0)) {
    throw DomainError("division by zero-valued jet (value " + fmt_value(a0) + ")");
  }
  std::vector<double> c(a.order() + 1);
  double p = 1.0 / a0;
  for (int m = 0; m <= a.order(); ++m) {
    c[m] = p;
    p *= -1.0 / a0;
  }
  return compose(a, c);
}

Jet sqrt(const Jet& a) { return jet_unary(a, UnaryFn::sqrt); }
Jet exp(const Jet& a) { return jet_unary(a, UnaryFn::exp); }
Jet log(const Jet& a) { return jet_unary(a, UnaryFn::log); }
Jet sin(const Jet& a) { return jet_unary(a, UnaryFn::sin); }
Jet cos(const Jet& a) { return jet_unary(a, UnaryFn::cos); }
Jet pow(const Jet& a, double exponent) { return jet_unary(a, UnaryFn::pow, exponent); }

Jet jet_arith(const Jet& a, const Jet& b, JetOp op) {
  switch (op) {
    case JetOp::add: return a + b;
    case JetOp::sub: return a - b;
    case JetOp::mul: return a * b;
    case JetOp::div: return a / b;
  }
  return a;
}

Jet jet_unary(const Jet& a, UnaryFn f, double exponent) {
  const int k = a.order();
  const double a0 = a.value();
  std::vector<double> c(k + 1);
  switch (f) {
    case UnaryFn::exp: {
      double e = std::exp(a0);
      double fact = 1.0;
      for (int m = 0; m <= k; ++m) {
        if (m > 0) fact *= m;
        c[m] = e / fact;
      }
      break;
    }
    case UnaryFn::log: {
      if (!(a0 > 0.0)) throw DomainError("log of non-positive value " + fmt_value(a0));
      c[0] = std::log(a0);
      double p = 1.0 / a0;
      for (int m = 1; m <= k; ++m) {
        // (-1)^(m-1) / (m a0^m)
        c[m] = ((m % 2 == 1) ? 1.0 : -1.0) * p / m;
        p /= a0;
      }
      break;
    }
    case UnaryFn::sin:
    case UnaryFn::cos: {
      const double s = std::sin(a0), co = std::cos(a0);
      // Derivative cycle of sin: sin, cos, -sin, -cos.
      const double cyc_sin[4] = {s, co, -s, -co};
      const double cyc_cos[4] = {co, -s, -co, s};
      const double* cyc = f == UnaryFn::sin ? cyc_sin : cyc_cos;
      double fact = 1.0;
      for (int m = 0; m <= k; ++m) {
        if (m > 0) fact *= m;
        c[m] = cyc[m % 4] / fact;
      }
      break;
    }
    case UnaryFn::sqrt:
      exponent = 0.5;
      [[fallthrough]];
    case UnaryFn::pow: {
      const bool integral = f == UnaryFn::pow && exponent == std::floor(exponent) &&
                            std::abs(exponent) <= 64;
      if (integral) {
        const int n = static_cast<int>(exponent);
        if (n == 0) return Jet::constant(a.config(), 1.0);
        Jet base = n > 0 ? a : reciprocal(a);
        Jet r = base;
        for (int i = 1; i < std::abs(n); ++i) r = r * base;
        return r;
      }
      if (!(a0 > 0.0)) {
        throw DomainError((f == UnaryFn::sqrt ? std::string("sqrt") : "pow(" + fmt_value(exponent) + ")") +
                          " of non-positive value " + fmt_value(a0));
      }
      // r (r-1) ... (r-m+1) / m! * a0^(r-m)
      double coef = 1.0;
      double p = std::pow(a0, exponent);
      for (int m = 0; m <= k; ++m) {
        c[m] = coef * p;
        coef *= (exponent - m) / (m + 1);
        p /= a0;
      }
      break;
    }
  }
  return compose(a, c);
}

}  // namespace finsler
