#pragma once

// Truncated multivariate Taylor polynomials ("jets").
//
// A Jet carries every mixed partial derivative of a scalar up to a total
// degree bound. Coefficients are stored in the Taylor convention: the entry
// for exponent e is  d^|e| f / dz^e  divided by  e! , so multiplication is a
// plain truncated convolution. Monomials are ordered graded-lexicographically,
// which makes the table for a lower order a prefix of the table for a higher
// one; jets of different orders therefore share indexing and combine at the
// smaller order.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "finsler/error.hpp"

namespace finsler {

struct JetConfig {
  int num_vars = 2;
  int max_order = 1;

  /// Throws ConfigError unless num_vars is even and >= 2 and
  /// 1 <= max_order <= kMaxOrder.
  void validate() const;
  bool operator==(const JetConfig&) const = default;

  static constexpr int kMaxVars = 16;
  static constexpr int kMaxOrder = 15;
};

/// Number of monomials of total degree <= order in num_vars variables,
/// C(num_vars + order, order).
std::size_t monomial_count(int num_vars, int order);

/// Graded-lex monomial index and truncated product schedule for one
/// (num_vars, order) pair. Instances are shared and immutable.
class MonomialTable {
 public:
  struct ProductTerm {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  static std::shared_ptr<const MonomialTable> get(int num_vars, int order);

  int num_vars() const { return num_vars_; }
  int order() const { return order_; }
  std::size_t size() const { return degree_.size(); }
  /// Number of monomials of degree <= d (a prefix of this table).
  std::size_t size_upto(int d) const { return degree_start_[d + 1]; }

  int degree(std::size_t idx) const { return degree_[idx]; }
  std::span<const std::uint8_t> exponents(std::size_t idx) const {
    return {exps_.data() + idx * num_vars_, static_cast<std::size_t>(num_vars_)};
  }
  /// Index of exponent vector e, or -1 when its degree exceeds order().
  std::ptrdiff_t index_of(std::span<const int> e) const;
  /// Index of e(idx) + unit(var), or -1 on overflow.
  std::ptrdiff_t raised(std::size_t idx, int var) const {
    return raise_[idx * num_vars_ + var];
  }
  /// e! for the monomial at idx.
  double factorial(std::size_t idx) const { return factorial_[idx]; }

  /// All (lhs, rhs, out) index triples with deg(out) <= d, sorted by out.
  std::span<const ProductTerm> product_terms(int d) const {
    return {terms_.data(), term_start_[d + 1]};
  }

 private:
  MonomialTable(int num_vars, int order);

  int num_vars_;
  int order_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<std::size_t> degree_start_;
  std::vector<std::ptrdiff_t> raise_;
  std::vector<double> factorial_;
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
  std::vector<ProductTerm> terms_;
  std::vector<std::size_t> term_start_;
};

class Jet {
 public:
  /// Zero jet of the given shape. Order 0 jets (plain values) are allowed
  /// here because differentiation produces them.
  explicit Jet(JetConfig cfg = {});

  static Jet constant(JetConfig cfg, double value);
  /// value + 1 * dz_index.
  static Jet variable(JetConfig cfg, int index, double value);

  JetConfig config() const { return {table_->num_vars(), table_->order()}; }
  int num_vars() const { return table_->num_vars(); }
  int order() const { return table_->order(); }
  const MonomialTable& table() const { return *table_; }

  double value() const { return coeffs_[0]; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  /// Taylor coefficient for exponent e (0 if beyond the order).
  double coeff(std::span<const int> e) const;
  /// d^|e| f / dz^e, i.e. coeff(e) * e!. Throws OrderError on overflow.
  double partial(std::span<const int> e) const;
  /// First partial d/dz_var at the expansion point.
  double d1(int var) const;
  /// Second partial d^2/dz_a dz_b at the expansion point.
  double d2(int a, int b) const;

  bool is_constant() const;
  /// Highest degree with a nonzero coefficient (0 for constants).
  int effective_degree() const;

  Jet truncated(int order) const;
  /// d/dz_var as a jet of order()-1. Throws OrderError for order-0 jets.
  Jet derivative(int var) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }

  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a);

  friend Jet operator+(const Jet& a, double s) { Jet r = a; r.coeffs_[0] += s; return r; }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, double s) { Jet r = a; r *= s; return r; }
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, double s);
  friend Jet operator/(double s, const Jet& a);

 private:
  Jet(std::shared_ptr<const MonomialTable> table);

  std::shared_ptr<const MonomialTable> table_;
  std::vector<double> coeffs_;
};

enum class JetOp { add, sub, mul, div };
enum class UnaryFn { sqrt, exp, log, pow, sin, cos };

/// Binary arithmetic by tag. Operands must share num_vars; the result has
/// the smaller of the two orders.
Jet jet_arith(const Jet& a, const Jet& b, JetOp op);
/// Unary composition by tag; `exponent` is used only for UnaryFn::pow.
Jet jet_unary(const Jet& a, UnaryFn f, double exponent = 1.0);

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
/// Real power; integral exponents use repeated multiplication and accept any
/// base value (non-zero for negative exponents), others need value > 0.
Jet pow(const Jet& a, double exponent);
Jet reciprocal(const Jet& a);

/// f(a) from the univariate Taylor coefficients c[m] = f^(m)(a0)/m!,
/// m = 0..a.order(), evaluated by Horner on the nilpotent part of a.
Jet compose(const Jet& a, std::span<const double> taylor);

/// Convenience for lift_variable with a fresh config.
inline Jet lift_variable(int index, double value, JetConfig cfg) {
  cfg.validate();
  return Jet::variable(cfg, index, value);
}

/// Convenience for extract_partial.
inline double extract_partial(const Jet& a, std::span<const int> multi_index) {
  return a.partial(multi_index);
}

}  // namespace finsler
