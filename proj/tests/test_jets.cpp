#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "finsler/jet.hpp"
#include "finsler/sampling.hpp"
#include "support.hpp"

using namespace finsler;

namespace {

template <class T>
T test_function(const std::array<T, 4>& z) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  return exp(0.3 * z[0]) * sin(z[1] + 0.5 * z[2]) + sqrt(2.0 + z[2] * z[3]) / (1.5 + cos(z[0] * z[3])) +
         log(3.0 + z[1] * z[1]) * pow(2.0 + z[0], 1.5);
}

double test_function_at(const std::array<double, 4>& z) { return test_function<double>(z); }

}  // namespace

TEST_SUITE("jets") {
  TEST_CASE("monomial counts are binomial") {
    CHECK(monomial_count(2, 1) == 3);
    CHECK(monomial_count(4, 5) == 126);
    CHECK(monomial_count(6, 9) == 5005);
    CHECK(MonomialTable::get(4, 3)->size() == 35);
  }

  TEST_CASE("config validation") {
    CHECK_THROWS_AS(JetConfig({3, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(JetConfig({0, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(JetConfig({2, 0}).validate(), ConfigError);
    CHECK_NOTHROW(JetConfig({6, 9}).validate());
  }

  TEST_CASE("partials agree with finite differences up to order 5") {
    const JetConfig cfg{4, 5};
    const auto table = MonomialTable::get(4, 5);
    Pcg64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      std::array<double, 4> z0;
      for (double& v : z0) v = -0.5 + rng.uniform();
      std::array<Jet, 4> z;
      for (int i = 0; i < 4; ++i) z[i] = Jet::variable(cfg, i, z0[i]);
      const Jet f = test_function<Jet>(z);
      for (std::size_t idx = 0; idx < table->size(); ++idx) {
        const auto ex = table->exponents(idx);
        const std::vector<int> e(ex.begin(), ex.end());
        const double jet = f.partial(e);
        const double fd = test::fd_partial<4>(test_function_at, z0, e, 0.05);
        const double err = std::abs(jet - fd) / std::max(1.0, std::abs(jet));
        worst = std::max(worst, err);
      }
    }
    CHECK(worst < 1e-5);
  }

  TEST_CASE("elementary identities") {
    const JetConfig cfg{2, 6};
    const Jet x = Jet::variable(cfg, 0, 0.7);
    const Jet y = Jet::variable(cfg, 1, -0.2);
    const Jet a = exp(log(x + 2.0));
    const Jet b = x + 2.0;
    for (std::size_t k = 0; k < a.coeffs().size(); ++k) CHECK(a.coeffs()[k] == doctest::Approx(b.coeffs()[k]).epsilon(1e-13));
    const Jet s = sin(x * y);
    const Jet c = cos(x * y);
    const Jet one = s * s + c * c;
    CHECK(one.value() == doctest::Approx(1.0));
    for (std::size_t k = 1; k < one.coeffs().size(); ++k) CHECK(std::abs(one.coeffs()[k]) < 1e-13);
    const Jet q = (x * x + y) / (x * x + y);
    CHECK(q.value() == doctest::Approx(1.0));
    for (std::size_t k = 1; k < q.coeffs().size(); ++k) CHECK(std::abs(q.coeffs()[k]) < 1e-9);
  }

  TEST_CASE("mixed orders combine at the smaller order") {
    const Jet a = Jet::variable({2, 5}, 0, 1.0);
    const Jet b = Jet::variable({2, 3}, 1, 2.0);
    CHECK((a * b).order() == 3);
    CHECK((a + b).order() == 3);
    CHECK(a.derivative(0).order() == 4);
  }

  TEST_CASE("derivative shifts coefficients") {
    const JetConfig cfg{2, 4};
    const Jet x = Jet::variable(cfg, 0, 0.5);
    const Jet f = pow(x, 4.0);
    const Jet d = f.derivative(0);
    CHECK(d.value() == doctest::Approx(4 * 0.125));
    CHECK(d.d1(0) == doctest::Approx(12 * 0.25));
  }

  TEST_CASE("domain and config errors") {
    const Jet x = Jet::variable({2, 2}, 0, -1.0);
    CHECK_THROWS_AS(sqrt(x), DomainError);
    CHECK_THROWS_AS(log(x), DomainError);
    CHECK_THROWS_AS(pow(x, 0.5), DomainError);
    CHECK_NOTHROW(pow(x, 3.0));
    const Jet z = Jet::constant({2, 2}, 0.0);
    CHECK_THROWS_AS(1.0 / z, DomainError);
    const Jet w = Jet::variable({4, 2}, 0, 1.0);
    CHECK_THROWS_AS(x + w, ConfigError);
  }

  TEST_CASE("compose matches direct evaluation") {
    const JetConfig cfg{2, 5};
    const Jet x = Jet::variable(cfg, 0, 0.3) + Jet::variable(cfg, 1, 0.1) * 2.0;
    std::vector<double> taylor(6);
    double fact = 1.0;
    for (int m = 0; m <= 5; ++m) {
      if (m > 0) fact *= m;
      taylor[m] = std::exp(x.value()) / fact;
    }
    const Jet a = compose(x, taylor);
    const Jet b = exp(x);
    for (std::size_t k = 0; k < a.coeffs().size(); ++k) CHECK(a.coeffs()[k] == doctest::Approx(b.coeffs()[k]).epsilon(1e-13));
  }
}
