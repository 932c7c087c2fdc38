#pragma once

// Shared helpers for the unit tests: finite-difference partials from
// Fornberg weights, and small tensor utilities.

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace test {

/// Fornberg weights for derivative k at 0 on the given nodes.
inline std::vector<double> fornberg(int k, const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(k + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, k);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int m = mn; m >= 1; --m) c[i][m] = c1 * (m * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int m = mn; m >= 1; --m) c[j][m] = (c4 * c[j][m] - m * c[j][m - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][k];
  return w;
}

/// Mixed partial d^|e| f / dz^e at z0 by a tensor product of centred
/// stencils with r = (k+1)/2 + 2 nodes on each side.
template <std::size_t N>
double fd_partial(const std::function<double(const std::array<double, N>&)>& f, const std::array<double, N>& z0,
                  std::span<const int> e, double h) {
  std::array<std::vector<double>, N> w;
  std::array<int, N> r{};
  for (std::size_t v = 0; v < N; ++v) {
    if (e[v] == 0) {
      r[v] = 0;
      w[v] = {1.0};
      continue;
    }
    r[v] = (e[v] + 1) / 2 + 2;
    std::vector<double> nodes;
    for (int s = -r[v]; s <= r[v]; ++s) nodes.push_back(s);
    w[v] = fornberg(e[v], nodes);
  }
  double total = 0.0;
  std::array<int, N> s{};
  for (std::size_t v = 0; v < N; ++v) s[v] = -r[v];
  while (true) {
    double weight = 1.0;
    std::array<double, N> z = z0;
    for (std::size_t v = 0; v < N; ++v) {
      weight *= w[v][s[v] + r[v]];
      z[v] += s[v] * h;
    }
    if (weight != 0.0) total += weight * f(z);
    std::size_t v = 0;
    while (v < N && ++s[v] > r[v]) {
      s[v] = -r[v];
      ++v;
    }
    if (v == N) break;
  }
  int order = 0;
  for (std::size_t v = 0; v < N; ++v) order += e[v];
  return total / std::pow(h, order);
}

inline double frob(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double frob_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  return frob_diff(a, b) / std::max(1e-300, std::max(frob(a), frob(b)));
}

}  // namespace test
