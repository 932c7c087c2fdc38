#include "finsler/sampling.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {
constexpr unsigned __int128 kMultiplier =
    (static_cast<unsigned __int128>(0x2360ED051FC65DA4ULL) << 64) | 0x4385DF649FCCF645ULL;
}

Pcg64::Pcg64(std::uint64_t seed, std::uint64_t stream) {
  inc_ = (static_cast<unsigned __int128>(stream) << 1) | 1u;
  state_ = 0;
  step();
  state_ += seed;
  step();
}

void Pcg64::step() { state_ = state_ * kMultiplier + inc_; }

std::uint64_t Pcg64::next() {
  step();
  const std::uint64_t hi = static_cast<std::uint64_t>(state_ >> 64);
  const std::uint64_t lo = static_cast<std::uint64_t>(state_);
  const unsigned rot = static_cast<unsigned>(state_ >> 122);
  const std::uint64_t x = hi ^ lo;
  return (x >> rot) | (x << ((64 - rot) & 63));
}

double Pcg64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Pcg64::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> sample_in_region(const Region& region, int dim, Pcg64& rng) {
  std::vector<double> x(dim, 0.0);
  double r2 = 2.0;
  while (r2 > 1.0) {
    r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      x[i] = 2.0 * rng.uniform() - 1.0;
      r2 += x[i] * x[i];
    }
  }
  for (int i = 0; i < dim; ++i) x[i] = region.center[i] + region.radius * x[i];
  return x;
}

std::vector<EvalPoint> sample_points(const Metric& metric, int count, std::uint64_t seed) {
  if (count < 1) throw InputError("point count must be at least 1");
  const int n = metric.dim();
  const Region& region = metric.spec().region;
  Pcg64 rng(seed);
  std::vector<EvalPoint> out;
  int rejected = 0;
  while (static_cast<int>(out.size()) < count) {
    EvalPoint p;
    p.x = sample_in_region(region, n, rng);
    p.y.assign(n, 0.0);
    double yn = 0.0;
    while (yn < 1e-12) {
      yn = 0.0;
      for (int i = 0; i < n; ++i) {
        p.y[i] = rng.normal();
        yn += p.y[i] * p.y[i];
      }
    }
    yn = std::sqrt(yn);
    for (double& v : p.y) v /= yn;
    try {
      p = normalized(metric, p);
      validate_point(metric, p);
    } catch (const DomainError&) {
      if (++rejected > 100 * count + 1000) {
        throw NumericError("could not draw valid points in the region of '" + metric.spec().name + "'");
      }
      continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InputError("empty component in " + what);
    const std::string t = item.substr(b, e - b + 1);
    double d = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), d);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw InputError("invalid number '" + t + "' in " + what);
    }
    v.push_back(d);
  }
  return v;
}

}  // namespace

EvalPoint parse_point(const std::string& text, int dim) {
  EvalPoint p;
  bool hx = false, hy = false;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw InputError("invalid point '" + text + "' (expected x=..;y=..)");
    std::string key = part.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "x") {
      p.x = parse_numbers(part.substr(eq + 1), "x");
      hx = true;
    } else if (key == "y") {
      p.y = parse_numbers(part.substr(eq + 1), "y");
      hy = true;
    } else {
      throw InputError("invalid point key '" + key + "'");
    }
  }
  if (!hx || !hy) throw InputError("point must give both x and y");
  if (static_cast<int>(p.x.size()) != dim || static_cast<int>(p.y.size()) != dim) {
    throw InputError("point components must match dimension " + std::to_string(dim));
  }
  return p;
}

}  // namespace finsler
