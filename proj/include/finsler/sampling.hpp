#pragma once

// Seeded point sampling. The generator is PCG XSL-RR 128/64: a 128-bit LCG
// (multiplier 0x2360ED051FC65DA44385DF649FCCF645, odd increment) whose output
// is rotr64(hi ^ lo, state >> 122). Uniform doubles take the top 53 bits;
// normals use Box-Muller on two uniforms.

#include <cstdint>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

class Pcg64 {
 public:
  explicit Pcg64(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL);
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double normal();

 private:
  void step();
  unsigned __int128 state_ = 0;
  unsigned __int128 inc_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Uniform point of the region ball (rejection sampling in the unit cube).
std::vector<double> sample_in_region(const Region& region, int dim, Pcg64& rng);

/// `count` valid points: x uniform in the metric's region, y uniform on the
/// Euclidean unit sphere then rescaled to F(x, y) = 1. Points failing
/// validate_point are redrawn.
std::vector<EvalPoint> sample_points(const Metric& metric, int count, std::uint64_t seed);

/// Parses "x=0.1,0.2,0;y=1,0.5,0.3".
EvalPoint parse_point(const std::string& text, int dim);

}  // namespace finsler
