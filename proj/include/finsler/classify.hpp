#pragma once

// Residual tests for the metric classes. Every test works at one point with
// y normalised to F = 1 and reads its tensors from a CurvatureBundle; the
// metric (g, F) used for projections off y is passed separately so the same
// tests apply to projectively transformed sprays.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/fit.hpp"

namespace finsler {

struct ClassifyOptions {
  double tol = 1e-5;
  /// F^2 jet order the bundle is evaluated at.
  int f2_order = 9;
  /// Reference norms below this (at F = 1) make a test vacuous.
  double vacuity = 1e-9;
  /// Also evaluate lambda-type fits at (x, 2y) and report their degree.
  bool rescaling_check = false;
  int threads = 1;
  QuadratureOptions quad;
};

/// diff / ref, or diff itself when ref is below the vacuity threshold.
double relative_residual(double diff, double ref, double vacuity);

/// T^i - (g_mr T^m y^r / F^2) y^i on index `slot` (which must be upper).
TensorSample project_off_y(const TensorSample& T, int slot, const FundamentalData& fd);

/// Basic classes: residual is the raw tensor norm at F = 1.
FitResult test_berwald(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_douglas(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_weyl(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_weakly_berwald(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);

FitResult test_gdw(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_wgdw(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_generalized_dtilde(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_generalized_weakly_weyl(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_relatively_isotropic_dtilde(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_isotropic_stretch_douglas(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_isotropic_mean_berwald(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult test_d_recurrent(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);
FitResult fit_scalar_flag_curvature(CurvatureBundle& cb, const FundamentalData& fd, const ClassifyOptions& o);

using ClassTest = FitResult (*)(CurvatureBundle&, const FundamentalData&, const ClassifyOptions&);
struct ClassInfo {
  const char* name;
  ClassTest test;
};
/// All classes in report order.
const std::vector<ClassInfo>& class_registry();

// ---------------------------------------------------------------------------
// Reports

struct ClassResult {
  std::string name;
  std::vector<FitResult> fits;  // one per point
  double worst_residual = 0.0;
  bool pass = true;
};

struct IdentityRow {
  std::string suite;
  std::string name;
  std::vector<double> residuals;  // one per point
  double worst = 0.0;
  double bound = 0.0;
  bool pass = true;
  std::string note;
};

struct RunInfo {
  std::string metric;
  int points = 0;
  std::uint64_t seed = 0;
  double tol = 1e-5;
  int f2_order = 9;
  QuadratureOptions quad;
};

struct ClassificationReport {
  RunInfo config;
  std::vector<EvalPoint> points;
  std::vector<ClassResult> classes;
  std::vector<IdentityRow> identities;
  std::optional<double> timing;

  const ClassResult* find(const std::string& name) const;

  std::string to_json() const;
  static ClassificationReport from_json(const std::string& text);
  std::string to_csv() const;
  std::string to_text() const;
};

/// Runs every class test at every point (parallel over points; assembly is
/// in point order). `metric` supplies g and F; `spray` defaults to the
/// metric's own spray.
std::vector<ClassResult> classify_points(const Metric& metric, const Spray& spray,
                                         const std::vector<EvalPoint>& points, const ClassifyOptions& o);
std::vector<ClassResult> classify_points(const Metric& metric, const std::vector<EvalPoint>& points,
                                         const ClassifyOptions& o);

/// Calls f(i) for i in [0, count) on up to `threads` threads. The first
/// exception thrown by any call is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& f);

}  // namespace finsler
