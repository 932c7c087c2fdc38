#pragma once

// Pointwise differential geometry of a spray: fundamental tensor, spray
// coefficients, Berwald connection, horizontal/vertical derivatives and the
// S-curvature. All quantities are jets centred at an EvalPoint, with variable
// i standing for x^i - x0^i and variable n+i for y^i - y0^i.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"
#include "finsler/metric.hpp"

namespace finsler {

struct EvalPoint {
  std::vector<double> x;
  std::vector<double> y;
};

/// Checks region membership, F > 1e-6 |y|, positive definiteness of g
/// (Cholesky pivots > 1e-12) and cond(g) <= 1e12. Throws DomainError.
void validate_point(const Metric& metric, const EvalPoint& p);
/// Rescales y so that F(x, y) = 1.
EvalPoint normalized(const Metric& metric, EvalPoint p);

/// Quantities whose jet order requirements are tabulated.
enum class Quantity {
  g, spray, connection, gamma, riemann, riemann_kl, riemann_jkl, berwald, mean_berwald, douglas,
  h_curvature, dtilde, dtilde_0, stretch_douglas, theta, weyl, weakly_weyl, wtilde, wtilde_0,
  rieber, s_value, s_hessian, d_recurrent, lemma_identity
};
/// F^2 jet order needed to evaluate the quantity at a point.
int required_f2_order(Quantity q);
const char* quantity_name(Quantity q);

/// Lifted coordinates for one point: x[i], y[i] are jets of the given order.
struct Frame {
  EvalPoint p;
  JetConfig cfg;
  std::vector<Jet> x;
  std::vector<Jet> y;

  Frame(const EvalPoint& point, int order);
  int dim() const { return static_cast<int>(p.x.size()); }
  int xvar(int i) const { return i; }
  int yvar(int i) const { return dim() + i; }
};

// ---------------------------------------------------------------------------
// Tensors

/// Dense real tensor at a point. Index order is the written order of the
/// symbol, e.g. D_j^i_kl is stored as [j][i][k][l] with variance "lull".
struct TensorSample {
  std::string label;
  int dim = 0;
  std::string variance;
  std::vector<double> values;
  EvalPoint at;

  int rank() const { return static_cast<int>(variance.size()); }
  std::vector<int> shape() const { return std::vector<int>(variance.size(), dim); }
  double operator[](std::size_t k) const { return values[k]; }
  double norm() const;
};

double frobenius(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// Tensor whose components are jets.
class JetTensor {
 public:
  JetTensor() = default;
  JetTensor(int dim, std::string variance, JetConfig cfg);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(variance_.size()); }
  const std::string& variance() const { return variance_; }
  std::size_t size() const { return data_.size(); }
  /// Smallest component order.
  int order() const;

  Jet& operator[](std::size_t k) { return data_[k]; }
  const Jet& operator[](std::size_t k) const { return data_[k]; }
  std::size_t flat(std::span<const int> idx) const;
  Jet& at(std::initializer_list<int> idx) { return data_[flat(std::vector<int>(idx))]; }
  const Jet& at(std::initializer_list<int> idx) const { return data_[flat(std::vector<int>(idx))]; }
  /// Multi-index of flat position k.
  std::vector<int> unflat(std::size_t k) const;

  TensorSample sample(const std::string& label, const EvalPoint& at) const;

 private:
  int dim_ = 0;
  std::string variance_;
  std::vector<Jet> data_;
};

// ---------------------------------------------------------------------------
// Metric data

struct FundamentalData {
  TensorSample g;      // g_ij
  TensorSample g_inv;  // g^ij
  TensorSample h;      // angular metric h_ij
  std::vector<double> y_lower;
  double F = 0.0;
  double condition = 0.0;
};

FundamentalData fundamental_tensor(const Metric& metric, const EvalPoint& p);

/// g_ij as jets of order f2.order() - 2, from an F^2 jet.
JetTensor fundamental_jets(const Jet& f2, int dim);
/// Inverse and determinant of a small jet matrix (row-major).
std::vector<Jet> invert(const std::vector<Jet>& m, int dim);
Jet determinant(const std::vector<Jet>& m, int dim);

// ---------------------------------------------------------------------------
// Sprays

class Spray {
 public:
  virtual ~Spray() = default;
  virtual int dim() const = 0;
  /// G^i as jets of order `order` at the frame's point.
  virtual std::vector<Jet> coefficients(const EvalPoint& p, int order) const = 0;
  virtual std::string describe() const = 0;
};

/// Spray induced by a metric.
class MetricSpray : public Spray {
 public:
  explicit MetricSpray(std::shared_ptr<const Metric> metric) : metric_(std::move(metric)) {}
  int dim() const override { return metric_->dim(); }
  std::vector<Jet> coefficients(const EvalPoint& p, int order) const override;
  std::string describe() const override { return "metric:" + metric_->spec().name; }
  const Metric& metric() const { return *metric_; }

 private:
  std::shared_ptr<const Metric> metric_;
};

/// G^i from an F^2 jet of order K (result has order K - 2); `y` are the
/// lifted fibre coordinates.
std::vector<Jet> spray_from_f2(const Jet& f2, std::span<const Jet> y);

/// Berwald connection data of a spray at a point, all as jets.
struct SprayJets {
  EvalPoint p;
  int n = 0;
  std::vector<Jet> y;      // lifted y^i
  std::vector<Jet> G;      // G^i
  std::vector<Jet> N;      // N^i_j at [i*n + j]
  std::vector<Jet> Gamma;  // G^i_jk at [(i*n + j)*n + k]

  const Jet& Nij(int i, int j) const { return N[i * n + j]; }
  const Jet& Gam(int i, int j, int k) const { return Gamma[(i * n + j) * n + k]; }
  int xvar(int i) const { return i; }
  int yvar(int i) const { return n + i; }
};

SprayJets spray_jets(const Spray& spray, const EvalPoint& p, int g_order);

/// Sampled G^i, N^i_j, G^i_jk.
struct ConnectionData {
  TensorSample G;
  TensorSample N;
  TensorSample Gamma;
};
ConnectionData connection(const Spray& spray, const EvalPoint& p);
TensorSample spray_coefficients(const Spray& spray, const EvalPoint& p);

/// T_{...|m}: appends a lower index. Throws OrderError when T or the
/// connection is not deep enough.
JetTensor horizontal_derivative(const JetTensor& T, const SprayJets& S);
/// T_{...|0} = T_{...|m} y^m.
JetTensor horizontal_derivative_0(const JetTensor& T, const SprayJets& S);
/// Largest magnitude among the individual terms of T_{...|0}, per component.
std::vector<double> horizontal_term_scale(const JetTensor& T, const SprayJets& S);
/// T_{....k} = dT/dy^k, appended as a lower index.
JetTensor vertical_derivative(const JetTensor& T, const SprayJets& S);
/// Contraction of the last index with y.
JetTensor contract_y(const JetTensor& T, const SprayJets& S);

JetTensor scalar_tensor(const Jet& f, int dim);

// ---------------------------------------------------------------------------
// S-curvature

struct QuadratureOptions {
  int circle_points = 512;  // n = 2
  int polar_points = 64;    // n = 3, Gauss-Legendre in cos(theta)
  int azimuth_points = 128; // n = 3, Gauss-Legendre in phi
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

/// Indicatrix volume as a jet in x of the given order (y variables unused).
Jet indicatrix_volume(const Metric& metric, const Frame& frame, const QuadratureOptions& q);

/// S as a jet of order `order` (0 gives the value).
Jet s_curvature_jet(const Metric& metric, const Spray& spray, const EvalPoint& p, int order,
                    const QuadratureOptions& q = {});
double s_curvature(const Metric& metric, const EvalPoint& p, const QuadratureOptions& q = {});

}  // namespace finsler
