#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "wplab/beltrami.hpp"

namespace wplab {

using Matrix = Eigen::MatrixXcd;
using ChartPoint = Eigen::VectorXcd;

/// A Hermitian metric in a holomorphic chart, g(t)_{ij} = g_{i jbar}(t).
using MetricFunction = std::function<Matrix(const ChartPoint&)>;

struct PipelineOptions {
  CurvatureOptions curvature{};
  double frame_tol = 1e-9;
};

/// Everything solved at one chart point.
struct PipelineState {
  ChartPoint t;
  Deformation deformation;
  FrameResult frame;
  Matrix metric;
};

/// The chart t -> mu(t) = sum t_j mu_j on a base surface, with a write-once cache of solved pipelines.
class DeformationFamily {
 public:
  explicit DeformationFamily(SurfacePtr base, PipelineOptions opt = {});

  const SurfacePtr& base() const { return base_; }
  const HarmonicBasis& basis() const { return basis_; }
  int dimension() const { return basis_.dimension(); }
  /// Sup norms of the basis elements.
  const std::vector<double>& sup_norms() const { return sup_; }
  /// Largest |t| (Euclidean) with ||mu(t)||_0 below the solver limit.
  double chart_radius() const;

  Section beltrami(const ChartPoint& t) const;
  std::shared_ptr<const PipelineState> evaluate(const ChartPoint& t) const;
  Matrix metric(const ChartPoint& t) const { return evaluate(t)->metric; }
  MetricFunction metric_function() const;
  std::size_t cached() const;

 private:
  SurfacePtr base_;
  PipelineOptions opt_;
  HarmonicBasis basis_;
  std::vector<double> sup_;
  mutable std::mutex mtx_;
  mutable std::map<std::vector<double>, std::shared_ptr<const PipelineState>> cache_;
};

/// g_{i jbar} = <P L mu_i, P L mu_j> on the deformed surface, P the orthogonal projection onto the span
/// of the harmonic frame L omega_k. Pairings are pulled back to the base chart with density e^{2h} lambda^2.
/// The result is symmetrized unless `hermitize` is false.
Matrix wp_pairing(const Deformation& d, const FrameResult& frame, const HarmonicBasis& basis, bool hermitize = true);
Matrix wp_metric(const DeformationFamily& family, const ChartPoint& t);

/// Orders of d/dt_j (holo) and d/dtbar_j (anti) per chart direction.
struct MultiIndex {
  std::vector<int> holo, anti;
  int order() const;
  std::string label() const;
  bool operator<(const MultiIndex& o) const { return std::tie(holo, anti) < std::tie(o.holo, o.anti); }
};
MultiIndex multi_index(int dimension, std::initializer_list<int> holo_dirs, std::initializer_list<int> anti_dirs);

struct FiniteDifferenceOptions {
  double step = 0.02;  // delta_0 in sup-norm units: delta_j = step / ||mu_j||_0
  int threads = 1;
};

/// Richardson-extrapolated derivative from steps delta and delta/2; the noise floor compares it with
/// the estimate from delta/2 and delta/4.
struct DerivativeValue {
  Matrix value;
  double noise = 0.0;
};

/// Central differences of a metric function around a base point. Samples are fetched once per
/// distinct stencil point and concurrently within the worker budget.
class MetricDerivatives {
 public:
  MetricDerivatives(MetricFunction g, ChartPoint base, std::vector<double> steps, int threads = 1);

  int dimension() const { return static_cast<int>(base_.size()); }
  const ChartPoint& base() const { return base_; }
  /// Evaluates every sample the listed derivatives need, in one parallel sweep.
  void prepare(const std::vector<MultiIndex>& indices);
  DerivativeValue derivative(const MultiIndex& k);
  Matrix metric();
  std::size_t samples() const { return samples_.size(); }

 private:
  using Offset = std::vector<int>;  // per real coordinate, in units of step/4
  std::map<Offset, cplx> weights(const MultiIndex& k, int level) const;
  ChartPoint point(const Offset& o) const;

  MetricFunction g_;
  ChartPoint base_;
  std::vector<double> steps_;
  int threads_;
  std::map<Offset, Matrix> samples_;
};

MetricDerivatives metric_derivatives(const DeformationFamily& family, const ChartPoint& base,
                                     const FiniteDifferenceOptions& opt = {});
MetricDerivatives metric_derivatives(const MetricFunction& g, const ChartPoint& base, const std::vector<double>& steps,
                                     int threads = 1);

/// Christoffel symbols Gamma^a_{bc}, curvature R_{a bbar c dbar} and their FD noise floors at the base point.
struct CurvatureTensor {
  int n = 0;
  Matrix metric;
  std::vector<cplx> gamma;  // index (a, b, c)
  std::vector<cplx> riemann;  // index (a, b, c, d)
  double gamma_noise = 0.0, riemann_noise = 0.0;
  double symmetry_residual = 0.0;  // max over both Kaehler index swaps
  cplx G(int a, int b, int c) const { return gamma[static_cast<std::size_t>((a * n + b) * n + c)]; }
  cplx R(int a, int b, int c, int d) const { return riemann[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)]; }
  /// sign * R(v, vbar, v, vbar) / g(v, vbar)^2.
  double holomorphic_sectional(const ChartPoint& v, double sign) const;
};

/// Multi-indices needed up to the given order of curvature derivatives (0: curvature, 1: D R).
std::vector<MultiIndex> curvature_indices(int n, int derivative_order);
CurvatureTensor christoffel_and_curvature(MetricDerivatives& md);

/// Sign making the holomorphic sectional curvature of the Poincare disk metric (1 - |t|^2)^-2 negative.
struct Calibration {
  double sign = 0.0;
  double curvature = 0.0;  // calibrated value at t = 0
  double spread = 0.0;     // relative spread across base points
};
MetricFunction poincare_disk_metric();
Calibration calibrate_curvature_sign(const std::vector<ChartPoint>& base_points, double step = 0.02);

/// D_nu R = nu^e nabla_e R + conj(nu^e) nabla_ebar R, index (a, b, c, d) as for R.
struct CurvatureDerivative {
  std::vector<cplx> components;
  double noise = 0.0;
  double norm() const;
};
CurvatureDerivative covariant_curvature_derivative(MetricDerivatives& md, const ChartPoint& nu);

/// (max_a |<mu, lambda_a>| l_a^-1/2 + ||mu_0||) / ||mu||, mu_0 the part orthogonal to span{lambda_a}.
/// Every length must be at most c0.
double comp_invariant(const Section& mu, const std::vector<Section>& gradients, const std::vector<double>& lengths,
                      double c0 = 0.5);
/// Surrogate for the root-length gradient of a short geodesic: the unit harmonic differential scaled
/// to self-pairing 1/(2 pi).
Section gradient_surrogate(const SurfacePtr& surface);

struct PowerFit {
  double slope = 0.0, intercept = 0.0, stderr_slope = 0.0, ci_low = 0.0, ci_high = 0.0;
};
/// Least squares of log y against log x with a 95% Student-t interval on the slope.
PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y);

struct NormRatioRow {
  double ell = 0.0;
  double sup_norm = 0.0, l2_norm = 0.0, comp = 0.0, ratio = 0.0;
  std::vector<double> holder_ratio;  // ||mu||_{k,alpha} / ||mu||_0, k = 0, 1, 2
};
struct NormRatioStudy {
  std::vector<NormRatioRow> rows;
  PowerFit fit;
  double c_low = 0.0, c_high = 0.0;  // min and max of ratio / comp
  double holder_spread = 0.0;        // max over k of max/min of the Hoelder ratio across the family
};
NormRatioStudy norm_ratio_study(const std::vector<double>& ells, int resolution, const Truncation& trunc = {},
                                int threads = 1);

/// Modulus of the image torus, (f(tau) - f(0)) / (f(1) - f(0)).
cplx period_modulus(const QCMap& map);
struct RauchResult {
  cplx integral;    // quadrature of mu over the flat fundamental domain (omega = dz, unit a-period)
  cplx derivative;  // d tau' / dt at 0, Richardson central differences
  cplx kappa;       // derivative / integral
};
RauchResult rauch_derivative(const Section& mu, double step = 1e-2);

}  // namespace wplab
