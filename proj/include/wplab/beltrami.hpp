#pragma once

#include <optional>
#include <vector>

#include "wplab/elliptic.hpp"

namespace wplab {

/// L2-orthonormal harmonic Beltrami differentials mu_j = lambda^-2 conj(q_j) / norm.
struct HarmonicBasis {
  std::vector<Section> basis;
  std::vector<Field> quadratic;  // chart coefficients of q_j, before normalization
  int dimension() const { return static_cast<int>(basis.size()); }
};

/// Punctured torus: q = dz^2. Collar: q = dzeta^2 in the cylinder coordinate, i.e. (dz/z)^2.
HarmonicBasis harmonic_basis(const SurfacePtr& surface);

/// Orthogonal projection sum_j <nu, b_j> b_j; the basis Gram matrix must be within 1e-6 of identity.
Section project_harmonic(const Section& nu, const std::vector<Section>& basis);
Section project_harmonic(const Section& nu, const HarmonicBasis& basis);

/// Largest sup norm of a Beltrami coefficient the solvers accept.
constexpr double kMaxBeltramiNorm = 0.7;

/// Solution of f_zbar = mu f_z: f = c (z + b conj(z)) + v with v periodic. Derivative fields are sampled at the base nodes.
class QCMap {
 public:
  const Section& mu() const { return mu_; }
  const Field& f_z() const { return fz_; }
  const Field& f_zbar() const { return fzbar_; }
  /// Derivatives of f_z.
  const Field& f_zz() const { return fzz_; }
  const Field& f_zzbar() const { return fzzbar_; }
  const Field& displacement() const { return v_; }
  cplx affine_coefficient() const { return b_; }
  /// Image modulus (f(tau) - f(0)) / (f(1) - f(0)) on the torus; zero on cylinders.
  cplx image_modulus() const { return tau_image_; }
  /// f at the base nodes.
  Field image_points() const;
  /// Jacobian |f_z|^2 - |f_zbar|^2 at the base nodes.
  RField jacobian() const { return fz_.abs2() - fzbar_.abs2(); }
  const SolveReport& report() const { return report_; }

 private:
  friend QCMap solve_beltrami(const Section& mu, double tol);
  friend QCMap affine_qcmap(const SurfacePtr& surface, cplx k);
  explicit QCMap(Section mu) : mu_(std::move(mu)) {}

  Section mu_;
  Field fz_, fzbar_, fzz_, fzzbar_, v_;
  cplx b_{}, tau_image_{}, scale_{1.0};
  SolveReport report_;
};

/// Torus Beltrami solve: fixed point v_z = T(mu (1 + v_z) - b), T the lattice Fourier multiplier
/// taking dbar to d, with Anderson mixing once plain iteration stalls. Tolerance on the increment.
QCMap solve_beltrami(const Section& mu, double tol = 1e-10);

/// The affine map (z + k conj(z)) / (1 + k conj(e1)/e1) for constant mu = k, normalized to fix the
/// period along chart axis 1. Valid on every chart kind.
QCMap affine_qcmap(const SurfacePtr& surface, cplx k);

/// A weight-r tensor on the deformed surface, sampled at the image points f(z_k) in the image chart.
struct ImageSection {
  int weight = 0;
  Field points;
  Field values;
};

/// L^mu nu = (nu / (1 - |mu|^2)) (f_z / conj(f_z)) composed with f^-1.
ImageSection push_L(const Section& nu, const QCMap& map);
/// f_r^* eta = eta(f) (f_z / |f_z|)^r, back on the base chart.
Section pullback(const ImageSection& eta, const QCMap& map, const SurfacePtr& base);

/// Everything the deformed surface needs on the base grid: the Beltrami jet, the map and the
/// conformal factor h with f^* Lambda^mu = e^{2h} Lambda.
struct Deformation {
  BeltramiJet jet;
  std::optional<QCMap> map;
  Section h;
  SolveReport curvature_report;

  const Section& mu() const { return jet.mu; }
  /// Pullback density e^{2h} lambda^2.
  RField pulled_density() const;
  RField A() const { return 1.0 / (1.0 - jet.mu.values().abs2()); }
};

/// Harmonic mu uses the analytic jet, anything else the grid stencils.
Deformation deform(const Section& mu, bool harmonic, const CurvatureOptions& opt = {});

/// f_{r+1}^*(K_r^mu eta) for eta_pulled = f_r^* eta, evaluated through base-chart derivatives.
/// The log(conj(f_z)^2 (1 - |mu|^2)) term is differentiated from the map's derivative fields.
Section pullback_K(const Deformation& d, int r, const Section& eta_pulled);
/// Same operator with the map-free identity d_mu log(conj(f_z)^2) = 2 conj(mu_z).
Section pullback_K_identity(const Deformation& d, int r, const Section& eta_pulled);

struct FrameResult {
  std::vector<Section> omega;
  std::vector<double> orthogonality_residual;  // max_k |<omega_j, mu_k> - delta_jk|
  std::vector<double> harmonicity_residual;    // L2 norm of f^* K_-2^mu L^mu omega_j, valid nodes
  SolveReport report;
};

/// Frame with <omega_j, mu_k> = delta_jk and f^* K_-2^mu L^mu omega_j = 0, by the quasi-Newton
/// iteration whose frozen inverse is the Gram inverse plus k2_potential_solve.
FrameResult omega_frame(const Deformation& d, const HarmonicBasis& basis, double tol = 1e-9, int max_iterations = 60);

}  // namespace wplab
