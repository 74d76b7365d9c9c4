#pragma once

#include <utility>
#include <vector>

#include "wplab/linsolve.hpp"
#include "wplab/sections.hpp"

namespace wplab {

/// Discrete (D_r - 2) exactly as inverted by greens_apply: r = -1, 0 use 4 L_{r+1} K_r + r(r+1) - 2,
/// r = 1 uses 4 K_0 L_1 - 2, all with antisymmetric first derivatives.
Section greens_operator(int r, const Section& f);
Section greens_apply(int r, const Section& g, SolveReport* report = nullptr);

/// f with K_{-2} f = g, orthogonal to the harmonic sections in `harmonic`.
Section k2_potential_solve(const Section& g, const std::vector<Section>& harmonic, SolveReport* report = nullptr,
                           double rel_tol = 1e-13);

/// A weight -2 section with its first and second chart derivatives.
struct BeltramiJet {
  Section mu;
  Field mu_z, mu_zbar, mu_zz;
};

/// Derivatives by the grid stencils.
BeltramiJet numeric_jet(const Section& mu);
/// For mu = lambda^-2 conj(q) with q holomorphic: the lambda factor is differentiated through the
/// log-density jets, conj(q) by the grid stencils.
BeltramiJet harmonic_jet(const Section& mu);

/// Laplacian and curvature of the pullback metric lambda^2 A |dz + mu dzbar|^2, A = 1/(1-|mu|^2).
class DeformedOperators {
 public:
  explicit DeformedOperators(BeltramiJet jet);

  const BeltramiJet& jet() const { return jet_; }
  const SurfacePtr& surface() const { return jet_.mu.surface(); }
  const RField& A() const { return A_; }
  const RField& curvature() const { return c_star_; }

  /// Expanded operator 4 lambda^-2 [(1+|mu|^2) A g_zzbar + 2 Re((A_zbar - mu A_z - A mu_z) g_z - A mu g_zz)]
  /// given the derivatives of a real function g.
  RField apply_expanded(const Field& g_z, const Field& g_zz, const RField& g_zzbar) const;
  RField apply_expanded(const RField& g) const;
  /// Divergence form lambda^-2 [dbar(2c dz g + 2 beta dbar g) + dz(2c dbar g + 2 conj(beta) dz g)],
  /// c = (1+|mu|^2) A, beta = -2 A conj(mu); antisymmetric derivatives. Equal to apply_expanded in
  /// the continuum, self-adjoint on the grid.
  RField apply(const RField& g) const;
  /// The principal coefficients in DivergenceOperator layout (times lambda^2).
  DivergenceOperator divergence_operator() const;

 private:
  BeltramiJet jet_;
  RField A_, c_star_;
  Field A_z_, A_zbar_;
};

DeformedOperators assemble_deformed_operators(const BeltramiJet& jet);

struct CurvatureOptions {
  double boundary_value = 0.0;  // Dirichlet value of h at the ends of a bounded axis
  double tol = 1e-9;
  int max_iterations = 50;
};

/// Newton solve of D_* h - C_* = e^{2h}.
std::pair<Section, SolveReport> solve_prescribed_curvature(const DeformedOperators& ops,
                                                            const CurvatureOptions& opt = {});

/// Gauss curvature of e^{2h} lambda^2 A |dz + mu dzbar|^2 by the Brioschi formula on the chart
/// coordinates, an independent check of the prescribed-curvature solve.
RField brioschi_curvature(const Section& mu, const Section& h);

/// Hyperbolic metric on the punctured torus: log lambda = reference + w with the cusp scale solved.
TorusMetric base_metric_solve(const Grid& grid, cplx tau, const Truncation& trunc);

}  // namespace wplab
