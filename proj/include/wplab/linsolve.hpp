#pragma once

#include <memory>

#include "wplab/models.hpp"

namespace wplab {

/// Second-order operator in divergence form on a model grid,
///   Op u = dbar(a dz u) + dz(a2 dbar u) + dbar(b dbar u) + dz(conj(b) dz u) + v u,
/// with real a, a2, v. It is Hermitian in the flat trapezoid inner product when discretized with
/// antisymmetric first derivatives; on a bounded axis the end nodes carry homogeneous Dirichlet data.
struct DivergenceOperator {
  SurfacePtr surface;
  RField a, a2, v;
  Field b;

  static DivergenceOperator zeros(SurfacePtr s);
  Field apply(const Field& u) const;
};

/// 1 on nodes carrying unknowns (everything except the ends of a bounded axis).
RField solve_domain(const Grid& g);

struct LinearSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients on -Op (assumed positive definite on the solve domain).
/// Cylinder grids are preconditioned by exact per-Fourier-mode solves of the axis-1 averaged
/// operator, doubly periodic grids by the Fourier symbol of the averaged operator.
class DivergenceSolver {
 public:
  explicit DivergenceSolver(DivergenceOperator op);
  ~DivergenceSolver();
  DivergenceSolver(DivergenceSolver&&) noexcept;
  DivergenceSolver& operator=(DivergenceSolver&&) noexcept;

  Field solve(const Field& rhs, double rel_tol = 1e-12, int max_iter = 5000, LinearSolveInfo* info = nullptr) const;
  const DivergenceOperator& op() const { return op_; }

 private:
  Field precondition(const Field& r) const;
  struct ModeFactors;
  DivergenceOperator op_;
  RField domain_;
  std::unique_ptr<ModeFactors> modes_;
  Field symbol_;
  bool singular_ = false;
};

}  // namespace wplab
