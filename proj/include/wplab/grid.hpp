#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "wplab/types.hpp"

namespace wplab {

/// One coordinate direction of a chart. Bounded axes may be sampled uniformly in an
/// auxiliary variable xi with x = map(xi); derivatives are then d/dx = (1/jac) d/dxi.
struct Axis {
  bool periodic = false;
  int n = 0;
  double h = 0.0;  // spacing of the computational variable
  double period = 0.0;
  std::vector<double> x;    // physical node coordinate
  std::vector<double> jac;  // dx/dxi at each node

  static Axis make_periodic(int n, double lo, double period);
  static Axis make_bounded(int n, double lo, double hi);
  static Axis make_mapped(int n, double xi_lo, double xi_hi, const std::function<double(double)>& map,
                          const std::function<double(double)>& dmap);

  /// Quadrature weight in the physical variable: h * jac, times the summation-by-parts norm near
  /// the ends of a bounded axis.
  double weight(int i) const;
};

/// Finite-difference flavor on bounded axes. Accurate uses one-sided fourth-order closures near the
/// ends; Adjoint is the summation-by-parts operator, antisymmetric in the quadrature inner product
/// up to end-node terms, so divergence-form operators are self-adjoint on functions vanishing there.
enum class Flavor { Accurate, Adjoint };

/// Row i of the summation-by-parts derivative on n nodes: (column, weight / h) pairs.
std::vector<std::pair<int, double>> sbp_stencil(int n, int i);

/// Tensor-product grid on a chart z = origin + e0 * x0 + e1 * x1. Node (i, j) has flat index i * n1 + j.
class Grid {
 public:
  Grid(Axis a0, Axis a1, cplx e0, cplx e1, cplx origin = {});

  int n0() const { return a0_.n; }
  int n1() const { return a1_.n; }
  int size() const { return a0_.n * a1_.n; }
  int index(int i, int j) const { return i * a1_.n + j; }
  const Axis& axis0() const { return a0_; }
  const Axis& axis1() const { return a1_; }
  cplx e0() const { return e0_; }
  cplx e1() const { return e1_; }

  cplx point(int k) const;
  double x0(int k) const { return a0_.x[static_cast<std::size_t>(k / a1_.n)]; }
  double x1(int k) const { return a1_.x[static_cast<std::size_t>(k % a1_.n)]; }

  /// Flat (Euclidean chart) area weights of the tensor trapezoid rule.
  const RField& area_weights() const { return weights_; }

  Field d0(const Field& f, Flavor fl = Flavor::Accurate) const;
  Field d1(const Field& f, Flavor fl = Flavor::Accurate) const;
  Field dz(const Field& f, Flavor fl = Flavor::Accurate) const;
  Field dzbar(const Field& f, Flavor fl = Flavor::Accurate) const;

  /// Unnormalized 2-D DFT (both axes must be periodic); inverse includes the 1/N factor.
  Field fft2(const Field& f) const;
  Field ifft2(const Field& f) const;
  /// Symbols of dz and dzbar on the 2-D DFT modes (Nyquist modes zeroed).
  const Field& dz_symbol() const;
  const Field& dzbar_symbol() const;

  /// Trigonometric interpolant sampled at the nodes shifted by (t0, t1) cells (doubly periodic grids).
  Field shifted(const Field& f, double t0, double t1) const;

  /// Symbol of d/dx1 for 1-D mode m along axis 1 (i * wavenumber; zero at Nyquist).
  double wavenumber1(int m) const;
  /// DFT along axis 1 only (row transforms), and its inverse with 1/n1.
  Field fft_axis1(const Field& f) const;
  Field ifft_axis1(const Field& f) const;

 private:
  Field diff_bounded(const Field& f, int axis, Flavor fl) const;
  Field diff_periodic(const Field& f, int axis) const;

  struct Plans;
  Axis a0_, a1_;
  cplx e0_, e1_, origin_;
  cplx delta_;
  RField weights_;
  std::shared_ptr<Plans> plans_;
};

}  // namespace wplab
