#include <doctest.h>

#include <cmath>

#include "wplab/beltrami.hpp"
#include "wplab/validation.hpp"

using namespace wplab;

namespace {

SurfacePtr square_torus(int n = 64) { return construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, 1}}, n); }

}  // namespace

TEST_CASE("Green's operator") {
  auto t = square_torus();
  SUBCASE("constant right-hand side") {
    Section f = greens_apply(0, Section(t, 0, Field::Constant(t->size(), -2.0)));
    CHECK((f.values() - 1.0).abs().maxCoeff() < 1e-8);
  }
  SUBCASE("inverse and adjointness") {
    for (int r : {-1, 0, 1}) {
      Section g1 = smooth_test_section(t, r, 21), g2 = smooth_test_section(t, r, 22);
      Section f1 = greens_apply(r, g1), f2 = greens_apply(r, g2);
      CHECK(l2_norm(greens_operator(r, f1) - g1) < 1e-8 * l2_norm(g1));
      CHECK(std::abs(inner_product(f1, g2) - inner_product(g1, f2)) < 1e-8 * l2_norm(g1) * l2_norm(g2));
    }
  }
  SUBCASE("coercivity on weight -1") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Section f = smooth_test_section(t, -1, seed);
      double lhs = 4 * l2_norm(f) * l2_norm(f), rhs = std::pow(l2_norm(greens_operator(-1, f)), 2);
      CHECK(lhs <= rhs);
    }
  }
}

TEST_CASE("K_-2 potential") {
  auto t = square_torus();
  HarmonicBasis hb = harmonic_basis(t);
  SUBCASE("forward oracle") {
    Section f0 = smooth_test_section(t, -2, 4);
    f0 -= project_harmonic(f0, hb);
    Section f = k2_potential_solve(k_derivative(f0), hb.basis);
    CHECK(sobolev_norm(f - f0, 1) < 1e-6 * sobolev_norm(f0, 1));
  }
  SUBCASE("kernel") {
    Section f = k2_potential_solve(k_derivative(hb.basis.front()), hb.basis);
    CHECK(sup_norm(f) < 1e-8);
  }
}

TEST_CASE("deformed operators at the origin") {
  auto c = construct_model(SurfaceKind::Collar, {0.5, {}}, 128);
  DeformedOperators ops = assemble_deformed_operators(numeric_jet(Section::zero(c, -2)));
  CHECK(((ops.curvature() + 1.0).abs() * c->valid()).maxCoeff() < 1e-6);
  Section g = smooth_test_section(c, 0, 8);
  RField gr = g.values().real();
  RField diff = ops.apply(gr) - laplacian(Section(c, 0, gr.cast<cplx>())).values().real();
  CHECK((diff.abs() * c->valid()).maxCoeff() < 1e-6 * gr.abs().maxCoeff());

  auto [h, report] = solve_prescribed_curvature(ops);
  CHECK(sup_norm(h) == 0.0);
  CHECK(report.iterations <= 1);
}

TEST_CASE("small harmonic deformation keeps the curvature negative") {
  auto c = construct_model(SurfaceKind::Collar, {0.5, {}}, 128);
  HarmonicBasis hb = harmonic_basis(c);
  double prev = 0.0;
  for (double t : {0.01, 0.02}) {
    DeformedOperators ops = assemble_deformed_operators(harmonic_jet(t * hb.basis.front()));
    const RField& cs = ops.curvature();
    CHECK((c->valid() > 0).select(cs, -1.0).maxCoeff() < 0.0);
    double dev = ((cs + 1.0).abs() * c->valid()).maxCoeff();
    if (prev > 0) CHECK(dev < 4.5 * prev);  // grows like t, not faster than quadratically
    prev = dev;
  }
}
