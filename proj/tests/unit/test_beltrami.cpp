#include <doctest.h>

#include <cmath>

#include "wplab/beltrami.hpp"
#include "wplab/validation.hpp"

using namespace wplab;

namespace {

SurfacePtr torus(cplx tau = {0, 1}, int n = 64) { return construct_model(SurfaceKind::PuncturedTorus, {0.5, tau}, n); }

}  // namespace

TEST_CASE("harmonic basis on the torus") {
  auto t = torus();
  HarmonicBasis hb = harmonic_basis(t);
  REQUIRE(hb.dimension() == 1);
  CHECK(inner_product(hb.basis[0], hb.basis[0]).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((k_derivative(hb.basis[0]).values().abs() * t->valid()).maxCoeff() < 1e-6);
}

TEST_CASE("harmonic projection") {
  auto t = torus();
  HarmonicBasis hb = harmonic_basis(t);
  CHECK(l2_norm(project_harmonic(hb.basis[0], hb) - hb.basis[0]) < 1e-12);
  Section nu = smooth_test_section(t, -2, 3);
  Section rest = nu - project_harmonic(nu, hb);
  CHECK(l2_norm(project_harmonic(rest, hb)) < 1e-10 * l2_norm(nu));
  CHECK(l2_norm(project_harmonic(nu, hb)) <= l2_norm(nu));
}

TEST_CASE("constant Beltrami coefficient gives the affine lattice") {
  for (cplx tau : {cplx(0, 1), cplx(0.3, 1.2)}) {
    auto t = torus(tau);
    const cplx k(0.1, 0.05);
    QCMap f = solve_beltrami(Section(t, -2, Field::Constant(t->size(), k)));
    CHECK(std::abs(f.image_modulus() - (tau + k * std::conj(tau)) / (1.0 + k)) < 1e-10);
    CHECK(std::abs(affine_qcmap(t, k).image_modulus() - (tau + k * std::conj(tau)) / (1.0 + k)) < 1e-12);
  }
}

TEST_CASE("Beltrami solve on a smooth coefficient") {
  auto t = torus();
  Section mu = smooth_test_section(t, -2, 12);
  mu *= 0.3 / sup_norm(mu);
  QCMap f = solve_beltrami(mu);
  Field res = f.f_zbar() - mu.values() * f.f_z();
  CHECK(std::sqrt(res.abs2().sum() / f.f_z().abs2().sum()) < 1e-9);
  CHECK(((f.f_zbar() / f.f_z() - mu.values()).abs()).maxCoeff() < 1e-6);
  CHECK(f.jacobian().minCoeff() > 0);

  Section big = mu * cplx(0.8 / 0.3);
  CHECK_THROWS(solve_beltrami(big));
}

TEST_CASE("push forward of Beltrami variations") {
  auto t = torus();
  Section nu = smooth_test_section(t, -2, 2);
  SUBCASE("identity at the origin") {
    QCMap id = solve_beltrami(Section::zero(t, -2));
    ImageSection l = push_L(nu, id);
    CHECK((l.values - nu.values()).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("modulus for constant coefficients") {
    QCMap f = affine_qcmap(t, 0.5 * std::polar(1.0, 0.7));
    Section unit(t, -2, Field::Constant(t->size(), std::polar(1.0, -0.3)));
    ImageSection l = push_L(unit, f);
    CHECK((l.values.abs() - 4.0 / 3.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("frame at the origin") {
  auto t = torus();
  HarmonicBasis hb = harmonic_basis(t);
  Deformation d = deform(Section::zero(t, -2), true);
  FrameResult fr = omega_frame(d, hb);
  CHECK((fr.omega[0].values() - hb.basis[0].values()).abs().maxCoeff() == 0.0);
  Section eta = smooth_test_section(t, -2, 4);
  CHECK(l2_norm(pullback_K(d, -2, eta) - k_derivative(eta)) < 1e-12 * l2_norm(k_derivative(eta)));
}

TEST_CASE("frame at a small deformation") {
  auto t = torus();
  HarmonicBasis hb = harmonic_basis(t);
  Deformation d = deform(0.05 * hb.basis[0], true);
  FrameResult fr = omega_frame(d, hb, 1e-10);
  CHECK(fr.orthogonality_residual[0] < 1e-10);
  CHECK(fr.harmonicity_residual[0] < 1e-6);
}
