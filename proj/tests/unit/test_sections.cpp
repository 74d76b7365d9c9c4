#include <doctest.h>

#include <cmath>

#include "wplab/beltrami.hpp"
#include "wplab/validation.hpp"

using namespace wplab;

namespace {

double valid_sup(const SurfacePtr& s, const Field& f) { return (s->valid() > 0).select(f.abs(), 0.0).maxCoeff(); }

Field ambient_points(const SurfacePtr& s) {
  Field z(s->size());
  for (int k = 0; k < s->size(); ++k) z[k] = s->ambient_point(s->grid().point(k));
  return z;
}

}  // namespace

TEST_CASE("derivatives annihilate constants") {
  for (auto kind : {SurfaceKind::Disk, SurfaceKind::Collar, SurfaceKind::PuncturedTorus}) {
    auto s = construct_model(kind, {}, 64);
    Section c(s, 0, Field::Constant(s->size(), cplx(1.5, -0.5)));
    CHECK(sup_norm(k_derivative(c)) < 1e-10);
    CHECK(sup_norm(l_derivative(c)) < 1e-10);
    CHECK(sup_norm(laplacian(c)) < 1e-10);
  }
}

TEST_CASE("disk symbolic oracles for f = (1 - |z|^2)^3") {
  auto s = construct_model(SurfaceKind::Disk, {}, 256);
  const double a = 3.0;
  Field z = ambient_points(s);
  RField u = z.abs2();
  Section f(s, 0, (1.0 - u).pow(a).cast<cplx>());
  // |lambda^-1 d_z f| = a (1-u)^a |z| / 2
  RField dk = a * (1.0 - u).pow(a) * u.sqrt() / 2.0;
  CHECK(valid_sup(s, k_derivative(f).values().abs() - dk.cast<cplx>()) < 1e-6);
  // lambda^-2 4 d dbar f for radial f(u): (1-u)^2 (f' + u f'')
  RField lap = -a * (1.0 - u).pow(a + 1) + a * (a - 1) * u * (1.0 - u).pow(a);
  CHECK(valid_sup(s, laplacian(f).values() - lap.cast<cplx>()) < 1e-6);
}

TEST_CASE("conjugate of a holomorphic quadratic differential is in the kernel of K_-2 on the disk") {
  auto s = construct_model(SurfaceKind::Disk, {}, 256);
  Field z = ambient_points(s);
  // chart w = log z: q_w = z^2 (dz/dw)^2 = z^4, lambda_w = lambda_z |z|
  RField lam_w = s->lambda();
  Section mu(s, -2, (z.pow(4)).conjugate() / lam_w.square().cast<cplx>());
  CHECK(valid_sup(s, k_derivative(mu).values()) < 1e-6);
}

TEST_CASE("conjugation identity is exact") {
  auto s = construct_model(SurfaceKind::Collar, {0.5, {}}, 64);
  Section sigma = smooth_test_section(s, 1, 3);
  Section lhs = l_derivative(conj(sigma));
  Section rhs = conj(k_derivative(sigma));
  CHECK(lhs.weight() == rhs.weight());
  CHECK((lhs.values() - rhs.values()).abs().maxCoeff() <= 1e-12 * sup_norm(rhs));
}

TEST_CASE("factorizations of the Laplacian agree under refinement") {
  double prev = 0.0;
  for (int n : {64, 128}) {
    auto s = construct_model(SurfaceKind::Collar, {0.5, {}}, n);
    Section sigma = smooth_test_section(s, -1, 11);
    double d = valid_sup(s, (laplacian(sigma) - laplacian_kl(sigma)).values());
    if (prev > 0) CHECK(d < prev / 4);
    prev = d;
  }
}

TEST_CASE("pairing and norms") {
  auto t = construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, 1}}, 64);
  Section mu = smooth_test_section(t, -1, 5);
  Section nu = smooth_test_section(t, 0, 6);
  CHECK(inner_product(mu, mu).real() > 0);
  CHECK(std::abs(inner_product(mu, mu).imag()) < 1e-14 * inner_product(mu, mu).real());
  CHECK(inner_product(Section::zero(t, -1), Section::zero(t, -1)) == cplx(0.0));

  SUBCASE("integration by parts on a compactly supported pair") {
    cplx lhs = inner_product(k_derivative(mu), nu) + inner_product(mu, l_derivative(nu));
    CHECK(std::abs(lhs) < 1e-8 * l2_norm(mu) * l2_norm(nu));
  }
  SUBCASE("mismatched weights are rejected") { CHECK_THROWS_AS(inner_product(mu, nu), TypeError); }
}

TEST_CASE("harmonic differentials") {
  auto c = construct_model(SurfaceKind::Collar, {0.25, {}}, 128);
  HarmonicBasis hb = harmonic_basis(c);
  const Section& mu = hb.basis.front();
  CHECK(inner_product(mu, mu).real() == doctest::Approx(1.0).epsilon(1e-12));

  Section raw(c, -2, hb.quadratic.front().conjugate() / c->lambda().square().cast<cplx>());
  CHECK(pair_with_quadratic(raw, hb.quadratic.front()).real() == doctest::Approx(inner_product(raw, raw).real()).epsilon(1e-12));
  CHECK(pair_with_quadratic(Section::zero(c, -2), hb.quadratic.front()) == cplx(0.0));

  Section nu = smooth_test_section(c, -2, 9);
  Section perp = nu - project_harmonic(nu, hb);
  CHECK(std::abs(pair_with_quadratic(perp, hb.quadratic.front())) < 1e-10 * l2_norm(nu) * l2_norm(raw));
}

TEST_CASE("H1 norm of a harmonic differential is twice its L2 norm") {
  std::vector<double> dev;
  for (int n : {64, 128}) {
    auto t = construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, 1}}, n);
    const Section mu = harmonic_basis(t).basis.front();
    const double h1 = sobolev_norm(mu, 1), l2 = l2_norm(mu);
    dev.push_back(std::abs(h1 * h1 / (l2 * l2) - 2.0));
  }
  CHECK(dev[1] < dev[0] / 4);
  CHECK(dev[1] < 1e-3);
}
