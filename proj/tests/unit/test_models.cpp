#include <doctest.h>

#include <cmath>

#include "wplab/models.hpp"

using namespace wplab;

TEST_CASE("closed-form densities") {
  auto disk = construct_model(SurfaceKind::Disk, {}, 32);
  CHECK(density_at(*disk, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  auto pdisk = construct_model(SurfaceKind::PuncturedDisk, {}, 32);
  CHECK(density_at(*pdisk, std::exp(-1.0)) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("collar curvature is -1 at interior nodes") {
  auto s = construct_model(SurfaceKind::Collar, {0.5, {}}, 256);
  RField k = gauss_curvature(*s);
  const int n = s->grid().n0();
  for (int i : {n / 4, n / 2, 3 * n / 4}) CHECK(std::abs(k[s->grid().index(i, 17)] + 1.0) < 1e-6);
}

TEST_CASE("hyperbolic area") {
  SUBCASE("torus obeys Gauss-Bonnet") {
    auto t = construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, 1}}, 128);
    CHECK(std::abs(hyperbolic_area(*t) - 2 * kPi) < 1e-3);
  }
  SUBCASE("collar sub-cylinder matches the 1-D integral") {
    const double ell = 0.5, s0 = 3.0;
    auto c = construct_model(SurfaceKind::Collar, {ell, {}}, 256);
    const double exact = 2 * ell * std::tan(ell * s0 / (2 * kPi));  // 2 pi * int kappa^2 sec^2(kappa s) ds
    CHECK(hyperbolic_area(*c, {-s0, s0}) == doctest::Approx(exact).epsilon(1e-3));
  }
  SUBCASE("empty region") {
    auto d = construct_model(SurfaceKind::Disk, {}, 32);
    CHECK(hyperbolic_area(*d, {-1.0, -1.0}) == 0.0);
  }
}

TEST_CASE("trace to length") {
  CHECK(trace_to_length(2.0) == 0.0);
  CHECK(trace_to_length(3.0) == doctest::Approx(1.9248473002384139).epsilon(1e-14));
  CHECK(trace_to_length(2 * std::cosh(0.25)) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("numeric geodesic length") {
  auto c = construct_model(SurfaceKind::Collar, {0.5, {}}, 64);
  GeodesicResult a = geodesic_length_numeric(*c, core_curve(*c));
  CHECK(std::abs(a.length - 0.5) < 1e-4);
  GeodesicResult b = geodesic_length_numeric(*c, core_curve(*c));
  CHECK(a.length == b.length);

  auto t = construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, 8}}, 64);
  ClosedCurve seed = core_curve(*t);
  const double flat = curve_length(*t, seed);
  CHECK(geodesic_length_numeric(*t, seed).length <= flat);
}

TEST_CASE("invalid parameters are refused") {
  CHECK_THROWS_AS(construct_model(SurfaceKind::Collar, {-1.0, {}}, 32), DomainError);
  CHECK_THROWS_AS(construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, -1}}, 32), DomainError);
  CHECK_THROWS_AS(surface_kind_from_string("sphere"), DomainError);
}
