#include <doctest.h>

#include <cmath>

#include "wplab/wp.hpp"

using namespace wplab;

TEST_CASE("metric at the origin and its derivatives") {
  DeformationFamily fam(construct_model(SurfaceKind::PuncturedTorus, {0.5, {0, 1}}, 64));
  ChartPoint zero = ChartPoint::Zero(1);
  CHECK((fam.metric(zero) - Matrix::Identity(1, 1)).norm() < 1e-12);

  ChartPoint t(1);
  t[0] = cplx(0.03, -0.02);
  Matrix g = wp_pairing(fam.evaluate(t)->deformation, fam.evaluate(t)->frame, fam.basis(), false);
  CHECK((g - g.adjoint()).norm() < 1e-10);

  MetricDerivatives md = metric_derivatives(fam, zero);
  MultiIndex mixed = multi_index(1, {0}, {0}), pure = multi_index(1, {0}, {});
  md.prepare({mixed, pure});
  DerivativeValue m = md.derivative(mixed);
  CHECK(std::abs(m.value(0, 0).imag()) < 10 * m.noise + 1e-12);
  DerivativeValue p = md.derivative(pure);
  CHECK(std::abs(p.value(0, 0)) < 10 * p.noise + 1e-12);
}

TEST_CASE("Poincare disk calibration and constant curvature") {
  std::vector<ChartPoint> pts;
  for (cplx z : {cplx(0), cplx(0.3, 0.1), cplx(-0.4, 0.2)}) pts.push_back(ChartPoint::Constant(1, z));
  Calibration cal = calibrate_curvature_sign(pts);
  CHECK(cal.curvature < 0);
  CHECK(cal.spread < 1e-2);

  MetricDerivatives md(poincare_disk_metric(), ChartPoint::Constant(1, cplx(0.3, 0.1)), {0.02});
  CurvatureDerivative d1 = covariant_curvature_derivative(md, ChartPoint::Ones(1));
  CHECK(d1.norm() < 10 * d1.noise + 1e-8);
  MetricDerivatives md2(poincare_disk_metric(), ChartPoint::Constant(1, cplx(0.3, 0.1)), {0.02});
  CurvatureDerivative d3 = covariant_curvature_derivative(md2, ChartPoint::Constant(1, cplx(3.0)));
  for (std::size_t i = 0; i < d1.components.size(); ++i)
    CHECK(std::abs(d3.components[i] - 3.0 * d1.components[i]) <= 1e-12 * (1 + std::abs(d3.components[i])));
}

TEST_CASE("Comp invariant") {
  auto c = construct_model(SurfaceKind::Collar, {0.0625, {}}, 64);
  Section lam = gradient_surrogate(c);
  Section mu = lam * cplx(1.0 / std::sqrt(inner_product(lam, lam).real()));
  CHECK(comp_invariant(mu, {}, {}) == doctest::Approx(1.0));
  CHECK(inner_product(lam, lam).real() == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-10));
  const double l = 0.0625;
  CHECK(comp_invariant(mu, {lam}, {l}) == doctest::Approx(std::pow(2 * kPi, -0.5) * std::pow(l, -0.5)).epsilon(1e-6));
  CHECK_THROWS(comp_invariant(mu, {lam}, {1.0}));
}

TEST_CASE("power fit recovers an exact law") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  PowerFit f = fit_power(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("norm ratio scaling on collars") {
  NormRatioStudy st = norm_ratio_study({0.5, 0.25, 0.125, 0.0625, 0.03125}, 64);
  CHECK(std::abs(st.fit.slope + 0.5) < 0.05);
  CHECK(st.c_high / st.c_low < 4);
}

TEST_CASE("Rauch variation") {
  for (cplx tau : {cplx(0, 1), cplx(1, 2)}) {
    auto t = construct_model(SurfaceKind::PuncturedTorus, {0.5, tau}, 32);
    for (cplx k : {cplx(0.1), cplx(0, 0.2)}) {
      RauchResult r = rauch_derivative(Section(t, -2, Field::Constant(t->size(), k)));
      CHECK(std::abs(r.derivative - k * (std::conj(tau) - tau)) < 1e-6);
    }
    RauchResult z = rauch_derivative(Section::zero(t, -2));
    CHECK(std::abs(z.derivative) < 1e-14);
    CHECK(std::abs(z.integral) == 0.0);
  }
}
