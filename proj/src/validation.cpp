#include "wplab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "wplab/parallel.hpp"

namespace wplab {

bool Metric::ok() const {
  if (relation.empty()) return true;
  if (!std::isfinite(value)) return false;
  if (relation == "<") return value < limit;
  if (relation == "<=") return value <= limit;
  if (relation == ">") return value > limit;
  if (relation == ">=") return value >= limit;
  if (relation == "in") return value >= limit && value <= upper;
  return false;
}

bool CheckResult::passed() const {
  if (!error.empty()) return false;
  return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.ok(); });
}

std::string CheckResult::summary() const {
  std::ostringstream os;
  os << std::setprecision(3);
  os << (passed() ? "PASS" : "FAIL") << "  " << id << ". " << name;
  if (!error.empty()) os << ": error: " << error;
  bool first = true;
  for (const auto& m : metrics) {
    if (!m.asserted()) continue;
    os << (first ? ": " : "; ") << m.name << " " << m.value;
    if (m.relation == "in")
      os << " in [" << m.limit << ", " << m.upper << "]";
    else
      os << " " << m.relation << " " << m.limit;
    first = false;
  }
  return os.str();
}

namespace {

Metric assert_lt(std::string name, double v, double lim) { return {std::move(name), v, lim, "<", 0.0}; }
Metric assert_le(std::string name, double v, double lim) { return {std::move(name), v, lim, "<=", 0.0}; }
Metric assert_ge(std::string name, double v, double lim) { return {std::move(name), v, lim, ">=", 0.0}; }
Metric assert_in(std::string name, double v, double lo, double hi) { return {std::move(name), v, lo, "in", hi}; }
Metric report(std::string name, double v) { return {std::move(name), v, 0.0, "", 0.0}; }

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double valid_sup(const Field& f, const ModelSurface& s) { return (s.valid() > 0).select(f.abs(), 0.0).maxCoeff(); }

SurfacePtr model(SurfaceKind k, int n, const ValidationSettings& v, double ell = 0.5, cplx tau = {0.0, 1.0}) {
  return construct_model(k, SurfaceParams{ell, tau}, n, v.truncation);
}

// Observed order of a refinement sequence; a step that lands below `floor` counts as converged.
double observed_order(const std::vector<double>& e, double floor) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] <= floor) continue;
    worst = std::min(worst, std::log2(e[i - 1] / e[i]));
  }
  return std::isfinite(worst) ? worst : 99.0;
}

constexpr SurfaceKind kAllKinds[] = {SurfaceKind::Disk, SurfaceKind::PuncturedDisk, SurfaceKind::Collar,
                                     SurfaceKind::PuncturedTorus};

}  // namespace

Section smooth_test_section(const SurfacePtr& s, int weight, std::uint64_t seed) {
  const Grid& g = s->grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr int kModes = 1;
  std::vector<cplx> c;
  for (int m = 0; m < (2 * kModes + 1) * (2 * kModes + 1); ++m) c.emplace_back(u(rng), u(rng));
  const Axis& a0 = g.axis0();
  const Axis& a1 = g.axis1();
  // unit coordinate in the computational variable, so mapped axes see the same smoothness
  auto unit = [](const Axis& a, int i) {
    return a.periodic ? static_cast<double>(i) / a.n : static_cast<double>(i) / (a.n - 1);
  };
  auto window = [](const Axis& a, double t) {
    return a.periodic ? std::exp(4.0 * (std::cos(2 * kPi * (t - 0.5)) - 1.0)) : std::exp(-std::pow((t - 0.5) / 0.33, 4));
  };
  // C-infinity factor vanishing within flat distance 0.1 of a torus puncture
  auto cusp_cutoff = [&](int k) {
    if (s->kind() != SurfaceKind::PuncturedTorus) return 1.0;
    const cplx p = g.point(0) + 0.5 * (g.point(g.index(1, 1)) - g.point(0));
    const double d = std::abs(lattice_displacement(g.point(k), p, s->params().tau));
    auto e = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    const double x = (d - 0.1) / 0.3;
    return e(x) / (e(x) + e(1.0 - x));
  };
  Field f(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const int i = k / g.n1(), j = k % g.n1();
    double t0 = unit(a0, i), t1 = unit(a1, j);
    cplx p = 0.0;
    int idx = 0;
    for (int m = -kModes; m <= kModes; ++m)
      for (int n = -kModes; n <= kModes; ++n) p += c[static_cast<std::size_t>(idx++)] * std::polar(1.0, 2 * kPi * (m * t0 + n * t1));
    f[k] = window(a0, t0) * window(a1, t1) * cusp_cutoff(k) * p;
  }
  return Section(s, weight, std::move(f));
}

// ---- 1. operator identities ----

CheckResult check_operator_identities(const ValidationSettings& v) {
  CheckResult out{1, "operator identities", {}, {}, {}};
  Table t{"operator_identities", {"kind", "resolution", "weight", "factorization", "commutation"}, {}};
  double worst_fine = 0.0, worst_order = 99.0;
  for (SurfaceKind kind : kAllKinds) {
    std::vector<double> fac, com;
    for (int n : v.refinement) {
      SurfacePtr s = model(kind, n, v);
      double f = 0.0;
      for (int r = -2; r <= 2; ++r) {
        Section sig = smooth_test_section(s, r, v.seed + static_cast<std::uint64_t>(r + 2));
        double scale = valid_sup(sig.values(), *s);
        double d = valid_sup(Field(laplacian(sig).values() - laplacian_kl(sig).values()), *s) / scale;
        t.rows.push_back({static_cast<double>(kind), static_cast<double>(n), static_cast<double>(r), d, 0.0});
        f = std::max(f, d);
      }
      Section sig = smooth_test_section(s, -1, v.seed + 11);
      Field lhs = l_derivative(k_derivative(sig)).values();
      Field rhs = k_derivative(l_derivative(sig)).values() + 0.5 * sig.values();
      double c = valid_sup(Field(lhs - rhs), *s) / valid_sup(sig.values(), *s);
      t.rows.push_back({static_cast<double>(kind), static_cast<double>(n), -1.0, 0.0, c});
      fac.push_back(f);
      com.push_back(c);
    }
    const std::string tag = to_string(kind);
    out.metrics.push_back(report(tag + " factorization", fac.back()));
    out.metrics.push_back(report(tag + " commutation", com.back()));
    worst_fine = std::max({worst_fine, fac.back(), com.back()});
    worst_order = std::min({worst_order, observed_order(fac, 1e-10), observed_order(com, 1e-10)});
  }
  out.metrics.push_back(assert_lt("sup residual", worst_fine, 1e-5));
  out.metrics.push_back(assert_ge("observed order", worst_order, 2.0));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- 2. Green's operator ----

CheckResult check_greens_operator(const ValidationSettings& v) {
  CheckResult out{2, "Green's operator", {}, {}, {}};
  Table t{"greens_operator", {"kind", "weight", "residual_l2", "adjointness", "linear_iterations"}, {}};
  double residual = 0.0, adjoint = 0.0, coercive = std::numeric_limits<double>::infinity();
  for (SurfaceKind kind : kAllKinds) {
    SurfacePtr s = model(kind, v.greens_resolution, v);
    for (int r = -1; r <= 1; ++r) {
      Section g1 = smooth_test_section(s, r, v.seed + 20 + static_cast<std::uint64_t>(r));
      Section g2 = smooth_test_section(s, r, v.seed + 30 + static_cast<std::uint64_t>(r));
      SolveReport rep;
      Section f1 = greens_apply(r, g1, &rep);
      Section f2 = greens_apply(r, g2);
      double a = std::abs(inner_product(f1, g2) - inner_product(g1, f2)) /
                 std::sqrt(std::abs(inner_product(f1, f1) * inner_product(g2, g2)));
      t.rows.push_back({static_cast<double>(kind), static_cast<double>(r), rep.residual_l2, a,
                        static_cast<double>(rep.linear_iterations)});
      residual = std::max(residual, rep.residual_l2);
      adjoint = std::max(adjoint, a);
    }
    for (int i = 0; i < v.random_fields; ++i) {
      Section f = smooth_test_section(s, -1, v.seed + 1000 + static_cast<std::uint64_t>(i));
      if (i % 2 == 1) {  // rough field: independent node values under the same envelope
        std::mt19937_64 rng(v.seed + 2000 + static_cast<std::uint64_t>(i));
        std::normal_distribution<double> nd;
        for (int k = 0; k < s->size(); ++k) f.values()[k] = std::abs(f.values()[k]) * cplx(nd(rng), nd(rng));
      }
      Section d = greens_operator(-1, f);
      coercive = std::min(coercive, inner_product(d, d).real() / (4.0 * inner_product(f, f).real()));
    }
  }
  out.metrics.push_back(assert_lt("residual L2", residual, 1e-8));
  out.metrics.push_back(assert_lt("adjointness", adjoint, 1e-8));
  out.metrics.push_back(assert_ge("min coercivity ratio", coercive, 1.0));

  Table u{"greens_uniformity", {"ell", "h2_over_l2", "linear_iterations"}, {}};
  std::vector<double> bounds;
  for (double ell : v.collar_lengths) {
    SurfacePtr s = model(SurfaceKind::Collar, v.collar_resolution, v, ell);
    double c = 0.0;
    int iters = 0;
    for (int i = 0; i < 4; ++i) {
      Section g = smooth_test_section(s, -1, v.seed + 40 + static_cast<std::uint64_t>(i));
      SolveReport rep;
      c = std::max(c, sobolev_norm(greens_apply(-1, g, &rep), 2) / l2_norm(g));
      iters = std::max(iters, rep.linear_iterations);
    }
    u.rows.push_back({ell, c, static_cast<double>(iters)});
    bounds.push_back(c);
  }
  auto [lo, hi] = std::minmax_element(bounds.begin(), bounds.end());
  out.metrics.push_back(report("inverse norm min", *lo));
  out.metrics.push_back(report("inverse norm max", *hi));
  out.metrics.push_back(assert_lt("inverse norm spread", *hi / *lo, 2.0));
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(u));
  return out;
}

// ---- 3. prescribed curvature ----

CheckResult check_curvature_solver(const ValidationSettings& v) {
  CheckResult out{3, "curvature solver", {}, {}, {}};
  SurfacePtr s = model(SurfaceKind::Collar, v.curvature_resolution, v);
  const Grid& g = s->grid();

  Deformation flat = deform(Section::zero(s, -2), true);
  out.metrics.push_back(assert_le("sup |h| at mu = 0", flat.h.values().abs().maxCoeff(), 0.0));

  // s -> a s on the cylinder: mu = (a - 1) / (a + 1) and e^{2h} = a lambda(a s)^2 / lambda(s)^2
  const double a = 0.8;
  auto log_density = [&](double x) { return std::log(s->density_chart(cplx(x, 0.0))); };
  RField exact(g.size());
  for (int k = 0; k < g.size(); ++k) {
    double x = std::real(g.point(k));
    exact[k] = 0.5 * std::log(a) + log_density(a * x) - log_density(x);
  }
  CurvatureOptions opt;
  opt.boundary_value = exact[0];
  Section stretch_mu(s, -2, Field::Constant(g.size(), cplx((a - 1) / (a + 1), 0.0)));
  Deformation stretch = deform(stretch_mu, false, opt);
  out.metrics.push_back(
      assert_lt("stretch sup error", valid_sup(Field(stretch.h.values() - exact.cast<cplx>()), *s), 1e-6));

  const HarmonicBasis hb = harmonic_basis(s);
  const Section& mu1 = hb.basis.front();
  Table t{"curvature_smallness", {"t", "sup_h", "brioschi_error", "newton_iterations"}, {}};
  std::vector<double> ts, hs;
  double brioschi = valid_sup(Field((brioschi_curvature(stretch_mu, stretch.h) + 1.0).cast<cplx>()), *s);
  for (double tt : {-1.0 / 32, -1.0 / 64, 1.0 / 64, 1.0 / 32}) {
    Section mu = cplx(tt) * mu1;
    Deformation d = deform(mu, true);
    double hsup = sup_norm(d.h);
    double b = valid_sup(Field((brioschi_curvature(mu, d.h) + 1.0).cast<cplx>()), *s);
    brioschi = std::max(brioschi, b);
    t.rows.push_back({tt, hsup, b, static_cast<double>(d.curvature_report.iterations)});
    ts.push_back(std::abs(tt));
    hs.push_back(hsup);
  }
  PowerFit fit = fit_power(ts, hs);
  out.metrics.push_back(assert_lt("Brioschi curvature error", brioschi, 1e-5));
  out.metrics.push_back(assert_in("smallness slope", fit.slope, 1.9, 2.1));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- 4. base metric of the punctured torus ----

CheckResult check_base_metric(const ValidationSettings& v) {
  CheckResult out{4, "base metric", {}, {}, {}};
  SurfacePtr s = model(SurfaceKind::PuncturedTorus, v.metric_resolution, v);
  const TorusMetric& tm = *s->torus_metric();
  out.metrics.push_back(assert_lt("area error", std::abs(hyperbolic_area(*s) - 2 * kPi), 1e-3));
  out.metrics.push_back(assert_lt("curvature residual away from the cusp", valid_sup(Field((gauss_curvature(*s) + 1.0).cast<cplx>()), *s), 1e-5));

  // lambda / (r |log r|)^-1 = |log r| / (|log r| + b) on circles around the puncture
  Table t{"cusp_profile", {"radius", "ratio_min", "ratio_max"}, {}};
  const double b = tm.reference.scale;
  double prev = 0.0, model_gap = 0.0;
  bool monotone = true;
  for (double r : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9, 1e-12}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int k = 0; k < 16; ++k) {
      double q = s->density_chart(tm.reference.puncture + std::polar(r, 2 * kPi * (k + 0.5) / 16)) * r * std::abs(std::log(r));
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    t.rows.push_back({r, lo, hi});
    monotone = monotone && lo > prev && hi < 1.0;
    prev = hi;
    if (r <= 1e-3) model_gap = std::max(model_gap, std::max(std::abs(lo * (1 + b / std::abs(std::log(r))) - 1),
                                                            std::abs(hi * (1 + b / std::abs(std::log(r))) - 1)));
  }
  out.metrics.push_back(report("cusp scale", b));
  out.metrics.push_back(report("ratio at radius 1e-12", prev));
  out.metrics.push_back(assert_ge("ratio increases toward 1", monotone ? 1.0 : 0.0, 1.0));
  out.metrics.push_back(assert_lt("deviation from the cusp law", model_gap, 1e-6));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- 5. omega frame ----

CheckResult check_omega_frame(const ValidationSettings& v) {
  CheckResult out{5, "omega frame", {}, {}, {}};
  Table t{"omega_frame", {"kind", "t_abs", "orthogonality", "harmonicity", "iterations"}, {}};
  double ortho = 0.0, harm = 0.0, origin = 0.0;
  for (SurfaceKind kind : {SurfaceKind::PuncturedTorus, SurfaceKind::Collar}) {
    DeformationFamily fam(model(kind, v.frame_resolution, v));
    const HarmonicBasis& hb = fam.basis();
    FrameResult zero = omega_frame(deform(Section::zero(fam.base(), -2), true), hb, 1e-12);
    for (int j = 0; j < hb.dimension(); ++j)
      origin = std::max(origin, (zero.omega[static_cast<std::size_t>(j)].values() -
                                 hb.basis[static_cast<std::size_t>(j)].values()).abs().maxCoeff());
    for (double frac : {0.1, 0.3}) {
      ChartPoint c = ChartPoint::Constant(fam.dimension(), std::polar(frac * fam.chart_radius(), kPi / 5));
      Deformation d = deform(fam.beltrami(c), true);
      FrameResult f = omega_frame(d, hb, 1e-10);
      double o = *std::max_element(f.orthogonality_residual.begin(), f.orthogonality_residual.end());
      double h = *std::max_element(f.harmonicity_residual.begin(), f.harmonicity_residual.end());
      t.rows.push_back({static_cast<double>(kind), c.norm(), o, h, static_cast<double>(f.report.iterations)});
      ortho = std::max(ortho, o);
      harm = std::max(harm, h);
    }
  }
  out.metrics.push_back(assert_lt("orthogonality residual", ortho, 1e-10));
  out.metrics.push_back(assert_lt("harmonicity residual", harm, 1e-6));
  out.metrics.push_back(assert_le("omega - mu at the origin", origin, 0.0));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- 6. norm comparison across the collar family ----

CheckResult check_norm_comparison(const ValidationSettings& v) {
  CheckResult out{6, "norm comparison", {}, {}, {}};
  NormRatioStudy st = norm_ratio_study(v.collar_lengths, v.collar_resolution, v.truncation, v.threads);
  Table t{"norm_ratio", {"ell", "sup_norm", "l2_norm", "comp", "ratio", "holder0", "holder1", "holder2"}, {}};
  for (const auto& r : st.rows) {
    std::vector<double> row{r.ell, r.sup_norm, r.l2_norm, r.comp, r.ratio};
    row.insert(row.end(), r.holder_ratio.begin(), r.holder_ratio.end());
    t.rows.push_back(std::move(row));
  }
  out.metrics.push_back(assert_in("fitted exponent", st.fit.slope, -0.55, -0.45));
  out.metrics.push_back(report("exponent 95% low", st.fit.ci_low));
  out.metrics.push_back(report("exponent 95% high", st.fit.ci_high));
  out.metrics.push_back(report("c' (min ratio / Comp)", st.c_low));
  out.metrics.push_back(report("c'' (max ratio / Comp)", st.c_high));
  out.metrics.push_back(assert_lt("c''/c'", st.c_high / st.c_low, 4.0));
  out.metrics.push_back(assert_lt("Hoelder ratio spread", st.holder_spread, 4.0));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- 7. WP metric ----

CheckResult check_wp_metric(const ValidationSettings& v) {
  CheckResult out{7, "WP metric", {}, {}, {}};
  DeformationFamily coarse(model(SurfaceKind::PuncturedTorus, v.wp_resolution, v));
  DeformationFamily fine(model(SurfaceKind::PuncturedTorus, v.wp_fine_resolution, v));
  const int n = coarse.dimension();
  const ChartPoint origin = ChartPoint::Zero(n);
  const Matrix id = Matrix::Identity(n, n);
  out.metrics.push_back(assert_lt("|g(0) - I|", max_abs(Matrix(coarse.metric(origin) - id)), 1e-12));

  const ChartPoint t = ChartPoint::Constant(n, std::polar(0.05 / std::sqrt(static_cast<double>(n)), kPi / 5));
  auto st = coarse.evaluate(t);
  Matrix raw = wp_pairing(st->deformation, st->frame, coarse.basis(), false);
  out.metrics.push_back(assert_lt("Hermitian defect", max_abs(Matrix(raw - raw.adjoint())) / max_abs(raw), 1e-10));
  Matrix gf = fine.metric(t);
  double conv = max_abs(Matrix(st->metric - gf)) / max_abs(gf);
  out.metrics.push_back(assert_lt("self-convergence 64 -> 128", conv, 1e-4));

  MetricDerivatives md = metric_derivatives(coarse, origin, FiniteDifferenceOptions{v.fd_step, v.threads});
  Table tab{"wp_metric_derivatives", {"order", "direction", "value", "noise"}, {}};
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    MultiIndex first = multi_index(n, {j}, {});
    MultiIndex mixed = multi_index(n, {j}, {j});
    md.prepare({first, mixed});
    DerivativeValue d1 = md.derivative(first), d2 = md.derivative(mixed);
    tab.rows.push_back({1.0, static_cast<double>(j), max_abs(d1.value), d1.noise});
    tab.rows.push_back({2.0, static_cast<double>(j), max_abs(d2.value), d2.noise});
    worst = std::max(worst, max_abs(d1.value) / std::max(d1.noise, std::numeric_limits<double>::min()));
    out.metrics.push_back(report("|d g(0)| direction " + std::to_string(j + 1), max_abs(d1.value)));
    out.metrics.push_back(report("first-derivative noise floor", d1.noise));
    out.metrics.push_back(report("|d dbar g(0)| direction " + std::to_string(j + 1), max_abs(d2.value)));
  }
  out.metrics.push_back(assert_lt("first derivative / noise floor", worst, 10.0));
  out.tables.push_back(std::move(tab));
  return out;
}

// ---- 8. WP curvature ----

PinchPoint torus_curvature(double height, int resolution, const ValidationSettings& v, double sign, int threads) {
  SurfacePtr s = model(SurfaceKind::PuncturedTorus, resolution, v, 0.5, cplx(0.0, height));
  DeformationFamily fam(s);
  const int n = fam.dimension();
  MetricDerivatives md = metric_derivatives(fam, ChartPoint::Zero(n), FiniteDifferenceOptions{v.fd_step, threads});
  md.prepare(curvature_indices(n, 0));
  CurvatureTensor ct = christoffel_and_curvature(md);
  PinchPoint p;
  p.height = height;
  p.systole = geodesic_length_numeric(*s, core_curve(*s)).length;
  p.curvature = ct.holomorphic_sectional(ChartPoint::Ones(n), sign);
  p.symmetry = ct.symmetry_residual;
  p.noise = ct.riemann_noise;
  return p;
}

CheckResult check_wp_curvature(const ValidationSettings& v) {
  CheckResult out{8, "WP curvature", {}, {}, {}};
  std::vector<ChartPoint> points;
  for (cplx z : {cplx(0.0), cplx(0.3, 0.0), cplx(0.0, -0.5), cplx(-0.4, 0.4)}) points.push_back(ChartPoint::Constant(1, z));
  Calibration cal = calibrate_curvature_sign(points, v.fd_step);
  out.metrics.push_back(report("calibrated sign", cal.sign));
  out.metrics.push_back(report("Poincare disk curvature", cal.curvature));
  out.metrics.push_back(assert_lt("Poincare disk curvature sign", cal.curvature, 0.0));
  out.metrics.push_back(assert_lt("Poincare disk spread", cal.spread, 0.01));

  // the pinching family doubles as the torus case: height 1 is the square torus
  std::vector<double> heights{1.0};
  heights.insert(heights.end(), v.pinch_heights.begin(), v.pinch_heights.end());
  const int outer = std::min<int>(resolve_threads(v.threads), static_cast<int>(heights.size()));
  const int inner = std::max(1, resolve_threads(v.threads) / outer);
  auto pts = parallel_map<PinchPoint>(heights.size(), outer, [&](std::size_t i) {
    return torus_curvature(heights[i], v.pinch_resolution, v, cal.sign, inner);
  });
  Table t{"pinching", {"height", "systole", "holomorphic_sectional", "symmetry_residual", "riemann_noise"}, {}};
  double sym = 0.0;
  std::vector<double> sys, mag;
  for (const auto& p : pts) {
    t.rows.push_back({p.height, p.systole, p.curvature, p.symmetry, p.noise});
    sym = std::max(sym, p.symmetry / std::max(p.noise, std::numeric_limits<double>::min()));
    if (p.height != 1.0) {
      sys.push_back(p.systole);
      mag.push_back(std::abs(p.curvature));
    }
  }
  out.metrics.push_back(assert_le("Kaehler symmetry / noise floor", sym, 10.0));
  out.metrics.push_back(report("square torus curvature", pts.front().curvature));
  out.metrics.push_back(assert_lt("square torus curvature", pts.front().curvature, 0.0));
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) worst = std::max(worst, p.curvature);
  out.metrics.push_back(assert_lt("max curvature over the family", worst, 0.0));
  PowerFit fit = fit_power(sys, mag);
  out.metrics.push_back(assert_in("pinching slope", fit.slope, -1.2, -0.8));
  out.metrics.push_back(report("pinching slope 95% low", fit.ci_low));
  out.metrics.push_back(report("pinching slope 95% high", fit.ci_high));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- 9. Rauch variation ----

CheckResult check_rauch(const ValidationSettings& v) {
  CheckResult out{9, "Rauch variation", {}, {}, {}};
  Table t{"rauch", {"tau_re", "tau_im", "case", "kappa_re", "kappa_im", "integral_abs"}, {}};
  std::vector<cplx> kappas;
  double oracle = 0.0;
  const int n = v.wp_resolution;
  for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 1.2), cplx(0.0, 2.0)}) {
    SurfacePtr s = model(SurfaceKind::PuncturedTorus, n, v, 0.5, tau);
    const HarmonicBasis hb = harmonic_basis(s);
    Section smooth = smooth_test_section(s, -2, v.seed + 50);
    smooth *= cplx(0.1 / valid_sup(smooth.values(), *s));
    const cplx k(0.05, -0.02);
    Section constant(s, -2, Field::Constant(s->size(), k));
    int idx = 0;
    for (const Section* mu : {&hb.basis.front(), static_cast<const Section*>(&smooth), static_cast<const Section*>(&constant)}) {
      RauchResult r = rauch_derivative(*mu);
      t.rows.push_back({tau.real(), tau.imag(), static_cast<double>(idx++), r.kappa.real(), r.kappa.imag(),
                        std::abs(r.integral)});
      kappas.push_back(r.kappa);
    }
    // affine map z + t k conj(z): tau'(t) = (tau + t k conj(tau)) / (1 + t k)
    const cplx exact = k * (std::conj(tau) - tau);
    oracle = std::max(oracle, std::abs(rauch_derivative(constant).derivative - exact) / std::abs(exact));
  }
  cplx mean = 0.0;
  for (cplx c : kappas) mean += c / static_cast<double>(kappas.size());
  double spread = 0.0;
  for (cplx c : kappas) spread = std::max(spread, std::abs(c - mean) / std::abs(mean));
  out.metrics.push_back(report("kappa real", mean.real()));
  out.metrics.push_back(report("kappa imag", mean.imag()));
  out.metrics.push_back(report("cases", static_cast<double>(kappas.size())));
  out.metrics.push_back(assert_lt("kappa spread", spread, 1e-4));
  out.metrics.push_back(assert_lt("affine closed form", oracle, 1e-6));
  out.tables.push_back(std::move(t));
  return out;
}


CheckResult run_check(int id, const ValidationSettings& v) {
  static const char* names[] = {"",
                                "operator identities",
                                "Green's operator",
                                "curvature solver",
                                "base metric",
                                "omega frame",
                                "norm comparison",
                                "WP metric",
                                "WP curvature",
                                "Rauch variation"};
  if (id < 1 || id > 9) throw DomainError("check id must be in 1..9");
  try {
    switch (id) {
      case 1: return check_operator_identities(v);
      case 2: return check_greens_operator(v);
      case 3: return check_curvature_solver(v);
      case 4: return check_base_metric(v);
      case 5: return check_omega_frame(v);
      case 6: return check_norm_comparison(v);
      case 7: return check_wp_metric(v);
      case 8: return check_wp_curvature(v);
      default: return check_rauch(v);
    }
  } catch (const std::exception& e) {
    CheckResult r{id, names[id], {}, {}, e.what()};
    return r;
  }
}

}  // namespace wplab
