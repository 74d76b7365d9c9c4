#include "wplab/elliptic.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/LU>

namespace wplab {

namespace {

struct GreensForm {
  DivergenceOperator op;
  int unknown_power;  // u = lambda^p f
  int output_power;   // (D_r - 2) f = lambda^q Op(u)
};

GreensForm greens_form(int r, const SurfacePtr& s) {
  if (r < -1 || r > 1) throw PreconditionError("Green's operator is exposed for r in {-1, 0, 1} only");
  GreensForm gf{DivergenceOperator::zeros(s), 0, 0};
  const RField& lam = s->lambda();
  if (r <= 0) {
    gf.op.a = 4.0 * lam.pow(2 * r);
    gf.op.v = static_cast<double>(r * (r + 1) - 2) * lam.pow(2 * r + 2);
    gf.unknown_power = -r;
    gf.output_power = -r - 2;
  } else {
    gf.op.a2 = 4.0 * lam.pow(-2 * r);
    gf.op.v = static_cast<double>(r * (r - 1) - 2) * lam.pow(2 - 2 * r);
    gf.unknown_power = r;
    gf.output_power = r - 2;
  }
  return gf;
}

// (D_-1 - 2) = 4 K_-2 L_-1 in the factored order, u = lambda^-1 F, g = lambda^-3 dz(4 lambda^2 dbar u)
constexpr int kPotentialForm = 99;

GreensForm form_for(int r, const SurfacePtr& s) {
  if (r != kPotentialForm) return greens_form(r, s);
  GreensForm gf{DivergenceOperator::zeros(s), 0, 0};
  gf.op.a2 = 4.0 * s->lambda().square();
  gf.unknown_power = -1;
  gf.output_power = -3;
  return gf;
}

std::shared_ptr<const DivergenceSolver> cached_greens_solver(const SurfacePtr& s, int r) {
  static std::mutex mtx;
  static std::map<std::pair<const ModelSurface*, int>,
                  std::pair<std::weak_ptr<const ModelSurface>, std::shared_ptr<const DivergenceSolver>>>
      cache;
  std::lock_guard<std::mutex> lock(mtx);
  for (auto it = cache.begin(); it != cache.end();)
    it = it->second.first.expired() ? cache.erase(it) : std::next(it);
  auto key = std::make_pair(s.get(), r);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.second;
  auto solver = std::make_shared<const DivergenceSolver>(form_for(r, s).op);
  cache[key] = {s, solver};
  return solver;
}

double weighted_l2(const ModelSurface& m, const Field& f, const RField& mask) {
  return std::sqrt(pairwise_sum(RField(f.abs2() * m.hyperbolic_weights() * mask)));
}

double masked_sup(const Field& f, const RField& mask) { return (f.abs() * mask).maxCoeff(); }

}  // namespace

Section greens_operator(int r, const Section& f) {
  if (f.weight() != r) throw TypeError("greens_operator: section weight differs from r");
  const SurfacePtr& s = f.surface();
  GreensForm gf = greens_form(r, s);
  const RField& lam = s->lambda();
  Field u = f.values() * lam.pow(gf.unknown_power);
  return Section(s, r, gf.op.apply(u) * lam.pow(gf.output_power));
}

Section greens_apply(int r, const Section& g, SolveReport* report) {
  if (g.weight() != r) throw TypeError("greens_apply: section weight differs from r");
  const SurfacePtr& s = g.surface();
  GreensForm gf = greens_form(r, s);
  auto solver = cached_greens_solver(s, r);
  const RField& lam = s->lambda();
  Field rhs = g.values() * lam.pow(-gf.output_power);
  LinearSolveInfo info;
  Field u = solver->solve(rhs, 1e-13, 5000, &info);
  Section f(s, r, u * lam.pow(-gf.unknown_power));
  if (report) {
    RField dom = solve_domain(s->grid());
    Field res = greens_operator(r, f).values() - g.values() * dom;
    report->stage = "greens";
    report->linear_iterations = info.iterations;
    report->iterations = 1;
    double gn = weighted_l2(*s, g.values(), dom);
    report->residual_l2 = gn > 0 ? weighted_l2(*s, res, dom) / gn : 0.0;
    report->residual_sup = masked_sup(res, s->valid());
    report->n0 = s->grid().n0();
    report->n1 = s->grid().n1();
    report->truncation = s->truncation_summary();
    report->excluded_area = s->excluded_area();
  }
  return f;
}

Section k2_potential_solve(const Section& g, const std::vector<Section>& harmonic, SolveReport* report,
                           double rel_tol) {
  if (g.weight() != -1) throw TypeError("k2_potential_solve needs a weight -1 section");
  const SurfacePtr& s = g.surface();
  GreensForm gf = form_for(kPotentialForm, s);
  auto solver = cached_greens_solver(s, kPotentialForm);
  const RField& lam = s->lambda();
  LinearSolveInfo info;
  Field u = solver->solve(Field(g.values() * lam.pow(-gf.output_power)), rel_tol, 5000, &info);
  // f = 4 L_-1 F with F = lambda u, in the solver's derivative flavor
  Section f(s, -2, 4.0 * s->grid().dzbar(u, Flavor::Adjoint));
  for (const auto& m : harmonic) f -= inner_product(f, m) * m;
  if (report) {
    report->stage = "k2_potential";
    report->linear_iterations = info.iterations;
    report->iterations = 1;
    Field res = k_derivative(f).values() - g.values();
    report->residual_sup = masked_sup(res, s->valid());
    double gn = weighted_l2(*s, g.values(), s->valid());
    report->residual_l2 = gn > 0 ? weighted_l2(*s, res, s->valid()) / gn : 0.0;
    report->n0 = s->grid().n0();
    report->n1 = s->grid().n1();
  }
  return f;
}

BeltramiJet numeric_jet(const Section& mu) {
  if (mu.weight() != -2) throw TypeError("Beltrami differentials have weight -2");
  const Grid& g = mu.grid();
  Field mz = g.dz(mu.values());
  return {mu, mz, g.dzbar(mu.values()), g.dz(mz)};
}

BeltramiJet harmonic_jet(const Section& mu) {
  if (mu.weight() != -2) throw TypeError("Beltrami differentials have weight -2");
  const ModelSurface& m = mu.model();
  const Grid& g = mu.grid();
  const Field& pz = m.phi_z();
  Field qbar = mu.values() * m.lambda().square();
  Field mz = -2.0 * pz * mu.values();
  Field mzb = -2.0 * pz.conjugate() * mu.values() + g.dzbar(qbar) / m.lambda().square();
  Field mzz = mu.values() * (4.0 * pz.square() - 2.0 * m.phi_zz());
  return {mu, mz, mzb, mzz};
}

DeformedOperators::DeformedOperators(BeltramiJet jet) : jet_(std::move(jet)) {
  const Field& mu = jet_.mu.values();
  const RField m2 = mu.abs2();
  if (m2.maxCoeff() >= 1.0) throw DomainError("Beltrami differential must satisfy sup |mu| < 1");
  A_ = 1.0 / (1.0 - m2);
  const RField A2 = A_.square();
  A_z_ = A2 * (jet_.mu_z * mu.conjugate() + mu * jet_.mu_zbar.conjugate());
  A_zbar_ = A2 * (jet_.mu_zbar * mu.conjugate() + mu * jet_.mu_z.conjugate());

  const ModelSurface& s = jet_.mu.model();
  const Grid& g = s.grid();
  RField d_phi = apply_expanded(s.phi_z(), s.phi_zz(), s.phi_zzbar());
  RField d_logA = apply_expanded(RField(A_.log()));
  Field x = mu.conjugate() * jet_.mu_z * A_;
  Field conj_d_x = g.dzbar(x) - mu * g.dz(x);
  Field inner = -conj_d_x + mu.conjugate() * jet_.mu_z.square() * A_ + jet_.mu_zz;
  c_star_ = -0.5 * (2.0 * d_phi + d_logA) + 4.0 * inner.real() / s.lambda().square();
}

RField DeformedOperators::apply_expanded(const Field& g_z, const Field& g_zz, const RField& g_zzbar) const {
  const Field& mu = jet_.mu.values();
  const ModelSurface& s = jet_.mu.model();
  Field B = A_zbar_ - mu * A_z_ - A_ * jet_.mu_z;
  RField principal = (1.0 + mu.abs2()) * A_ * g_zzbar;
  RField first = 2.0 * (B * g_z - A_ * mu * g_zz).real();
  return 4.0 * (principal + first) / s.lambda().square();
}

RField DeformedOperators::apply_expanded(const RField& g) const {
  const Grid& grid = jet_.mu.grid();
  Field gc = g.cast<cplx>();
  Field gz = grid.dz(gc);
  return apply_expanded(gz, grid.dz(gz), grid.dzbar(gz).real());
}

DivergenceOperator DeformedOperators::divergence_operator() const {
  DivergenceOperator op = DivergenceOperator::zeros(surface());
  const Field& mu = jet_.mu.values();
  RField c = (1.0 + mu.abs2()) * A_;
  op.a = 2.0 * c;
  op.a2 = 2.0 * c;
  op.b = -4.0 * A_ * mu.conjugate();
  return op;
}

RField DeformedOperators::apply(const RField& g) const {
  DivergenceOperator op = divergence_operator();
  return op.apply(g.cast<cplx>()).real() / surface()->lambda().square();
}

DeformedOperators assemble_deformed_operators(const BeltramiJet& jet) { return DeformedOperators(jet); }

std::pair<Section, SolveReport> solve_prescribed_curvature(const DeformedOperators& ops, const CurvatureOptions& opt) {
  const SurfacePtr& s = ops.surface();
  const Grid& g = s->grid();
  const RField dom = solve_domain(g);
  const RField& valid = s->valid();
  const RField& cs = ops.curvature();
  if ((valid > 0).select(cs, -1.0).maxCoeff() >= 0.0) throw PreconditionError("deformed curvature C_* is not strictly negative");
  const RField lam2 = s->lambda().square();
  const double c = opt.boundary_value;
  const DivergenceOperator base = ops.divergence_operator();

  RField u = RField::Zero(g.size());
  auto residual = [&](const RField& uu) {
    RField du = base.apply(uu.cast<cplx>()).real() / lam2;
    return RField((du - cs - (2.0 * (c + uu)).exp()) * dom);
  };
  SolveReport rep;
  rep.stage = "prescribed_curvature";
  RField F = residual(u);
  double sup = F.abs().maxCoeff();
  rep.history.push_back(sup);
  int it = 1;
  for (; sup >= opt.tol; ++it) {
    if (it > opt.max_iterations) throw SolverError("prescribed_curvature", "Newton did not converge", rep.history);
    DivergenceOperator jac = base;
    jac.v = -2.0 * (2.0 * (c + u)).exp() * lam2;
    DivergenceSolver solver(jac);
    LinearSolveInfo info;
    RField delta = solver.solve((-lam2 * F).cast<cplx>(), 1e-13, 5000, &info).real();
    rep.linear_iterations += info.iterations;
    double step = 1.0;
    RField trial;
    double tsup = 0;
    for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
      trial = u + step * delta;
      RField tf = residual(trial);
      tsup = tf.abs().maxCoeff();
      if (tsup < sup || ls == 11) {
        F = tf;
        break;
      }
    }
    u = trial;
    sup = tsup;
    rep.history.push_back(sup);
  }
  rep.iterations = it;
  rep.residual_sup = (F.abs() * valid).maxCoeff();
  rep.residual_l2 = std::sqrt(pairwise_sum(RField(F.square() * s->hyperbolic_weights() * valid)));
  rep.n0 = g.n0();
  rep.n1 = g.n1();
  rep.truncation = s->truncation_summary();
  rep.excluded_area = s->excluded_area();
  Section h(s, 0, (c + u).cast<cplx>());
  return {std::move(h), std::move(rep)};
}

RField brioschi_curvature(const Section& mu, const Section& h) {
  const ModelSurface& s = mu.model();
  const Grid& g = s.grid();
  const Field& m = mu.values();
  RField rho = (2.0 * h.values().real()).exp() * s.lambda().square() / (1.0 - m.abs2());
  Field a = g.e0() + m * std::conj(g.e0());
  Field b = g.e1() + m * std::conj(g.e1());
  RField E = rho * a.abs2(), F = rho * (a * b.conjugate()).real(), G = rho * b.abs2();
  auto d0 = [&](const RField& f) { return RField(g.d0(f.cast<cplx>()).real()); };
  auto d1 = [&](const RField& f) { return RField(g.d1(f.cast<cplx>()).real()); };
  RField Eu = d0(E), Ev = d1(E), Fu = d0(F), Fv = d1(F), Gu = d0(G), Gv = d1(G);
  RField Evv = d1(Ev), Fuv = d1(Fu), Guu = d0(Gu);
  RField K(g.size());
  for (int k = 0; k < g.size(); ++k) {
    Eigen::Matrix3d m1, m2;
    m1 << -0.5 * Evv[k] + Fuv[k] - 0.5 * Guu[k], 0.5 * Eu[k], Fu[k] - 0.5 * Ev[k], Fv[k] - 0.5 * Gu[k], E[k], F[k],
        0.5 * Gv[k], F[k], G[k];
    m2 << 0.0, 0.5 * Ev[k], 0.5 * Gu[k], 0.5 * Ev[k], E[k], F[k], 0.5 * Gu[k], F[k], G[k];
    double det = E[k] * G[k] - F[k] * F[k];
    K[k] = (m1.determinant() - m2.determinant()) / (det * det);
  }
  return K;
}

TorusMetric base_metric_solve(const Grid& grid, cplx tau, const Truncation& trunc) {
  TorusMetric tm;
  CuspReference& ref = tm.reference;
  ref.puncture = 0.5 * grid.axis0().h * grid.e0() + 0.5 * grid.axis1().h * grid.e1();
  double shortest = std::min({1.0, std::abs(tau), std::abs(tau - 1.0), std::abs(tau + 1.0)});
  ref.r0 = std::min(0.25, trunc.partition_fraction * shortest);
  ref.tau = tau;
  ref.scale = 0.0;
  const int n = grid.size();
  RField w = RField::Zero(n);
  const int cell[4] = {grid.index(0, 0), grid.index(1, 0), grid.index(0, 1), grid.index(1, 1)};
  auto cmean = [&](const RField& f) { return 0.25 * (f[cell[0]] + f[cell[1]] + f[cell[2]] + f[cell[3]]); };
  const Field& s = grid.dz_symbol();
  const Field& sb = grid.dzbar_symbol();
  const RField lap_sym = (4.0 * sb * s).real();
  auto lap = [&](const RField& f) { return RField(grid.ifft2(grid.fft2(f.cast<cplx>()) * lap_sym).real()); };
  const RField& aw = grid.area_weights();
  auto dot = [&](const RField& x, const RField& y) { return pairwise_sum(RField(aw * x * y)); };

  auto eval = [&](const RField& ww, const ReferenceFields& rf, RField& E) {
    E = (2.0 * (rf.value + ww)).exp();
    return RField(lap(ww) + rf.laplacian - E);
  };
  // PCG for (2E - lap) x = rhs with the Fourier preconditioner of the mean coefficient
  auto pcg = [&](const RField& E, const RField& rhs, int& iters) {
    const double em = 2.0 * E.mean();
    auto apply = [&](const RField& x) { return RField(2.0 * E * x - lap(x)); };
    auto prec = [&](const RField& r) {
      Field rh = grid.fft2(r.cast<cplx>());
      for (int k = 0; k < n; ++k) rh[k] /= (em - lap_sym[k]);
      return RField(grid.ifft2(rh).real());
    };
    RField x = RField::Zero(n), r = rhs, z = prec(r), p = z;
    double rz = dot(r, z), bn = std::sqrt(dot(rhs, rhs));
    if (bn == 0) return x;
    for (int it = 1; it <= 20000; ++it) {
      RField ap = apply(p);
      double alpha = rz / dot(p, ap);
      x += alpha * p;
      r -= alpha * ap;
      ++iters;
      if (std::sqrt(dot(r, r)) < 1e-12 * bn) return x;
      z = prec(r);
      double rzn = dot(r, z);
      p = z + (rzn / rz) * p;
      rz = rzn;
    }
    throw SolverError("base_metric", "conjugate gradients stalled");
  };

  SolveReport& rep = tm.report;
  rep.stage = "base_metric";
  ReferenceFields rf = evaluate_reference(grid, tau, ref);
  RField E;
  RField F = eval(w, rf, E);
  auto curv_sup = [&](const RField& FF, const RField& EE) { return (FF / EE).abs().maxCoeff(); };
  double sup = curv_sup(F, E);
  rep.history.push_back(sup);
  int it = 1, lin = 0;
  const double b_floor = std::log(ref.r0) + 0.3;
  // A step that no longer reduces the residual below a thousand times the tolerance is round-off stagnation.
  auto done = [&] {
    const auto& h = rep.history;
    if (sup < trunc.newton_tol) return true;
    return h.size() >= 2 && sup < 1e3 * trunc.newton_tol && sup > 0.9 * h[h.size() - 2];
  };
  for (; !done(); ++it) {
    if (it > trunc.max_newton) throw SolverError("base_metric", "Newton did not converge", rep.history);
    RField jb = rf.scale_laplacian - 2.0 * E * rf.scale_value;
    // J_w = lap - 2E; solve J_w x1 = -F, J_w x2 = -jb
    RField x1 = pcg(E, F, lin);
    RField x2 = pcg(E, jb, lin);
    double db = -(cmean(w) + cmean(x1)) / cmean(x2);
    double step = 1.0;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      CuspReference trial_ref = ref;
      trial_ref.scale = ref.scale + step * db;
      if (trial_ref.scale < b_floor) continue;
      RField tw = w + step * (x1 + db * x2);
      ReferenceFields trf = evaluate_reference(grid, tau, trial_ref);
      RField tE;
      RField tF = eval(tw, trf, tE);
      double tsup = curv_sup(tF, tE);
      if (tsup < sup || ls == 29) {
        ref = trial_ref;
        w = tw;
        rf = std::move(trf);
        E = tE;
        F = tF;
        sup = tsup;
        break;
      }
    }
    rep.history.push_back(sup);
  }
  rep.iterations = it;
  rep.linear_iterations = lin;
  rep.residual_sup = sup;
  rep.residual_l2 = std::sqrt(dot(RField((F / E).square() * E), RField::Ones(n)));
  rep.n0 = grid.n0();
  rep.n1 = grid.n1();
  rep.extra["cusp_scale"] = ref.scale;
  rep.extra["partition_radius"] = ref.r0;
  rep.extra["puncture_cell_mean_correction"] = cmean(w);
  tm.correction = w;
  return tm;
}

}  // namespace wplab
