#include "wplab/beltrami.hpp"

#include <Eigen/QR>
#include <cmath>
#include <deque>

namespace wplab {

namespace {

double flat_l2(const Field& f) { return std::sqrt(pairwise_sum(RField(f.abs2())) / static_cast<double>(f.size())); }

Field affine_points(const Grid& g, cplx b) {
  Field z(g.size());
  for (int k = 0; k < g.size(); ++k) z[k] = g.point(k) + b * std::conj(g.point(k));
  return z;
}

// d_mu u = u_z - conj(mu) u_zbar
Field d_mu(const Grid& g, const Field& mu, const Field& u) { return g.dz(u) - mu.conjugate() * g.dzbar(u); }

// d_mu log A, A = 1 / (1 - |mu|^2), from the jet
Field d_mu_log_A(const BeltramiJet& j) {
  const Field& m = j.mu.values();
  RField A = 1.0 / (1.0 - m.abs2());
  Field lz = A * (j.mu_z * m.conjugate() + m * j.mu_zbar.conjugate());
  Field lzb = A * (j.mu_zbar * m.conjugate() + m * j.mu_z.conjugate());
  return lz - m.conjugate() * lzb;
}

Section pullback_K_with(const Deformation& d, int r, const Section& eta, const Field& log_term) {
  if (eta.weight() != r) throw TypeError("pullback_K: section weight does not match r");
  const ModelSurface& m = eta.model();
  const Grid& g = eta.grid();
  const RField& lam = m.lambda();
  const RField h = d.h.values().real();
  // (f^* Lambda^mu)^{p/2} = lambda^p e^{p h}
  auto power = [&](int p) { return RField(lam.pow(p) * (p * h).exp()); };
  const Field& mu = d.mu().values();
  Field u = power(-r) * eta.values();
  Field out = d.A().sqrt() * (power(r - 1) * d_mu(g, mu, u) + (0.5 * r) * power(-1) * eta.values() * log_term);
  return Section(eta.surface(), r + 1, std::move(out));
}

}  // namespace

HarmonicBasis harmonic_basis(const SurfacePtr& surface) {
  if (surface->kind() != SurfaceKind::PuncturedTorus && surface->kind() != SurfaceKind::Collar)
    throw DomainError("harmonic basis is defined for the punctured torus and the collar");
  HarmonicBasis hb;
  Field q = Field::Ones(surface->size());
  Section mu(surface, -2, Field(surface->lambda().pow(-2).cast<cplx>() * q.conjugate()));
  mu *= 1.0 / std::sqrt(std::real(inner_product(mu, mu)));
  hb.basis.push_back(std::move(mu));
  hb.quadratic.push_back(std::move(q));
  return hb;
}

Section project_harmonic(const Section& nu, const std::vector<Section>& basis) {
  const int n = static_cast<int>(basis.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx gij = inner_product(basis[i], basis[j]);
      if (std::abs(gij - (i == j ? 1.0 : 0.0)) > 1e-6)
        throw PreconditionError("project_harmonic: basis is not orthonormal");
    }
  Section out = Section::zero(nu.surface(), nu.weight());
  for (const auto& b : basis) out += inner_product(nu, b) * b;
  return out;
}

Section project_harmonic(const Section& nu, const HarmonicBasis& basis) { return project_harmonic(nu, basis.basis); }

QCMap solve_beltrami(const Section& mu, double tol) {
  if (mu.weight() != -2) throw TypeError("Beltrami coefficients have weight -2");
  const SurfacePtr& s = mu.surface();
  if (s->kind() != SurfaceKind::PuncturedTorus) throw DomainError("solve_beltrami needs the torus chart");
  const double mu_sup = mu.values().abs().maxCoeff();
  if (mu_sup >= 1.0) throw DomainError("Beltrami coefficient must have sup norm < 1");
  if (mu_sup >= kMaxBeltramiNorm) throw DomainError("Beltrami coefficient too large for the solver");

  const Grid& g = s->grid();
  const int n = g.size();
  const Field& sz = g.dz_symbol();
  const Field& szb = g.dzbar_symbol();
  Field T(n);
  for (int k = 0; k < n; ++k) T[k] = std::abs(szb[k]) > 0 ? sz[k] / szb[k] : cplx{};
  const Field& m = mu.values();
  auto step = [&](const Field& phi) { return Field(g.ifft2(T * g.fft2(m * (1.0 + phi)))); };

  QCMap map(mu);
  SolveReport& rep = map.report_;
  rep.stage = "beltrami";
  rep.n0 = g.n0();
  rep.n1 = g.n1();
  Field phi = Field::Zero(n);
  const int max_iter = 2000, depth = 5;
  std::deque<Field> dx, dr;
  Field prev_x, prev_r;
  bool mixing = false;
  int slow = 0;
  for (int it = 1;; ++it) {
    Field res = step(phi) - phi;
    double inc = res.abs().maxCoeff();
    rep.history.push_back(inc);
    rep.iterations = it;
    if (inc < tol) break;
    if (it >= max_iter) throw SolverError("beltrami", "fixed point did not converge", rep.history);
    if (rep.history.size() >= 2 && inc > 0.95 * rep.history[rep.history.size() - 2]) {
      if (++slow >= 5) mixing = true;
    } else {
      slow = 0;
    }
    if (it > 200 && inc > rep.history.front()) throw SolverError("beltrami", "fixed point is not contracting", rep.history);
    Field next = phi + res;
    if (mixing) {
      if (prev_x.size()) {
        dx.push_back(phi - prev_x);
        dr.push_back(res - prev_r);
        if (static_cast<int>(dx.size()) > depth) {
          dx.pop_front();
          dr.pop_front();
        }
      }
      if (!dr.empty()) {
        Eigen::MatrixXcd R(n, dr.size()), X(n, dx.size());
        for (std::size_t c = 0; c < dr.size(); ++c) {
          R.col(c) = dr[c].matrix();
          X.col(c) = dx[c].matrix();
        }
        Eigen::VectorXcd gam = R.colPivHouseholderQr().solve(res.matrix());
        next = (phi.matrix() + res.matrix() - (X + R) * gam).array();
      }
      prev_x = phi;
      prev_r = res;
    }
    phi = next;
  }
  map.b_ = (m * (1.0 + phi)).mean();
  Field ph = g.fft2(phi);
  Field vh(n);
  for (int k = 0; k < n; ++k) vh[k] = std::abs(sz[k]) > 0 ? ph[k] / sz[k] : cplx{};
  map.v_ = g.ifft2(vh);
  map.fz_ = 1.0 + phi;
  map.fzbar_ = map.b_ + g.ifft2(szb * vh);
  map.fzz_ = g.ifft2(sz * ph);
  map.fzzbar_ = g.ifft2(szb * ph);
  const cplx tau = s->params().tau;
  map.tau_image_ = (tau + map.b_ * std::conj(tau)) / (1.0 + map.b_);
  Field defect = map.fzbar_ - m * map.fz_;
  rep.residual_sup = defect.abs().maxCoeff();
  rep.residual_l2 = flat_l2(defect) / flat_l2(map.fz_);
  rep.extra["anderson"] = mixing ? 1.0 : 0.0;
  if ((map.jacobian() <= 0).any()) throw SolverError("beltrami", "map is not orientation preserving");
  return map;
}

QCMap affine_qcmap(const SurfacePtr& surface, cplx k) {
  if (std::abs(k) >= kMaxBeltramiNorm) throw DomainError("Beltrami coefficient too large for the solver");
  const Grid& g = surface->grid();
  const int n = g.size();
  cplx e1 = g.e1();
  cplx c = 1.0 + k * std::conj(e1) / e1;
  QCMap map(Section(surface, -2, Field::Constant(n, k)));
  map.fz_ = Field::Constant(n, 1.0 / c);
  map.fzbar_ = Field::Constant(n, k / c);
  map.fzz_ = Field::Zero(n);
  map.fzzbar_ = Field::Zero(n);
  map.v_ = Field::Zero(n);
  map.b_ = k;
  if (surface->kind() == SurfaceKind::PuncturedTorus) {
    cplx tau = surface->params().tau;
    map.tau_image_ = (tau + k * std::conj(tau)) / (1.0 + k);
  }
  map.scale_ = 1.0 / c;
  map.report_.stage = "beltrami";
  return map;
}

Field QCMap::image_points() const { return scale_ * affine_points(mu_.grid(), b_) + v_; }

ImageSection push_L(const Section& nu, const QCMap& map) {
  if (nu.weight() != -2) throw TypeError("push_L acts on weight -2 sections");
  const Field& fz = map.f_z();
  if ((map.jacobian() <= 0).any()) throw SolverError("push_L", "non-invertible Jacobian at a node");
  RField A = 1.0 / (1.0 - map.mu().values().abs2());
  ImageSection out;
  out.weight = -2;
  out.points = map.image_points();
  out.values = nu.values() * A * fz / fz.conjugate();
  return out;
}

Section pullback(const ImageSection& eta, const QCMap& map, const SurfacePtr& base) {
  Field phase = map.f_z() / map.f_z().abs();
  return Section(base, eta.weight, Field(eta.values * phase.pow(eta.weight)));
}

RField Deformation::pulled_density() const {
  return (2.0 * h.values().real()).exp() * h.model().lambda().square();
}

Deformation deform(const Section& mu, bool harmonic, const CurvatureOptions& opt) {
  Deformation d{harmonic ? harmonic_jet(mu) : numeric_jet(mu), std::nullopt, Section::zero(mu.surface(), 0), {}};
  if (mu.values().abs().maxCoeff() >= kMaxBeltramiNorm) throw DomainError("Beltrami coefficient too large");
  if (mu.model().kind() == SurfaceKind::PuncturedTorus) d.map = solve_beltrami(mu);
  DeformedOperators ops(d.jet);
  auto [h, rep] = solve_prescribed_curvature(ops, opt);
  d.h = std::move(h);
  d.curvature_report = std::move(rep);
  return d;
}

Section pullback_K(const Deformation& d, int r, const Section& eta) {
  if (!d.map) return pullback_K_identity(d, r, eta);
  const QCMap& f = *d.map;
  const Field& mu = d.mu().values();
  Field fzc = f.f_z().conjugate();
  Field dconj = f.f_zzbar().conjugate() - mu.conjugate() * f.f_zz().conjugate();
  Field log_term = 2.0 * dconj / fzc - d_mu_log_A(d.jet);
  return pullback_K_with(d, r, eta, log_term);
}

Section pullback_K_identity(const Deformation& d, int r, const Section& eta) {
  Field log_term = 2.0 * d.jet.mu_z.conjugate() - d_mu_log_A(d.jet);
  return pullback_K_with(d, r, eta, log_term);
}

FrameResult omega_frame(const Deformation& d, const HarmonicBasis& basis, double tol, int max_iterations) {
  FrameResult out;
  SolveReport& rep = out.report;
  rep.stage = "omega_frame";
  const RField A = d.A();
  auto residual = [&](const Section& w) {
    return pullback_K(d, -2, Section(w.surface(), -2, Field(A * w.values())));
  };
  for (int j = 0; j < basis.dimension(); ++j) {
    Section w = basis.basis[j];
    Section res = residual(w);
    double rn = l2_norm(res);
    std::vector<double> hist{rn};
    int it = 0;
    while (rn >= tol) {
      if (++it > max_iterations) throw SolverError("omega_frame", "frame iteration did not converge", hist);
      // inexact Newton: the correction only needs to beat the next outer contraction
      Section corr = k2_potential_solve(res, basis.basis, nullptr, 1e-5);
      Section trial = w - corr;
      Section tres = residual(trial);
      double tn = l2_norm(tres);
      if (!(tn < rn)) {
        // stagnation at the discretization floor
        if (tn < 1e3 * tol) break;
        throw SolverError("omega_frame", "frame iteration diverged", hist);
      }
      w = std::move(trial);
      res = std::move(tres);
      rn = tn;
      hist.push_back(rn);
      if (hist.size() >= 3 && rn > 0.9 * hist[hist.size() - 2] && rn < 1e3 * tol) break;
    }
    double orth = 0.0;
    for (int k = 0; k < basis.dimension(); ++k)
      orth = std::max(orth, std::abs(inner_product(w, basis.basis[k]) - (j == k ? 1.0 : 0.0)));
    out.orthogonality_residual.push_back(orth);
    out.harmonicity_residual.push_back(rn);
    rep.iterations = std::max(rep.iterations, static_cast<int>(hist.size()));
    rep.history.insert(rep.history.end(), hist.begin(), hist.end());
    out.omega.push_back(std::move(w));
  }
  rep.residual_l2 = *std::max_element(out.harmonicity_residual.begin(), out.harmonicity_residual.end());
  rep.residual_sup = *std::max_element(out.orthogonality_residual.begin(), out.orthogonality_residual.end());
  rep.n0 = d.mu().grid().n0();
  rep.n1 = d.mu().grid().n1();
  return out;
}

}  // namespace wplab
