#include "wplab/linsolve.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace wplab {

using SpMat = Eigen::SparseMatrix<cplx>;

DivergenceOperator DivergenceOperator::zeros(SurfacePtr s) {
  const int n = s->size();
  DivergenceOperator op;
  op.surface = std::move(s);
  op.a = RField::Zero(n);
  op.a2 = RField::Zero(n);
  op.v = RField::Zero(n);
  op.b = Field::Zero(n);
  return op;
}

Field DivergenceOperator::apply(const Field& u) const {
  const Grid& g = surface->grid();
  const Flavor fl = Flavor::Adjoint;
  Field uz = g.dz(u, fl), uzb = g.dzbar(u, fl);
  Field out = g.dzbar(a * uz + b * uzb, fl) + g.dz(a2 * uzb + b.conjugate() * uz, fl) + v * u;
  return out * solve_domain(g);
}

RField solve_domain(const Grid& g) {
  RField d = RField::Ones(g.size());
  if (!g.axis0().periodic)
    for (int j = 0; j < g.n1(); ++j) {
      d[g.index(0, j)] = 0.0;
      d[g.index(g.n0() - 1, j)] = 0.0;
    }
  return d;
}

struct DivergenceSolver::ModeFactors {
  std::vector<std::unique_ptr<Eigen::SparseLU<SpMat>>> lu;
};

DivergenceSolver::~DivergenceSolver() = default;
DivergenceSolver::DivergenceSolver(DivergenceSolver&&) noexcept = default;
DivergenceSolver& DivergenceSolver::operator=(DivergenceSolver&&) noexcept = default;

DivergenceSolver::DivergenceSolver(DivergenceOperator op) : op_(std::move(op)) {
  const Grid& g = op_.surface->grid();
  domain_ = solve_domain(g);
  const int n0 = g.n0(), n1 = g.n1();
  if (g.axis0().periodic && g.axis1().periodic) {
    const double am = op_.a.mean(), a2m = op_.a2.mean(), vm = op_.v.mean();
    const cplx bm = op_.b.mean();
    const Field& s = g.dz_symbol();
    const Field& sb = g.dzbar_symbol();
    symbol_ = sb * am * s + s * a2m * sb + sb * bm * sb + s * std::conj(bm) * s + vm;
    singular_ = op_.v.abs().maxCoeff() == 0.0;
    return;
  }
  if (g.axis0().periodic || !g.axis1().periodic) throw PreconditionError("unsupported grid topology for the solver");
  // axis-1 averages of the coefficients along each axis-0 line
  const int m = n0 - 2;
  std::vector<double> am(n0), a2m(n0), vm(n0);
  std::vector<cplx> bm(n0);
  for (int i = 0; i < n0; ++i) {
    double sa = 0, sa2 = 0, sv = 0;
    cplx sbm = 0;
    for (int j = 0; j < n1; ++j) {
      int k = g.index(i, j);
      sa += op_.a[k];
      sa2 += op_.a2[k];
      sv += op_.v[k];
      sbm += op_.b[k];
    }
    am[i] = sa / n1;
    a2m[i] = sa2 / n1;
    vm[i] = sv / n1;
    bm[i] = sbm / static_cast<double>(n1);
  }
  const Axis& ax = g.axis0();
  // axis-0 derivative from the interior unknowns (nodes 1..n0-2) to every node, and its
  // restriction to interior rows for the outer derivative
  SpMat d_in(n0, m), embed(n0, m), restrict(m, n0);
  {
    std::vector<Eigen::Triplet<cplx>> t, e, r;
    for (int i = 0; i < n0; ++i)
      for (auto [col, w] : sbp_stencil(n0, i))
        if (col >= 1 && col <= n0 - 2) t.emplace_back(i, col - 1, w / (ax.h * ax.jac[i]));
    for (int i = 1; i <= n0 - 2; ++i) {
      e.emplace_back(i, i - 1, 1.0);
      r.emplace_back(i - 1, i, 1.0);
    }
    d_in.setFromTriplets(t.begin(), t.end());
    embed.setFromTriplets(e.begin(), e.end());
    restrict.setFromTriplets(r.begin(), r.end());
  }
  SpMat d_out(m, n0);
  {
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 1; i <= n0 - 2; ++i)
      for (auto [col, w] : sbp_stencil(n0, i)) t.emplace_back(i - 1, col, w / (ax.h * ax.jac[i]));
    d_out.setFromTriplets(t.begin(), t.end());
  }
  auto diag = [&](const auto& vals) {
    SpMat d(n0, n0);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < n0; ++i) t.emplace_back(i, i, cplx(vals[i]));
    d.setFromTriplets(t.begin(), t.end());
    return d;
  };
  SpMat A = diag(am), A2 = diag(a2m), B = diag(bm);
  SpMat V = restrict * diag(vm) * embed;
  std::vector<cplx> bc(n0);
  for (int i = 0; i < n0; ++i) bc[i] = std::conj(bm[i]);
  SpMat Bc = diag(bc);
  const cplx e0 = g.e0(), e1 = g.e1();
  const cplx delta = e0 * std::conj(e1) - std::conj(e0) * e1;
  modes_ = std::make_unique<ModeFactors>();
  modes_->lu.resize(static_cast<std::size_t>(n1));
  for (int k = 0; k < n1; ++k) {
    const cplx ik = kI * g.wavenumber1(k);
    SpMat dz_in = (std::conj(e1) * d_in - std::conj(e0) * ik * embed) / delta;
    SpMat dzb_in = (e0 * ik * embed - e1 * d_in) / delta;
    SpMat dz_out = (std::conj(e1) * d_out - std::conj(e0) * ik * SpMat(restrict)) / delta;
    SpMat dzb_out = (e0 * ik * SpMat(restrict) - e1 * d_out) / delta;
    SpMat opk = dzb_out * A * dz_in + dz_out * A2 * dzb_in + dzb_out * B * dzb_in + dz_out * Bc * dz_in + V;
    SpMat neg = -opk;
    neg.makeCompressed();
    auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu->compute(neg);
    if (lu->info() != Eigen::Success) throw SolverError("linear", "mode factorization failed");
    modes_->lu[k] = std::move(lu);
  }
}

Field DivergenceSolver::precondition(const Field& r) const {
  const Grid& g = op_.surface->grid();
  if (!modes_) {
    Field rh = g.fft2(r);
    for (int k = 0; k < rh.size(); ++k) {
      double s = -std::real(symbol_[k]);
      rh[k] = s > 1e-300 ? rh[k] / s : cplx{};
    }
    return g.ifft2(rh);
  }
  const int n0 = g.n0(), n1 = g.n1(), m = n0 - 2;
  Field rh = g.fft_axis1(r);
  Eigen::VectorXcd col(m);
  for (int k = 0; k < n1; ++k) {
    for (int i = 1; i <= n0 - 2; ++i) col[i - 1] = rh[g.index(i, k)];
    Eigen::VectorXcd x = modes_->lu[k]->solve(col);
    for (int i = 1; i <= n0 - 2; ++i) rh[g.index(i, k)] = x[i - 1];
    rh[g.index(0, k)] = 0.0;
    rh[g.index(n0 - 1, k)] = 0.0;
  }
  return g.ifft_axis1(rh) * domain_;
}

Field DivergenceSolver::solve(const Field& rhs_in, double rel_tol, int max_iter, LinearSolveInfo* info) const {
  const RField w = op_.surface->grid().area_weights() * domain_;
  auto dot = [&](const Field& x, const Field& y) { return std::real(pairwise_sum(Field(w * x.conjugate() * y))); };
  // solve (-Op) x = -rhs
  Field b = -(rhs_in * domain_);
  if (!modes_ && singular_) {
    // singular on the doubly periodic grid: keep the rhs in the range
    const Grid& g = op_.surface->grid();
    Field bh = g.fft2(b);
    const Field& sz = g.dz_symbol();
    const Field& szb = g.dzbar_symbol();
    for (int k = 0; k < bh.size(); ++k)
      if (sz[k] == 0.0 && szb[k] == 0.0) bh[k] = 0.0;
    b = g.ifft2(bh);
  }
  const double bnorm = std::sqrt(dot(b, b));
  Field x = Field::Zero(b.size());
  if (info) *info = {};
  if (bnorm == 0.0) return x;
  Field r = b;
  Field z = precondition(r);
  Field p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    Field ap = -op_.apply(p);
    double pap = dot(p, ap);
    if (!(pap > 0)) throw SolverError("linear", "operator is not negative definite on the search direction");
    double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    double rel = std::sqrt(dot(r, r)) / bnorm;
    if (info) *info = {it, rel};
    if (rel < rel_tol) return x;
    z = precondition(r);
    double rz_new = dot(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError("linear", "conjugate gradients did not reach the tolerance",
                    {info ? info->relative_residual : 0.0});
}

}  // namespace wplab
