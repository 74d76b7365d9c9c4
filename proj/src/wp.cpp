#include "wplab/wp.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "wplab/parallel.hpp"

namespace wplab {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WPLAB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace {

cplx deformed_pairing(const Field& a, const Field& b, const RField& weight) {
  return pairwise_sum(Field(a * b.conjugate() * weight));
}

std::vector<double> chart_key(const ChartPoint& t) {
  std::vector<double> k;
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    k.push_back(t[j].real());
    k.push_back(t[j].imag());
  }
  return k;
}

// 1-D central stencils for the p-th derivative on offsets -2..2, unit spacing.
const std::map<int, double>& stencil(int p) {
  static const std::vector<std::map<int, double>> table{
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
  };
  if (p < 0 || p >= static_cast<int>(table.size())) throw DomainError("derivatives above total order 4 are not supported");
  return table[static_cast<std::size_t>(p)];
}

// (X - iY)^k (X + iY)^l / 2^(k+l) as coefficients c[a] of X^a Y^(k+l-a).
std::vector<cplx> wirtinger_expansion(int k, int l) {
  std::vector<cplx> c{1.0};
  auto times = [&](cplx ycoef) {
    std::vector<cplx> out(c.size() + 1, 0.0);
    for (std::size_t a = 0; a < c.size(); ++a) {
      // c[a] X^a Y^(m-a) times (X + ycoef Y) / 2
      out[a + 1] += 0.5 * c[a];
      out[a] += 0.5 * ycoef * c[a];
    }
    c = std::move(out);
  };
  for (int i = 0; i < k; ++i) times(-kI);
  for (int i = 0; i < l; ++i) times(kI);
  return c;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

// ---- family and metric ----

DeformationFamily::DeformationFamily(SurfacePtr base, PipelineOptions opt)
    : base_(std::move(base)), opt_(opt), basis_(harmonic_basis(base_)) {
  for (const auto& m : basis_.basis) sup_.push_back(m.values().abs().maxCoeff());
}

double DeformationFamily::chart_radius() const {
  double s = 0.0;
  for (double v : sup_) s += v * v;
  return 0.99 * kMaxBeltramiNorm / std::sqrt(s);
}

Section DeformationFamily::beltrami(const ChartPoint& t) const {
  if (t.size() != dimension()) throw TypeError("chart point dimension differs from the family");
  Section mu = Section::zero(base_, -2);
  for (int j = 0; j < dimension(); ++j) mu += t[j] * basis_.basis[static_cast<std::size_t>(j)];
  return mu;
}

std::shared_ptr<const PipelineState> DeformationFamily::evaluate(const ChartPoint& t) const {
  auto key = chart_key(t);
  {
    std::lock_guard<std::mutex> lock(mtx_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  if (t.norm() >= chart_radius()) throw DomainError("chart point outside the chart radius");
  Deformation d = deform(beltrami(t), true, opt_.curvature);
  FrameResult frame = omega_frame(d, basis_, opt_.frame_tol);
  Matrix g = wp_pairing(d, frame, basis_);
  auto state = std::make_shared<const PipelineState>(PipelineState{t, std::move(d), std::move(frame), std::move(g)});
  std::lock_guard<std::mutex> lock(mtx_);
  return cache_.emplace(std::move(key), std::move(state)).first->second;
}

MetricFunction DeformationFamily::metric_function() const {
  return [this](const ChartPoint& t) { return metric(t); };
}

std::size_t DeformationFamily::cached() const {
  std::lock_guard<std::mutex> lock(mtx_);
  return cache_.size();
}

Matrix wp_pairing(const Deformation& d, const FrameResult& frame, const HarmonicBasis& basis, bool hermitize) {
  const int n = basis.dimension();
  if (static_cast<int>(frame.omega.size()) != n) throw TypeError("frame and basis sizes differ");
  const RField A = d.A();
  RField weight = A.square() * (2.0 * d.h.values().real()).exp() * d.h.model().hyperbolic_weights();
  Matrix B(n, n), G(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      B(i, k) = deformed_pairing(basis.basis[static_cast<std::size_t>(i)].values(),
                                 frame.omega[static_cast<std::size_t>(k)].values(), weight);
      G(i, k) = deformed_pairing(frame.omega[static_cast<std::size_t>(i)].values(),
                                 frame.omega[static_cast<std::size_t>(k)].values(), weight);
    }
  Matrix g = B * G.inverse() * B.adjoint();
  return hermitize ? Matrix(0.5 * (g + g.adjoint().eval())) : g;
}

Matrix wp_metric(const DeformationFamily& family, const ChartPoint& t) { return family.metric(t); }

// ---- finite differences ----

int MultiIndex::order() const {
  int s = 0;
  for (int v : holo) s += v;
  for (int v : anti) s += v;
  return s;
}

std::string MultiIndex::label() const {
  std::ostringstream os;
  bool first = true;
  auto part = [&](const std::vector<int>& o, const char* name) {
    for (std::size_t j = 0; j < o.size(); ++j) {
      if (!o[j]) continue;
      if (!first) os << ' ';
      first = false;
      os << name << j + 1;
      if (o[j] > 1) os << '^' << o[j];
    }
  };
  part(holo, "t");
  part(anti, "tbar");
  if (first) os << '1';
  return os.str();
}

MultiIndex multi_index(int dimension, std::initializer_list<int> holo_dirs, std::initializer_list<int> anti_dirs) {
  MultiIndex k{std::vector<int>(static_cast<std::size_t>(dimension), 0), std::vector<int>(static_cast<std::size_t>(dimension), 0)};
  for (int d : holo_dirs) ++k.holo.at(static_cast<std::size_t>(d));
  for (int d : anti_dirs) ++k.anti.at(static_cast<std::size_t>(d));
  return k;
}

MetricDerivatives::MetricDerivatives(MetricFunction g, ChartPoint base, std::vector<double> steps, int threads)
    : g_(std::move(g)), base_(std::move(base)), steps_(std::move(steps)), threads_(threads) {
  if (static_cast<Eigen::Index>(steps_.size()) != base_.size()) throw TypeError("one step per chart direction");
  for (double h : steps_)
    if (!(h > 0)) throw DomainError("finite-difference steps must be positive");
}

ChartPoint MetricDerivatives::point(const Offset& o) const {
  ChartPoint t = base_;
  for (Eigen::Index j = 0; j < base_.size(); ++j) {
    double q = steps_[static_cast<std::size_t>(j)] / 4.0;
    t[j] += cplx(o[static_cast<std::size_t>(2 * j)] * q, o[static_cast<std::size_t>(2 * j + 1)] * q);
  }
  return t;
}

std::map<MetricDerivatives::Offset, cplx> MetricDerivatives::weights(const MultiIndex& k, int level) const {
  const int n = dimension();
  const int unit = 4 >> level;
  std::map<Offset, cplx> out{{Offset(static_cast<std::size_t>(2 * n), 0), 1.0}};
  for (int j = 0; j < n; ++j) {
    auto ju = static_cast<std::size_t>(j);
    const double h = steps_[ju] / static_cast<double>(1 << level);
    auto c = wirtinger_expansion(k.holo[ju], k.anti[ju]);
    const int m = k.holo[ju] + k.anti[ju];
    std::map<Offset, cplx> next;
    for (int a = 0; a <= m; ++a) {
      if (c[static_cast<std::size_t>(a)] == 0.0) continue;
      const double scale = 1.0 / std::pow(h, m);
      for (const auto& [ox, wx] : stencil(a))
        for (const auto& [oy, wy] : stencil(m - a))
          for (const auto& [off, w] : out) {
            Offset o = off;
            o[2 * ju] += ox * unit;
            o[2 * ju + 1] += oy * unit;
            next[o] += w * c[static_cast<std::size_t>(a)] * wx * wy * scale;
          }
    }
    out = std::move(next);
  }
  return out;
}

void MetricDerivatives::prepare(const std::vector<MultiIndex>& indices) {
  std::set<Offset> need{Offset(static_cast<std::size_t>(2 * dimension()), 0)};
  for (const auto& k : indices)
    for (int level = 0; level < 3; ++level)
      for (const auto& [o, w] : weights(k, level))
        if (w != 0.0 && !samples_.count(o)) need.insert(o);
  for (const auto& [o, v] : samples_) need.erase(o);
  std::vector<Offset> todo(need.begin(), need.end());
  struct Outcome {
    std::optional<Matrix> value;
    std::string error;
  };
  auto results = parallel_map<Outcome>(todo.size(), threads_, [&](std::size_t i) {
    try {
      return Outcome{g_(point(todo[i])), {}};
    } catch (const std::exception& e) {
      return Outcome{std::nullopt, e.what()};
    }
  });
  std::ostringstream failed;
  std::string first;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (results[i].value) {
      samples_.emplace(todo[i], std::move(*results[i].value));
      continue;
    }
    if (first.empty()) first = results[i].error;
    ChartPoint t = point(todo[i]);
    failed << " (";
    for (Eigen::Index j = 0; j < t.size(); ++j) failed << (j ? ", " : "") << t[j].real() << (t[j].imag() < 0 ? "-" : "+") << std::abs(t[j].imag()) << "i";
    failed << ")";
  }
  if (!first.empty()) throw SolverError("metric_derivatives", "stencil failed at t =" + failed.str() + "; " + first);
}

DerivativeValue MetricDerivatives::derivative(const MultiIndex& k) {
  if (static_cast<int>(k.holo.size()) != dimension() || static_cast<int>(k.anti.size()) != dimension())
    throw TypeError("multi-index dimension differs from the chart");
  prepare({k});
  std::vector<Matrix> est;
  for (int level = 0; level < 3; ++level) {
    Matrix d = Matrix::Zero(samples_.begin()->second.rows(), samples_.begin()->second.cols());
    for (const auto& [o, w] : weights(k, level))
      if (w != 0.0) d += w * samples_.at(o);
    est.push_back(std::move(d));
  }
  if (k.order() == 0) return {est[0], 0.0};
  Matrix coarse = (4.0 * est[1] - est[0]) / 3.0;
  Matrix fine = (4.0 * est[2] - est[1]) / 3.0;
  return {coarse, max_abs(fine - coarse)};
}

Matrix MetricDerivatives::metric() {
  Offset zero(static_cast<std::size_t>(2 * dimension()), 0);
  if (!samples_.count(zero)) prepare({});
  return samples_.at(zero);
}

MetricDerivatives metric_derivatives(const DeformationFamily& family, const ChartPoint& base,
                                     const FiniteDifferenceOptions& opt) {
  std::vector<double> steps;
  for (double s : family.sup_norms()) steps.push_back(opt.step / s);
  return MetricDerivatives(family.metric_function(), base, steps, resolve_threads(opt.threads));
}

MetricDerivatives metric_derivatives(const MetricFunction& g, const ChartPoint& base, const std::vector<double>& steps,
                                     int threads) {
  return MetricDerivatives(g, base, steps, resolve_threads(threads));
}

// ---- Christoffel symbols and curvature ----

namespace {

struct DerivativeTable {
  int n;
  Matrix H, Hinv;
  std::vector<DerivativeValue> d, db;            // d_c H, d_cbar H
  std::vector<DerivativeValue> ddb;              // d_c d_dbar H at c * n + d
  // third-order and pure second-order tables, filled for the covariant derivative
  std::vector<DerivativeValue> dd, dbdb;         // d_e d_c H, d_ebar d_dbar H
  std::vector<DerivativeValue> dddb, dbddb;      // d_e d_c d_dbar H, d_ebar d_c d_dbar H at (e * n + c) * n + d

  // X_{rs} = g^{r sbar} = Hinv(s, r)
  cplx X(int r, int s) const { return Hinv(s, r); }
};

DerivativeTable build_table(MetricDerivatives& md, int order) {
  const int n = md.dimension();
  md.prepare(curvature_indices(n, order));
  DerivativeTable t{n, md.metric(), {}, {}, {}, {}, {}, {}, {}, {}};
  t.Hinv = t.H.inverse();
  if (!t.Hinv.allFinite() || std::abs(t.H.determinant()) < 1e-300) throw PreconditionError("singular metric");
  for (int c = 0; c < n; ++c) {
    t.d.push_back(md.derivative(multi_index(n, {c}, {})));
    t.db.push_back(md.derivative(multi_index(n, {}, {c})));
  }
  for (int c = 0; c < n; ++c)
    for (int d = 0; d < n; ++d) {
      t.ddb.push_back(md.derivative(multi_index(n, {c}, {d})));
      if (order > 0) {
        t.dd.push_back(md.derivative(multi_index(n, {c, d}, {})));
        t.dbdb.push_back(md.derivative(multi_index(n, {}, {c, d})));
      }
    }
  if (order > 0)
    for (int e = 0; e < n; ++e)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          t.dddb.push_back(md.derivative(multi_index(n, {e, c}, {d})));
          t.dbddb.push_back(md.derivative(multi_index(n, {c}, {e, d})));
        }
  return t;
}

std::size_t idx3(int n, int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); }
std::size_t idx4(int n, int a, int b, int c, int d) { return static_cast<std::size_t>(((a * n + b) * n + c) * n + d); }

double noise_max(const std::vector<DerivativeValue>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, x.noise);
  return m;
}
double value_max(const std::vector<DerivativeValue>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, max_abs(x.value));
  return m;
}

CurvatureTensor curvature_from(const DerivativeTable& t) {
  const int n = t.n;
  CurvatureTensor out;
  out.n = n;
  out.metric = t.H;
  out.gamma.assign(static_cast<std::size_t>(n * n * n), 0.0);
  out.riemann.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int s = 0; s < n; ++s) out.gamma[idx3(n, a, b, c)] += t.X(a, s) * t.d[static_cast<std::size_t>(c)].value(b, s);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          cplx r = t.ddb[static_cast<std::size_t>(c * n + d)].value(a, b);
          for (int rho = 0; rho < n; ++rho)
            for (int s = 0; s < n; ++s)
              r -= t.X(rho, s) * t.db[static_cast<std::size_t>(d)].value(rho, b) * t.d[static_cast<std::size_t>(c)].value(a, s);
          out.riemann[idx4(n, a, b, c, d)] = r;
        }
  const double hinv = max_abs(t.Hinv);
  const double d1 = value_max(t.d), e1 = std::max(noise_max(t.d), noise_max(t.db));
  out.gamma_noise = n * hinv * e1;
  out.riemann_noise = noise_max(t.ddb) + 2.0 * n * n * hinv * d1 * e1;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          cplx r = out.R(a, b, c, d);
          out.symmetry_residual = std::max({out.symmetry_residual, std::abs(r - out.R(c, b, a, d)), std::abs(r - out.R(a, d, c, b))});
        }
  return out;
}

}  // namespace

std::vector<MultiIndex> curvature_indices(int n, int derivative_order) {
  std::vector<MultiIndex> out;
  for (int c = 0; c < n; ++c) {
    out.push_back(multi_index(n, {c}, {}));
    out.push_back(multi_index(n, {}, {c}));
    for (int d = 0; d < n; ++d) {
      out.push_back(multi_index(n, {c}, {d}));
      if (derivative_order > 0) {
        out.push_back(multi_index(n, {c, d}, {}));
        out.push_back(multi_index(n, {}, {c, d}));
        for (int e = 0; e < n; ++e) {
          out.push_back(multi_index(n, {e, c}, {d}));
          out.push_back(multi_index(n, {c}, {e, d}));
        }
      }
    }
  }
  return out;
}

double CurvatureTensor::holomorphic_sectional(const ChartPoint& v, double sign) const {
  cplx num = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) num += R(a, b, c, d) * v[a] * std::conj(v[b]) * v[c] * std::conj(v[d]);
  cplx den = (v.transpose() * metric * v.conjugate())(0, 0);
  return sign * num.real() / (den.real() * den.real());
}

CurvatureTensor christoffel_and_curvature(MetricDerivatives& md) { return curvature_from(build_table(md, 0)); }

MetricFunction poincare_disk_metric() {
  return [](const ChartPoint& t) {
    if (t.size() != 1) throw TypeError("the disk metric is one-dimensional");
    double s = 1.0 - std::norm(t[0]);
    if (s <= 0) throw DomainError("point outside the disk");
    return Matrix::Constant(1, 1, 1.0 / (s * s));
  };
}

Calibration calibrate_curvature_sign(const std::vector<ChartPoint>& base_points, double step) {
  if (base_points.empty()) throw PreconditionError("calibration needs at least one base point");
  Calibration cal;
  std::vector<double> values;
  for (const auto& b : base_points) {
    MetricDerivatives md(poincare_disk_metric(), b, {step});
    CurvatureTensor c = christoffel_and_curvature(md);
    ChartPoint v = ChartPoint::Ones(1);
    double raw = c.holomorphic_sectional(v, 1.0);
    if (cal.sign == 0.0) cal.sign = raw > 0 ? -1.0 : 1.0;
    values.push_back(cal.sign * raw);
  }
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v / static_cast<double>(values.size());
  cal.curvature = values.front();
  cal.spread = (*hi - *lo) / std::abs(mean);
  return cal;
}

double CurvatureDerivative::norm() const {
  double m = 0.0;
  for (cplx c : components) m = std::max(m, std::abs(c));
  return m;
}

CurvatureDerivative covariant_curvature_derivative(MetricDerivatives& md, const ChartPoint& nu) {
  const DerivativeTable t = build_table(md, 1);
  const int n = t.n;
  if (nu.size() != n) throw TypeError("direction dimension differs from the chart");
  const CurvatureTensor cur = curvature_from(t);
  auto zu = [](int i) { return static_cast<std::size_t>(i); };
  // derivatives of X = Hinv^T
  std::vector<Matrix> dX, dbX;
  for (int e = 0; e < n; ++e) {
    dX.push_back((-t.Hinv * t.d[zu(e)].value * t.Hinv).transpose());
    dbX.push_back((-t.Hinv * t.db[zu(e)].value * t.Hinv).transpose());
  }
  CurvatureDerivative out;
  out.components.assign(zu(n * n * n * n), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          cplx total = 0.0;
          for (int e = 0; e < n; ++e) {
            cplx de = t.dddb[idx3(n, e, c, d)].value(a, b);
            cplx dbe = t.dbddb[idx3(n, e, c, d)].value(a, b);
            for (int rho = 0; rho < n; ++rho)
              for (int s = 0; s < n; ++s) {
                cplx dbH = t.db[zu(d)].value(rho, b), dH = t.d[zu(c)].value(a, s);
                de -= dX[zu(e)](rho, s) * dbH * dH + t.X(rho, s) * t.ddb[zu(e * n + d)].value(rho, b) * dH +
                      t.X(rho, s) * dbH * t.dd[zu(e * n + c)].value(a, s);
                dbe -= dbX[zu(e)](rho, s) * dbH * dH + t.X(rho, s) * t.dbdb[zu(e * n + d)].value(rho, b) * dH +
                       t.X(rho, s) * dbH * t.ddb[zu(c * n + e)].value(a, s);
              }
            for (int s = 0; s < n; ++s) {
              de -= cur.G(s, e, a) * cur.R(s, b, c, d) + cur.G(s, e, c) * cur.R(a, b, s, d);
              dbe -= std::conj(cur.G(s, e, b)) * cur.R(a, s, c, d) + std::conj(cur.G(s, e, d)) * cur.R(a, b, c, s);
            }
            total += nu[e] * de + std::conj(nu[e]) * dbe;
          }
          out.components[idx4(n, a, b, c, d)] = total;
        }
  double rmax = 0.0, gmax = 0.0;
  for (cplx r : cur.riemann) rmax = std::max(rmax, std::abs(r));
  for (cplx g : cur.gamma) gmax = std::max(gmax, std::abs(g));
  const double hinv = max_abs(t.Hinv);
  const double second = std::max({noise_max(t.ddb), noise_max(t.dd), noise_max(t.dbdb)});
  out.noise = nu.cwiseAbs().sum() * (std::max(noise_max(t.dddb), noise_max(t.dbddb)) +
                                     3.0 * n * n * hinv * value_max(t.d) * second +
                                     2.0 * n * (cur.gamma_noise * rmax + gmax * cur.riemann_noise));
  return out;
}

// ---- comparison invariant and norm scaling ----

double comp_invariant(const Section& mu, const std::vector<Section>& gradients, const std::vector<double>& lengths,
                      double c0) {
  if (mu.size() == 0) throw PreconditionError("comp_invariant on an empty grid");
  if (gradients.size() != lengths.size()) throw TypeError("one length per gradient surrogate");
  for (double l : lengths)
    if (!(l > 0) || l > c0) throw PreconditionError("geodesic length outside (0, c0]");
  const double norm = std::sqrt(inner_product(mu, mu).real());
  if (!(norm > 0)) throw DomainError("comp_invariant of the zero differential");
  if (gradients.empty()) return 1.0;
  const auto m = static_cast<Eigen::Index>(gradients.size());
  Matrix gram(m, m);
  Eigen::VectorXcd rhs(m);
  double lead = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    const Section& la = gradients[static_cast<std::size_t>(a)];
    rhs[a] = inner_product(mu, la);
    lead = std::max(lead, std::abs(rhs[a]) / std::sqrt(lengths[static_cast<std::size_t>(a)]));
    for (Eigen::Index b = 0; b < m; ++b) gram(b, a) = inner_product(la, gradients[static_cast<std::size_t>(b)]);
  }
  Eigen::VectorXcd coef = gram.colPivHouseholderQr().solve(rhs);
  Section rest = mu;
  for (Eigen::Index a = 0; a < m; ++a) rest -= coef[a] * gradients[static_cast<std::size_t>(a)];
  return (lead + std::sqrt(std::max(0.0, inner_product(rest, rest).real()))) / norm;
}

Section gradient_surrogate(const SurfacePtr& surface) {
  HarmonicBasis b = harmonic_basis(surface);
  if (b.dimension() < 1) throw PreconditionError("surface has no harmonic differentials");
  return (1.0 / std::sqrt(2.0 * kPi)) * b.basis.front();
}

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw PreconditionError("power fit needs at least three points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw PreconditionError("power fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i] / static_cast<double>(n);
    my += ly[i] / static_cast<double>(n);
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 1e-300) throw PreconditionError("power fit is degenerate: abscissae coincide");
  PowerFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) sse += std::pow(ly[i] - f.intercept - f.slope * lx[i], 2);
  const auto dof = static_cast<int>(n) - 2;
  f.stderr_slope = std::sqrt(sse / dof / sxx);
  static const double t975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  double tq = dof <= 10 ? t975[dof - 1] : 1.96 + 2.4 / dof;
  f.ci_low = f.slope - tq * f.stderr_slope;
  f.ci_high = f.slope + tq * f.stderr_slope;
  return f;
}

NormRatioStudy norm_ratio_study(const std::vector<double>& ells, int resolution, const Truncation& trunc, int threads) {
  NormRatioStudy st;
  st.rows = parallel_map<NormRatioRow>(ells.size(), resolve_threads(threads), [&](std::size_t i) {
    SurfacePtr s = construct_model(SurfaceKind::Collar, SurfaceParams{ells[i], {0.0, 1.0}}, resolution, trunc);
    Section mu = harmonic_basis(s).basis.front();
    NormRatioRow r;
    r.ell = ells[i];
    r.sup_norm = sup_norm(mu);
    r.l2_norm = std::sqrt(inner_product(mu, mu).real());
    r.ratio = r.sup_norm / r.l2_norm;
    r.comp = comp_invariant(mu, {gradient_surrogate(s)}, {ells[i]});
    for (int k = 0; k <= 2; ++k) r.holder_ratio.push_back(holder_norm(mu, k, 0.5) / r.sup_norm);
    return r;
  });
  std::vector<double> x, y;
  st.c_low = std::numeric_limits<double>::infinity();
  st.c_high = 0.0;
  for (const auto& r : st.rows) {
    x.push_back(r.ell);
    y.push_back(r.ratio);
    st.c_low = std::min(st.c_low, r.ratio / r.comp);
    st.c_high = std::max(st.c_high, r.ratio / r.comp);
  }
  st.fit = fit_power(x, y);
  for (int k = 0; k <= 2; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : st.rows) {
      lo = std::min(lo, r.holder_ratio[static_cast<std::size_t>(k)]);
      hi = std::max(hi, r.holder_ratio[static_cast<std::size_t>(k)]);
    }
    st.holder_spread = std::max(st.holder_spread, hi / lo);
  }
  return st;
}

// ---- Rauch variation ----

cplx period_modulus(const QCMap& map) {
  if (map.mu().model().kind() != SurfaceKind::PuncturedTorus) throw PreconditionError("period modulus needs a torus");
  return map.image_modulus();
}

RauchResult rauch_derivative(const Section& mu, double step) {
  if (mu.model().kind() != SurfaceKind::PuncturedTorus) throw PreconditionError("Rauch variation needs a torus");
  if (mu.weight() != -2) throw TypeError("Beltrami differentials have weight -2");
  RauchResult out;
  out.integral = pairwise_sum(Field(mu.values() * mu.grid().area_weights()));
  const double sup = mu.values().abs().maxCoeff();
  if (sup == 0.0) return out;
  const double h = step / sup;
  auto tau_at = [&](double t) { return period_modulus(solve_beltrami(t * mu)); };
  auto central = [&](double hh) { return (tau_at(hh) - tau_at(-hh)) / (2.0 * hh); };
  out.derivative = (4.0 * central(h / 2) - central(h)) / 3.0;
  out.kappa = out.derivative / out.integral;
  return out;
}

}  // namespace wplab
