#include "wplab/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "wplab/elliptic.hpp"

namespace wplab {

namespace {

struct Jet {
  double v, d1, d2;
};

Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
Jet operator*(double c, Jet a) { return {c * a.v, c * a.d1, c * a.d2}; }
Jet constant(double c) { return {c, 0, 0}; }
Jet jlog(Jet a) { return {std::log(a.v), a.d1 / a.v, a.d2 / a.v - a.d1 * a.d1 / (a.v * a.v)}; }
Jet jexp(Jet a) {
  double e = std::exp(a.v);
  return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}
Jet jinv(Jet a) {
  double v = 1 / a.v;
  return {v, -a.d1 * v * v, -a.d2 * v * v + 2 * a.d1 * a.d1 * v * v * v};
}

// The cusp profile is used unblended inside this fraction of the partition radius.
constexpr double kInnerFraction = 0.04;
// Steepness of the smooth step; larger is flatter near the ends
constexpr double kStepRate = 3.0;

// Smooth step: 1 for r <= f r0, 0 for r >= r0.
Jet cutoff(double r, double r0) {
  const double ri = kInnerFraction * r0;
  if (r <= ri) return constant(1.0);
  if (r >= r0) return constant(0.0);
  Jet t{(r0 - r) / (r0 - ri), -1.0 / (r0 - ri), 0.0};
  Jet g = kStepRate * (jinv(t) - jinv(constant(1.0) - t));
  if (g.v > 40) return constant(0.0);
  if (g.v < -40) return constant(1.0);
  return jinv(constant(1.0) + jexp(g));
}

Jet log_term(double r, double b) {
  Jet L{-std::log(r), -1.0 / r, 1.0 / (r * r)};
  return L + constant(b);
}

double gl_integral(const std::function<double(double)>& f, double a, double b, int panels) {
  static const double x[] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                             0.2369268850561891};
  double h = (b - a) / panels, sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    double c = a + (p + 0.5) * h;
    for (int k = 0; k < 5; ++k) sum += w[k] * f(c + 0.5 * h * x[k]);
  }
  return 0.5 * h * sum;
}

double cubic_weight(double t, int k) {
  // Lagrange weights on nodes -1, 0, 1, 2
  switch (k) {
    case 0: return -t * (t - 1) * (t - 2) / 6;
    case 1: return (t + 1) * (t - 1) * (t - 2) / 2;
    case 2: return -(t + 1) * t * (t - 2) / 2;
    default: return (t + 1) * t * (t - 1) / 6;
  }
}

}  // namespace

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Disk: return "disk";
    case SurfaceKind::PuncturedDisk: return "punctured_disk";
    case SurfaceKind::Collar: return "collar";
    case SurfaceKind::PuncturedTorus: return "punctured_torus";
  }
  return "?";
}

SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "disk") return SurfaceKind::Disk;
  if (s == "punctured_disk") return SurfaceKind::PuncturedDisk;
  if (s == "collar") return SurfaceKind::Collar;
  if (s == "punctured_torus") return SurfaceKind::PuncturedTorus;
  throw DomainError("unknown surface kind '" + s + "'");
}

namespace {

Jet cusp_profile(double r, double b) {
  return Jet{-std::log(r), -1.0 / r, 1.0 / (r * r)} - jlog(log_term(r, b));
}

PointJet radial_jet(Jet f, cplx d) {
  double r = std::abs(d);
  cplx u = std::conj(d) / r;
  return {f.v, 0.5 * f.d1 * u, 0.25 * u * u * (f.d2 - f.d1 / r), 0.25 * (f.d2 + f.d1 / r)};
}

PointJet operator+(const PointJet& a, const PointJet& b) { return {a.v + b.v, a.z + b.z, a.zz + b.zz, a.zzbar + b.zzbar}; }
PointJet operator-(const PointJet& a, const PointJet& b) { return {a.v - b.v, a.z - b.z, a.zz - b.zz, a.zzbar - b.zzbar}; }
PointJet operator*(const PointJet& a, const PointJet& b) {
  return {a.v * b.v, a.z * b.v + a.v * b.z, a.zz * b.v + 2.0 * a.z * b.z + a.v * b.zz,
          a.zzbar * b.v + 2 * std::real(a.z * std::conj(b.z)) + a.v * b.zzbar};
}
// h(f) given h, h', h''
PointJet compose(const PointJet& f, double h, double h1, double h2) {
  return {h, h1 * f.z, h2 * f.z * f.z + h1 * f.zz, h2 * std::norm(f.z) + h1 * f.zzbar};
}

// Green's function of the flat torus with unit lattice (1, tau), -log r + o(1) at the origin.
PointJet torus_green(cplx d, cplx tau) {
  cplx x = kPi * d, th{}, th1{}, th2{}, th1_0{};
  for (int n = 0; n < 40; ++n) {
    double m = n + 0.5;
    cplx c = std::exp(kI * kPi * tau * (m * m)) * (n % 2 ? -2.0 : 2.0);
    double k = 2 * n + 1;
    th += c * std::sin(k * x);
    th1 += c * k * std::cos(k * x);
    th2 -= c * k * k * std::sin(k * x);
    th1_0 += c * k;
    if (std::abs(c) * std::exp(k * std::abs(std::imag(x))) * k * k < 1e-18 * std::abs(th1_0)) break;
  }
  double ti = std::imag(tau), y = std::imag(d);
  cplx l1 = th1 / th;
  PointJet g;
  g.v = -std::log(std::abs(th / (kPi * th1_0))) + kPi * y * y / ti;
  g.z = -0.5 * kPi * l1 - kI * kPi * y / ti;
  g.zz = -0.5 * kPi * kPi * (th2 / th - l1 * l1) - kPi / (2 * ti);
  g.zzbar = kPi / (2 * ti);
  return g;
}

}  // namespace

double CuspReference::cusp_weight(double r) const { return cutoff(r, r0).v; }

PointJet CuspReference::evaluate(cplx d) const {
  double r = std::abs(d);
  if (r <= kInnerFraction * r0) return radial_jet(cusp_profile(r, scale), d);
  return evaluate(d, torus_green(d, tau));
}

PointJet CuspReference::evaluate(cplx d, const PointJet& g) const {
  double r = std::abs(d);
  if (r <= kInnerFraction * r0) return radial_jet(cusp_profile(r, scale), d);
  // S(x) = x0 + w log(1 + e^{(x - x0)/w}), a smooth positive floor of x
  double x = g.v + scale, t = (x - floor_level) / floor_width;
  double sp = t > 30 ? t : std::log1p(std::exp(t));
  double sig = 1.0 / (1.0 + std::exp(-t));
  double S = floor_level + floor_width * sp, S1 = sig, S2 = sig * (1 - sig) / floor_width;
  PointJet outer = g - compose(g, std::log(S), S1 / S, S2 / S - S1 * S1 / (S * S));
  if (r >= r0) return outer;
  PointJet chi = radial_jet(cutoff(r, r0), d);
  PointJet cusp = radial_jet(cusp_profile(r, scale), d);
  return outer + chi * (cusp - outer);
}

double CuspReference::cusp_density(double r) const { return 1.0 / (r * (-std::log(r) + scale)); }

double CuspReference::cusp_area() const {
  const double half = kInnerFraction * r0;
  double inner = 2 * kPi / (std::log(1.0 / half) + scale);
  auto f = [&](double r) { return 2 * kPi * r * cutoff(r, r0).v * std::pow(cusp_density(r), 2); };
  return inner + gl_integral(f, half, r0, 200);
}

cplx lattice_displacement(cplx z, cplx zp, cplx tau) {
  cplx d = z - zp;
  double q = std::imag(d) / std::imag(tau);
  double p = std::real(d) - q * std::real(tau);
  p -= std::floor(p + 0.5);
  q -= std::floor(q + 0.5);
  cplx best = p + q * tau;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      cplx c = (p + a) + (q + b) * tau;
      if (std::abs(c) < std::abs(best)) best = c;
    }
  return best;
}

ReferenceFields evaluate_reference(const Grid& grid, cplx tau, const CuspReference& ref) {
  const int n = grid.size();
  ReferenceFields out;
  out.value.resize(n);
  out.laplacian.resize(n);
  out.dz.resize(n);
  out.dzz.resize(n);
  out.scale_value.resize(n);
  out.scale_laplacian.resize(n);
  const double db = 1e-5;
  CuspReference up = ref, down = ref;
  up.tau = down.tau = tau;
  up.scale += db;
  down.scale -= db;
  CuspReference mid = ref;
  mid.tau = tau;
  for (int k = 0; k < n; ++k) {
    cplx d = lattice_displacement(grid.point(k), ref.puncture, tau);
    PointJet g = torus_green(d, tau);
    PointJet f = mid.evaluate(d, g), fu = up.evaluate(d, g), fd = down.evaluate(d, g);
    out.value[k] = f.v;
    out.laplacian[k] = 4 * f.zzbar;
    out.dz[k] = f.z;
    out.dzz[k] = f.zz;
    out.scale_value[k] = (fu.v - fd.v) / (2 * db);
    out.scale_laplacian[k] = 4 * (fu.zzbar - fd.zzbar) / (2 * db);
  }
  return out;
}

void ModelSurface::set_cylinder_density() {
  const int n = grid_.size();
  lambda_.resize(n);
  phi_.resize(n);
  phi_zzbar_.resize(n);
  phi_z_.resize(n);
  phi_zz_.resize(n);
  const Axis& a0 = grid_.axis0();
  for (int i = 0; i < a0.n; ++i) {
    double s = a0.x[i], lam = 0, d1 = 0, d2 = 0;
    switch (kind_) {
      case SurfaceKind::Disk:
        lam = 1.0 / std::sinh(-s);
        d1 = 1.0 / std::tanh(-s);
        d2 = lam * lam;
        break;
      case SurfaceKind::PuncturedDisk:
        lam = -1.0 / s;
        d1 = -1.0 / s;
        d2 = lam * lam;
        break;
      case SurfaceKind::Collar: {
        double kappa = params_.ell / (2 * kPi);
        double xi = (grid_.axis0().h * i) - 0.5 * grid_.axis0().h * (a0.n - 1);
        lam = kappa * std::cosh(xi);
        d1 = kappa * std::sinh(xi);
        d2 = lam * lam;
        break;
      }
      default: break;
    }
    for (int j = 0; j < grid_.n1(); ++j) {
      int k = grid_.index(i, j);
      lambda_[k] = lam;
      phi_[k] = std::log(lam);
      phi_z_[k] = 0.5 * d1;
      phi_zz_[k] = 0.25 * d2;
      phi_zzbar_[k] = 0.25 * d2;
    }
  }
}

void ModelSurface::set_valid_mask() {
  valid_ = RField::Ones(grid_.size());
  const int ring = trunc_.boundary_ring;
  if (!grid_.axis0().periodic)
    for (int i = 0; i < grid_.n0(); ++i)
      if (i < ring || i >= grid_.n0() - ring)
        for (int j = 0; j < grid_.n1(); ++j) valid_[grid_.index(i, j)] = 0.0;
  if (kind_ == SurfaceKind::PuncturedTorus) {
    // puncture sits at the centroid of cell (0, 0)
    const int c = trunc_.cusp_ring;
    for (int di = -c; di <= 1 + c; ++di)
      for (int dj = -c; dj <= 1 + c; ++dj) {
        int i = ((di % grid_.n0()) + grid_.n0()) % grid_.n0();
        int j = ((dj % grid_.n1()) + grid_.n1()) % grid_.n1();
        valid_[grid_.index(i, j)] = 0.0;
      }
  }
  RField hw = hyperbolic_weights();
  excluded_area_ = pairwise_sum(RField(hw * (1.0 - valid_)));
}

std::string ModelSurface::truncation_summary() const {
  std::ostringstream os;
  switch (kind_) {
    case SurfaceKind::Disk: os << "r in [" << trunc_.disk_r_min << ", " << trunc_.disk_r_max << "]"; break;
    case SurfaceKind::PuncturedDisk: os << "log r in [" << trunc_.pdisk_s_min << ", " << trunc_.pdisk_s_max << "]"; break;
    case SurfaceKind::Collar: os << "|s| <= " << collar_s_max_ << " (boundary injectivity " << trunc_.collar_width << ")"; break;
    case SurfaceKind::PuncturedTorus: os << "cusp ring " << trunc_.cusp_ring << ", r0 " << torus_->reference.r0; break;
  }
  os << ", boundary ring " << trunc_.boundary_ring;
  return os.str();
}

double ModelSurface::density_chart(cplx w) const {
  switch (kind_) {
    case SurfaceKind::Disk: return 1.0 / std::sinh(-std::real(w));
    case SurfaceKind::PuncturedDisk: return -1.0 / std::real(w);
    case SurfaceKind::Collar: {
      double kappa = params_.ell / (2 * kPi);
      return kappa / std::cos(kappa * std::real(w));
    }
    case SurfaceKind::PuncturedTorus: {
      const auto& tm = *torus_;
      cplx tau = params_.tau;
      double q = std::imag(w) / std::imag(tau);
      double p = std::real(w) - q * std::real(tau);
      double fp = p * grid_.n0(), fq = q * grid_.n1();
      int ip = static_cast<int>(std::floor(fp)), iq = static_cast<int>(std::floor(fq));
      double tp = fp - ip, tq = fq - iq;
      double corr = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          int i = ((ip - 1 + a) % grid_.n0() + grid_.n0()) % grid_.n0();
          int j = ((iq - 1 + b) % grid_.n1() + grid_.n1()) % grid_.n1();
          corr += cubic_weight(tp, a) * cubic_weight(tq, b) * tm.correction[grid_.index(i, j)];
        }
      return std::exp(tm.reference.evaluate(lattice_displacement(w, tm.reference.puncture, tau)).v + corr);
    }
  }
  return 0.0;
}

Field ModelSurface::ambient_phase() const {
  Field ph = Field::Ones(grid_.size());
  if (kind_ == SurfaceKind::Disk || kind_ == SurfaceKind::PuncturedDisk)
    for (int k = 0; k < grid_.size(); ++k) ph[k] = std::exp(kI * grid_.x1(k));
  return ph;
}

cplx ModelSurface::ambient_point(cplx w) const {
  if (kind_ == SurfaceKind::Disk || kind_ == SurfaceKind::PuncturedDisk) return std::exp(w);
  return w;
}

SurfacePtr construct_model(SurfaceKind kind, const SurfaceParams& params, int resolution, const Truncation& trunc) {
  if (resolution < 16) throw DomainError("resolution must be at least 16 per axis");
  const int n = resolution;
  auto make = [&](Grid g) { return std::shared_ptr<ModelSurface>(new ModelSurface(kind, params, trunc, n, std::move(g))); };
  std::shared_ptr<ModelSurface> s;
  switch (kind) {
    case SurfaceKind::Disk: {
      if (!(trunc.disk_r_min > 0 && trunc.disk_r_max < 1 && trunc.disk_r_min < trunc.disk_r_max))
        throw DomainError("disk truncation radii must satisfy 0 < r_min < r_max < 1");
      s = make(Grid(Axis::make_bounded(n, std::log(trunc.disk_r_min), std::log(trunc.disk_r_max)),
                    Axis::make_periodic(n, 0.0, 2 * kPi), 1.0, kI));
      s->set_cylinder_density();
      break;
    }
    case SurfaceKind::PuncturedDisk: {
      if (!(trunc.pdisk_s_min < trunc.pdisk_s_max && trunc.pdisk_s_max < 0))
        throw DomainError("punctured disk truncation must satisfy s_min < s_max < 0");
      s = make(Grid(Axis::make_bounded(n, trunc.pdisk_s_min, trunc.pdisk_s_max), Axis::make_periodic(n, 0.0, 2 * kPi),
                    1.0, kI));
      s->set_cylinder_density();
      break;
    }
    case SurfaceKind::Collar: {
      const double ell = params.ell;
      if (!(ell > 0)) throw DomainError("collar core length must be positive");
      if (!(2 * trunc.collar_width / ell > 1.0)) throw DomainError("collar too long for the injectivity truncation");
      const double d0 = std::acosh(2 * trunc.collar_width / ell);
      const double scale = 2 * kPi / ell;
      auto map = [scale](double xi) { return scale * (2 * std::atan(std::exp(xi)) - 0.5 * kPi); };
      auto dmap = [scale](double xi) { return scale / std::cosh(xi); };
      s = make(Grid(Axis::make_mapped(n, -d0, d0, map, dmap), Axis::make_periodic(n, 0.0, 2 * kPi), 1.0, kI));
      s->collar_s_max_ = map(d0);
      s->set_cylinder_density();
      break;
    }
    case SurfaceKind::PuncturedTorus: {
      const cplx tau = params.tau;
      if (!(std::imag(tau) > 0)) throw DomainError("torus modulus must have Im tau > 0");
      int mult = 1;
      while (mult < std::lround(std::abs(tau))) mult *= 2;
      const int nq = n * mult;
      s = make(Grid(Axis::make_periodic(n, 0.0, 1.0), Axis::make_periodic(nq, 0.0, 1.0), 1.0, tau));
      TorusMetric tm = base_metric_solve(s->grid_, tau, trunc);
      ReferenceFields rf = evaluate_reference(s->grid_, tau, tm.reference);
      const Grid& g = s->grid_;
      Field w = tm.correction.cast<cplx>();
      Field wz = g.dz(w);
      s->phi_ = rf.value + tm.correction;
      s->lambda_ = s->phi_.exp();
      s->phi_z_ = rf.dz + wz;
      s->phi_zz_ = rf.dzz + g.dz(wz);
      s->phi_zzbar_ = 0.25 * rf.laplacian + g.dzbar(wz).real();
      s->torus_ = std::move(tm);
      break;
    }
  }
  s->set_valid_mask();
  return s;
}

double density_at(const ModelSurface& s, cplx z) {
  switch (s.kind()) {
    case SurfaceKind::Disk: {
      double r2 = std::norm(z);
      if (r2 >= 1) throw DomainError("point outside the unit disk");
      return 2.0 / (1.0 - r2);
    }
    case SurfaceKind::PuncturedDisk: {
      double r = std::abs(z);
      if (!(r > 0 && r < 1)) throw DomainError("point outside the punctured disk");
      return 1.0 / (r * std::abs(std::log(r)));
    }
    default: return s.density_chart(z);
  }
}

double hyperbolic_area(const ModelSurface& s) {
  if (s.kind() != SurfaceKind::PuncturedTorus) return pairwise_sum(s.hyperbolic_weights());
  const auto& tm = *s.torus_metric();
  const Grid& g = s.grid();
  ReferenceFields rf = evaluate_reference(g, s.params().tau, tm.reference);
  // trapezoid of the density minus its cusp part, which is integrated radially
  RField rest(g.size());
  for (int k = 0; k < g.size(); ++k) {
    double r = std::abs(lattice_displacement(g.point(k), tm.reference.puncture, s.params().tau));
    double chi = tm.reference.cusp_weight(r);
    rest[k] = chi >= 1.0 ? std::exp(2 * rf.value[k]) * std::expm1(2 * tm.correction[k])
                         : std::exp(2 * (rf.value[k] + tm.correction[k])) - chi * std::pow(tm.reference.cusp_density(r), 2);
  }
  return tm.reference.cusp_area() + pairwise_sum(RField(g.area_weights() * rest));
}

double hyperbolic_area(const ModelSurface& s, const AxisRegion& region) {
  const Grid& g = s.grid();
  const Axis& a0 = g.axis0();
  if (a0.periodic) throw PreconditionError("axis regions need a bounded chart axis");
  double lo = std::max(region.lo, a0.x.front()), hi = std::min(region.hi, a0.x.back());
  if (!(hi > lo)) return 0.0;
  // area per unit of the computational variable on each axis-0 line
  std::vector<double> dens(static_cast<std::size_t>(a0.n));
  RField hw = g.area_weights() * s.lambda().square();
  for (int i = 0; i < a0.n; ++i) {
    double row = pairwise_sum(hw.data() + static_cast<std::size_t>(g.index(i, 0)), static_cast<std::size_t>(g.n1()));
    dens[i] = row / a0.weight(i) * a0.jac[i];
  }
  auto xi_of = [&](double x) {
    auto it = std::lower_bound(a0.x.begin(), a0.x.end(), x);
    int i = std::clamp(static_cast<int>(it - a0.x.begin()) - 1, 0, a0.n - 2);
    double t = (x - a0.x[i]) / (a0.x[i + 1] - a0.x[i]);
    return (i + t);  // in units of h
  };
  double ta = xi_of(lo), tb = xi_of(hi);
  auto dens_at = [&](double t) {
    int i = std::clamp(static_cast<int>(std::floor(t)), 0, a0.n - 2);
    double f = t - i;
    return (1 - f) * dens[i] + f * dens[i + 1];
  };
  double sum = 0.0;
  int ia = static_cast<int>(std::ceil(ta)), ib = static_cast<int>(std::floor(tb));
  if (ia > ib) return 0.5 * (dens_at(ta) + dens_at(tb)) * (tb - ta) * a0.h;
  sum += 0.5 * (dens_at(ta) + dens[ia]) * (ia - ta);
  for (int i = ia; i < ib; ++i) sum += 0.5 * (dens[i] + dens[i + 1]);
  sum += 0.5 * (dens[ib] + dens_at(tb)) * (tb - ib);
  return sum * a0.h;
}

cplx curvature_sample_point(const ModelSurface& s, int k) {
  const Grid& g = s.grid();
  if (s.kind() != SurfaceKind::PuncturedTorus) return g.point(k);
  return g.point(k) + 0.5 * g.axis0().h * g.e0() + 0.5 * g.axis1().h * g.e1();
}

RField gauss_curvature(const ModelSurface& s) {
  const Grid& g = s.grid();
  if (s.kind() == SurfaceKind::PuncturedTorus) {
    const auto& tm = *s.torus_metric();
    Field w = tm.correction.cast<cplx>();
    RField ws = g.shifted(w, 0.5, 0.5).real();
    RField lap = g.shifted(4.0 * g.dzbar(g.dz(w)), 0.5, 0.5).real();
    RField K(g.size());
    for (int k = 0; k < g.size(); ++k) {
      PointJet f = tm.reference.evaluate(lattice_displacement(curvature_sample_point(s, k), tm.reference.puncture,
                                                              s.params().tau));
      K[k] = -std::exp(-2 * (f.v + ws[k])) * (4 * f.zzbar + lap[k]);
    }
    return K;
  }
  Field phi = s.log_lambda().cast<cplx>();
  RField lap = (4.0 * g.dzbar(g.dz(phi))).real();
  return -(-2 * s.log_lambda()).exp() * lap;
}

double trace_to_length(double trace) {
  if (!(std::abs(trace) >= 2.0)) throw DomainError("elliptic element: |trace| < 2");
  return 2.0 * std::acosh(std::abs(trace) / 2.0);
}

double curve_length(const ModelSurface& s, const ClosedCurve& c) {
  const std::size_t n = c.vertices.size();
  std::vector<double> seg(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx a = c.vertices[k], b = k + 1 < n ? c.vertices[k + 1] : c.vertices[0] + c.shift;
    double la = s.density_chart(a), lm = s.density_chart(0.5 * (a + b)), lb = s.density_chart(b);
    seg[k] = (la + 4 * lm + lb) / 6.0 * std::abs(b - a);
  }
  return pairwise_sum(seg.data(), n);
}

GeodesicResult geodesic_length_numeric(const ModelSurface& s, ClosedCurve curve, int max_iterations, double tol) {
  if (curve.vertices.size() < 3) throw PreconditionError("closed curve needs at least 3 vertices");
  GeodesicResult res;
  double len = curve_length(s, curve);
  res.history.push_back(len);
  const std::size_t n = curve.vertices.size();
  double step = 1e-3;
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<cplx> grad(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double e = 1e-6;
      ClosedCurve cp = curve;
      auto eval = [&](cplx dz) {
        cp.vertices[k] = curve.vertices[k] + dz;
        return curve_length(s, cp);
      };
      grad[k] = cplx((eval(e) - eval(-e)) / (2 * e), (eval(kI * e) - eval(-kI * e)) / (2 * e));
    }
    double gnorm = 0.0;
    for (auto g : grad) gnorm += std::norm(g);
    if (gnorm == 0.0) break;
    bool accepted = false;
    step *= 2.0;
    for (int ls = 0; ls < 40; ++ls) {
      ClosedCurve trial = curve;
      for (std::size_t k = 0; k < n; ++k) trial.vertices[k] -= step * grad[k];
      double tl = curve_length(s, trial);
      if (tl < len - 1e-4 * step * gnorm) {
        double rel = (len - tl) / len;
        curve = std::move(trial);
        len = tl;
        accepted = true;
        res.history.push_back(len);
        if (rel < tol) {
          res.iterations = it + 1;
          res.length = len;
          res.curve = curve;
          return res;
        }
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;  // no descent possible: stationary to line-search precision
    if (it + 1 == max_iterations)
      throw SolverError("geodesic", "curve shortening did not converge, last length " + std::to_string(len), res.history);
  }
  res.length = len;
  res.curve = curve;
  return res;
}

ClosedCurve core_curve(const ModelSurface& s, int vertices, double offset) {
  ClosedCurve c;
  const Grid& g = s.grid();
  if (s.kind() == SurfaceKind::PuncturedTorus) {
    cplx tau = s.params().tau;
    for (int k = 0; k < vertices; ++k) c.vertices.push_back(static_cast<double>(k) / vertices + offset * tau);
    c.shift = 1.0;
    return c;
  }
  double s0 = s.kind() == SurfaceKind::Collar ? 0.0 : 0.5 * (g.axis0().x.front() + g.axis0().x.back());
  for (int k = 0; k < vertices; ++k) c.vertices.push_back(cplx(s0, 2 * kPi * k / vertices));
  c.shift = cplx(0, 2 * kPi);
  return c;
}

}  // namespace wplab
