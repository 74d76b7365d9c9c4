#include "wplab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace wplab {

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// fftw_complex and std::complex<double> share layout.
fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

double signed_mode(int m, int n) {
  if (2 * m == n) return 0.0;  // Nyquist
  return m < (n + 1) / 2 ? m : m - n;
}

}  // namespace

template <class T>
static T pairwise_impl(const T* d, std::size_t n) {
  if (n <= 16) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += d[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_impl(d, half) + pairwise_impl(d + half, n - half);
}

double pairwise_sum(const double* data, std::size_t n) { return pairwise_impl(data, n); }
cplx pairwise_sum(const cplx* data, std::size_t n) { return pairwise_impl(data, n); }

Axis Axis::make_periodic(int n, double lo, double period) {
  if (n < 4) throw DomainError("periodic axis needs at least 4 nodes");
  Axis a;
  a.periodic = true;
  a.n = n;
  a.period = period;
  a.h = period / n;
  for (int i = 0; i < n; ++i) {
    a.x.push_back(lo + a.h * i);
    a.jac.push_back(1.0);
  }
  return a;
}

Axis Axis::make_bounded(int n, double lo, double hi) {
  return make_mapped(n, lo, hi, [](double t) { return t; }, [](double) { return 1.0; });
}

Axis Axis::make_mapped(int n, double xi_lo, double xi_hi, const std::function<double(double)>& map,
                       const std::function<double(double)>& dmap) {
  if (n < 8) throw DomainError("bounded axis needs at least 8 nodes");
  if (!(xi_hi > xi_lo)) throw DomainError("bounded axis needs hi > lo");
  Axis a;
  a.periodic = false;
  a.n = n;
  a.h = (xi_hi - xi_lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    double xi = xi_lo + a.h * i;
    a.x.push_back(map(xi));
    a.jac.push_back(dmap(xi));
  }
  return a;
}

namespace {

// Diagonal-norm summation-by-parts first derivative: fourth order inside, second order in the
// four-node closures. Rows are in units of 1/h; the closure at the upper end mirrors this one.
constexpr double kNorm[4] = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
constexpr double kClosure[4][6] = {{-24.0 / 17, 59.0 / 34, -4.0 / 17, -3.0 / 34, 0.0, 0.0},
                                   {-0.5, 0.0, 0.5, 0.0, 0.0, 0.0},
                                   {4.0 / 43, -59.0 / 86, 0.0, 59.0 / 86, -4.0 / 43, 0.0},
                                   {3.0 / 98, 0.0, -59.0 / 98, 0.0, 32.0 / 49, -4.0 / 49}};

}  // namespace

std::vector<std::pair<int, double>> sbp_stencil(int n, int i) {
  std::vector<std::pair<int, double>> out;
  if (i < 4) {
    for (int c = 0; c < 6; ++c)
      if (kClosure[i][c] != 0.0) out.emplace_back(c, kClosure[i][c]);
  } else if (i > n - 5) {
    const int r = n - 1 - i;
    for (int c = 0; c < 6; ++c)
      if (kClosure[r][c] != 0.0) out.emplace_back(n - 1 - c, -kClosure[r][c]);
  } else {
    out = {{i - 2, 1.0 / 12}, {i - 1, -2.0 / 3}, {i + 1, 2.0 / 3}, {i + 2, -1.0 / 12}};
  }
  return out;
}

double Axis::weight(int i) const {
  double w = h * jac[static_cast<std::size_t>(i)];
  if (!periodic) {
    const int e = std::min(i, n - 1 - i);
    if (e < 4) w *= kNorm[e];
  }
  return w;
}

struct Grid::Plans {
  fftw_plan fwd0 = nullptr, bwd0 = nullptr, fwd1 = nullptr, bwd1 = nullptr, fwd2 = nullptr, bwd2 = nullptr;
  Field dz_sym, dzbar_sym;
  ~Plans() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    for (fftw_plan p : {fwd0, bwd0, fwd1, bwd1, fwd2, bwd2})
      if (p) fftw_destroy_plan(p);
  }
};

Grid::Grid(Axis a0, Axis a1, cplx e0, cplx e1, cplx origin)
    : a0_(std::move(a0)), a1_(std::move(a1)), e0_(e0), e1_(e1), origin_(origin),
      delta_(e0 * std::conj(e1) - std::conj(e0) * e1), plans_(std::make_shared<Plans>()) {
  if (std::abs(delta_) < 1e-14) throw DomainError("degenerate chart frame");
  const int n0 = a0_.n, n1 = a1_.n;
  const double cell = std::abs(std::imag(std::conj(e0_) * e1_));
  weights_.resize(size());
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) weights_[index(i, j)] = a0_.weight(i) * a1_.weight(j) * cell;

  std::lock_guard<std::mutex> lock(fftw_mutex());
  Field buf(size()), buf2(size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_complex* b = as_fftw(buf.data());
  fftw_complex* o = as_fftw(buf2.data());
  if (a0_.periodic) {
    int n[] = {n0};
    plans_->fwd0 = fftw_plan_many_dft(1, n, n1, b, nullptr, n1, 1, o, nullptr, n1, 1, FFTW_FORWARD, flags);
    plans_->bwd0 = fftw_plan_many_dft(1, n, n1, b, nullptr, n1, 1, o, nullptr, n1, 1, FFTW_BACKWARD, flags);
  }
  if (a1_.periodic) {
    int n[] = {n1};
    plans_->fwd1 = fftw_plan_many_dft(1, n, n0, b, nullptr, 1, n1, o, nullptr, 1, n1, FFTW_FORWARD, flags);
    plans_->bwd1 = fftw_plan_many_dft(1, n, n0, b, nullptr, 1, n1, o, nullptr, 1, n1, FFTW_BACKWARD, flags);
  }
  if (a0_.periodic && a1_.periodic) {
    plans_->fwd2 = fftw_plan_dft_2d(n0, n1, b, o, FFTW_FORWARD, flags);
    plans_->bwd2 = fftw_plan_dft_2d(n0, n1, b, o, FFTW_BACKWARD, flags);
    plans_->dz_sym.resize(size());
    plans_->dzbar_sym.resize(size());
    for (int i = 0; i < n0; ++i) {
      cplx s0 = kI * (2 * kPi / a0_.period) * signed_mode(i, n0);
      for (int j = 0; j < n1; ++j) {
        cplx s1 = kI * (2 * kPi / a1_.period) * signed_mode(j, n1);
        plans_->dz_sym[index(i, j)] = (std::conj(e1_) * s0 - std::conj(e0_) * s1) / delta_;
        plans_->dzbar_sym[index(i, j)] = (e0_ * s1 - e1_ * s0) / delta_;
      }
    }
  }
}

cplx Grid::point(int k) const { return origin_ + e0_ * x0(k) + e1_ * x1(k); }

Field Grid::diff_periodic(const Field& f, int axis) const {
  const Axis& ax = axis == 0 ? a0_ : a1_;
  Field spectrum(size());
  fftw_execute_dft(axis == 0 ? plans_->fwd0 : plans_->fwd1, as_fftw(f.data()), as_fftw(spectrum.data()));
  const double scale = 2 * kPi / ax.period / ax.n;
  for (int i = 0; i < n0(); ++i)
    for (int j = 0; j < n1(); ++j) {
      int m = axis == 0 ? i : j;
      spectrum[index(i, j)] *= kI * (scale * signed_mode(m, ax.n));
    }
  Field out(size());
  fftw_execute_dft(axis == 0 ? plans_->bwd0 : plans_->bwd1, as_fftw(spectrum.data()), as_fftw(out.data()));
  return out;
}

Field Grid::diff_bounded(const Field& f, int axis, Flavor fl) const {
  const Axis& ax = axis == 0 ? a0_ : a1_;
  const int n = ax.n;
  const int other = axis == 0 ? n1() : n0();
  const double c = 1.0 / (12.0 * ax.h);
  Field out(size());
  std::vector<cplx> line(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  for (int o = 0; o < other; ++o) {
    auto at = [&](int m) { return axis == 0 ? index(m, o) : index(o, m); };
    for (int m = 0; m < n; ++m) line[m] = f[at(m)];
    if (fl == Flavor::Adjoint) {
      for (int m = 0; m < n; ++m) {
        cplx acc{};
        for (auto [col, w] : sbp_stencil(n, m)) acc += w * line[static_cast<std::size_t>(col)];
        d[m] = acc / ax.h;
      }
    } else {
      for (int m = 2; m < n - 2; ++m) d[m] = c * (line[m - 2] - 8.0 * line[m - 1] + 8.0 * line[m + 1] - line[m + 2]);
      d[0] = c * (-25.0 * line[0] + 48.0 * line[1] - 36.0 * line[2] + 16.0 * line[3] - 3.0 * line[4]);
      d[1] = c * (-3.0 * line[0] - 10.0 * line[1] + 18.0 * line[2] - 6.0 * line[3] + line[4]);
      d[n - 1] = -c * (-25.0 * line[n - 1] + 48.0 * line[n - 2] - 36.0 * line[n - 3] + 16.0 * line[n - 4] -
                       3.0 * line[n - 5]);
      d[n - 2] = -c * (-3.0 * line[n - 1] - 10.0 * line[n - 2] + 18.0 * line[n - 3] - 6.0 * line[n - 4] +
                       line[n - 5]);
    }
    for (int m = 0; m < n; ++m) out[at(m)] = d[m] / ax.jac[m];
  }
  return out;
}

Field Grid::d0(const Field& f, Flavor fl) const { return a0_.periodic ? diff_periodic(f, 0) : diff_bounded(f, 0, fl); }
Field Grid::d1(const Field& f, Flavor fl) const { return a1_.periodic ? diff_periodic(f, 1) : diff_bounded(f, 1, fl); }

Field Grid::dz(const Field& f, Flavor fl) const {
  return (std::conj(e1_) * d0(f, fl) - std::conj(e0_) * d1(f, fl)) / delta_;
}

Field Grid::dzbar(const Field& f, Flavor fl) const { return (e0_ * d1(f, fl) - e1_ * d0(f, fl)) / delta_; }

Field Grid::fft2(const Field& f) const {
  if (!plans_->fwd2) throw PreconditionError("fft2 needs a doubly periodic grid");
  Field out(size());
  fftw_execute_dft(plans_->fwd2, as_fftw(f.data()), as_fftw(out.data()));
  return out;
}

Field Grid::ifft2(const Field& f) const {
  if (!plans_->bwd2) throw PreconditionError("ifft2 needs a doubly periodic grid");
  Field out(size());
  fftw_execute_dft(plans_->bwd2, as_fftw(f.data()), as_fftw(out.data()));
  return out / static_cast<double>(size());
}

const Field& Grid::dz_symbol() const { return plans_->dz_sym; }
const Field& Grid::dzbar_symbol() const { return plans_->dzbar_sym; }

Field Grid::shifted(const Field& f, double t0, double t1) const {
  Field fh = fft2(f);
  for (int i = 0; i < n0(); ++i)
    for (int j = 0; j < n1(); ++j) {
      double m0 = signed_mode(i, n0()), m1 = signed_mode(j, n1());
      bool nyquist = 2 * i == n0() || 2 * j == n1();
      double phase = 2 * kPi * (m0 * t0 / n0() + m1 * t1 / n1());
      fh[index(i, j)] = nyquist ? cplx{} : fh[index(i, j)] * std::exp(kI * phase);
    }
  return ifft2(fh);
}

double Grid::wavenumber1(int m) const { return 2 * kPi / a1_.period * signed_mode(m, a1_.n); }

Field Grid::fft_axis1(const Field& f) const {
  if (!plans_->fwd1) throw PreconditionError("axis 1 is not periodic");
  Field out(size());
  fftw_execute_dft(plans_->fwd1, as_fftw(f.data()), as_fftw(out.data()));
  return out;
}

Field Grid::ifft_axis1(const Field& f) const {
  if (!plans_->bwd1) throw PreconditionError("axis 1 is not periodic");
  Field out(size());
  fftw_execute_dft(plans_->bwd1, as_fftw(f.data()), as_fftw(out.data()));
  return out / static_cast<double>(n1());
}

}  // namespace wplab
