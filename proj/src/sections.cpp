#include "wplab/sections.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace wplab {

Section::Section(SurfacePtr surface, int weight, Field values)
    : surface_(std::move(surface)), weight_(weight), values_(std::move(values)) {
  if (!surface_) throw TypeError("section without surface");
  if (values_.size() != surface_->size()) throw TypeError("section values do not match the grid");
}

Section Section::zero(SurfacePtr surface, int weight) {
  int n = surface->size();
  return Section(std::move(surface), weight, Field::Zero(n));
}

void require_compatible(const Section& a, const Section& b) {
  if (a.weight() != b.weight())
    throw TypeError("weight mismatch: " + std::to_string(a.weight()) + " vs " + std::to_string(b.weight()));
  if (a.surface() != b.surface()) throw TypeError("sections live on different grids");
}

Section& Section::operator+=(const Section& o) {
  require_compatible(*this, o);
  values_ += o.values_;
  return *this;
}

Section& Section::operator-=(const Section& o) {
  require_compatible(*this, o);
  values_ -= o.values_;
  return *this;
}

Section operator+(Section a, const Section& b) { return a += b; }
Section operator-(Section a, const Section& b) { return a -= b; }
Section operator*(cplx c, Section a) { return a *= c; }
Section operator*(Section a, cplx c) { return a *= c; }

Section conj(const Section& s) { return Section(s.surface(), -s.weight(), s.values().conjugate()); }

Section times(const Field& f, Section s) {
  s.values() *= f;
  return s;
}

// K_r = lambda^{r-1} d lambda^{-r}
Section k_derivative(const Section& s, Flavor fl) {
  const ModelSurface& m = s.model();
  const int r = s.weight();
  const RField& lam = m.lambda();
  Field v = lam.pow(r - 1) * m.grid().dz(s.values() * lam.pow(-r), fl);
  return Section(s.surface(), r + 1, std::move(v));
}

// L_r = lambda^{-r-1} dbar lambda^{r}
Section l_derivative(const Section& s, Flavor fl) {
  const ModelSurface& m = s.model();
  const int r = s.weight();
  const RField& lam = m.lambda();
  Field v = lam.pow(-r - 1) * m.grid().dzbar(s.values() * lam.pow(r), fl);
  return Section(s.surface(), r - 1, std::move(v));
}

Section laplacian(const Section& s, Flavor fl) {
  const int r = s.weight();
  Section out = 4.0 * l_derivative(k_derivative(s, fl), fl);
  out.values() += static_cast<double>(r * (r + 1)) * s.values();
  return out;
}

Section laplacian_kl(const Section& s, Flavor fl) {
  const int r = s.weight();
  Section out = 4.0 * k_derivative(l_derivative(s, fl), fl);
  out.values() += static_cast<double>(r * (r - 1)) * s.values();
  return out;
}

cplx inner_product(const Section& mu, const Section& nu) {
  require_compatible(mu, nu);
  Field f = mu.values() * nu.values().conjugate() * mu.model().hyperbolic_weights();
  return pairwise_sum(f);
}

cplx inner_product_valid(const Section& mu, const Section& nu) {
  require_compatible(mu, nu);
  Field f = mu.values() * nu.values().conjugate() * (mu.model().hyperbolic_weights() * mu.model().valid());
  return pairwise_sum(f);
}

cplx pair_with_quadratic(const Section& mu, const Field& phi) {
  if (mu.weight() != -2) throw TypeError("quadratic pairing needs a weight -2 section");
  if (phi.size() != mu.size()) throw TypeError("quadratic differential does not match the grid");
  Field f = mu.values() * phi * mu.grid().area_weights();
  return pairwise_sum(f);
}

double sup_norm(const Section& s) { return (s.values().abs() * s.model().valid()).maxCoeff(); }

double l2_norm(const Section& s) {
  RField f = s.values().abs2() * s.model().hyperbolic_weights() * s.model().valid();
  return std::sqrt(pairwise_sum(f));
}

namespace {

double l2sq(const Section& s) {
  double n = l2_norm(s);
  return n * n;
}

std::vector<std::vector<Section>> derivative_levels(const Section& s, int k) {
  std::vector<std::vector<Section>> lv{{s}};
  if (k >= 1) lv.push_back({k_derivative(s), l_derivative(s)});
  if (k >= 2) {
    const Section& ks = lv[1][0];
    const Section& ls = lv[1][1];
    lv.push_back({k_derivative(ks), l_derivative(ks), l_derivative(ls)});
  }
  return lv;
}

// Largest difference quotient over node pairs at dyadic offsets along each axis whose
// hyperbolic separation (lambda at the midpoint times chart distance) is at most 1.
double holder_quotient(const Section& s, double alpha) {
  const ModelSurface& m = s.model();
  const Grid& g = m.grid();
  const RField& valid = m.valid();
  const Field& v = s.values();
  double best = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    const Axis& ax = axis == 0 ? g.axis0() : g.axis1();
    for (int off = 1; off < ax.n / 2 + 1; off *= 2) {
      for (int i = 0; i < g.n0(); ++i)
        for (int j = 0; j < g.n1(); ++j) {
          int a = g.index(i, j);
          int i2 = i, j2 = j;
          if (axis == 0) i2 += off; else j2 += off;
          if (axis == 0 && i2 >= g.n0()) { if (!ax.periodic) continue; i2 -= g.n0(); }
          if (axis == 1 && j2 >= g.n1()) { if (!ax.periodic) continue; j2 -= g.n1(); }
          int b = g.index(i2, j2);
          if (valid[a] == 0.0 || valid[b] == 0.0) continue;
          double chart = 0.0;
          if (axis == 0) {
            chart = ax.periodic ? off * ax.h : std::abs(ax.x[i2] - ax.x[i]);
            chart *= std::abs(g.e0());
          } else {
            chart = off * ax.h * std::abs(g.e1());
          }
          double d = 0.5 * (m.lambda()[a] + m.lambda()[b]) * chart;
          if (d > 1.0 || d <= 0.0) continue;
          best = std::max(best, std::abs(v[a] - v[b]) / std::pow(d, alpha));
        }
    }
  }
  return best;
}

}  // namespace

double sobolev_norm(const Section& s, int k) {
  if (k < 0 || k > 2) throw PreconditionError("Sobolev norms are assembled for k <= 2");
  auto lv = derivative_levels(s, k);
  double sum = 0.0;
  for (const auto& level : lv)
    for (const auto& d : level) sum += l2sq(d);
  return std::sqrt(sum);
}

double holder_norm(const Section& s, int k, double alpha) {
  if (k < 0 || k > 2) throw PreconditionError("Holder norms are assembled for k <= 2");
  auto lv = derivative_levels(s, k);
  double sum = 0.0;
  for (const auto& level : lv) {
    double mx = 0.0;
    for (const auto& d : level) mx = std::max(mx, sup_norm(d));
    sum += mx;
  }
  double q = 0.0;
  for (const auto& d : lv.back()) q = std::max(q, holder_quotient(d, alpha));
  return sum + q;
}

NormReport norms(const Section& s, double alpha) {
  NormReport r;
  r.c0 = sup_norm(s);
  RField a = s.values().abs() * s.model().hyperbolic_weights() * s.model().valid();
  r.l1 = pairwise_sum(a);
  r.l2 = l2_norm(s);
  for (int k = 1; k <= 2; ++k) r.sobolev[k] = sobolev_norm(s, k);
  for (int k = 0; k <= 2; ++k) r.holder[{k, alpha}] = holder_norm(s, k, alpha);
  return r;
}

void write_json(std::ostream& os, const NormReport& r) {
  nlohmann::json j;
  j["c0"] = r.c0;
  j["l1"] = r.l1;
  j["l2"] = r.l2;
  for (const auto& [k, v] : r.sobolev) j["sobolev"][std::to_string(k)] = v;
  for (const auto& [key, v] : r.holder) {
    std::ostringstream name;
    name << key.first << "," << key.second;
    j["holder"][name.str()] = v;
  }
  os << j.dump(2) << "\n";
}

void write_csv(std::ostream& os, const Section& s) {
  const Grid& g = s.grid();
  RField w = s.model().hyperbolic_weights();
  os << "# weight " << s.weight() << "\n";
  os << "x,y,re,im,quad_weight\n";
  os << std::setprecision(17);
  for (int k = 0; k < s.size(); ++k) {
    cplx z = g.point(k);
    os << z.real() << "," << z.imag() << "," << s.values()[k].real() << "," << s.values()[k].imag() << "," << w[k]
       << "\n";
  }
}

}  // namespace wplab
