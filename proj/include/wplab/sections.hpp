#pragma once

#include <map>
#include <ostream>
#include <utility>

#include "wplab/models.hpp"

namespace wplab {

/// Grid-sampled tensor field of weight r: a section of kappa^(r/2) (x) conj(kappa)^(-r/2),
/// so |sigma| is chart independent. Values are stored in the surface chart.
class Section {
 public:
  Section(SurfacePtr surface, int weight, Field values);
  static Section zero(SurfacePtr surface, int weight);

  int weight() const { return weight_; }
  const Field& values() const { return values_; }
  Field& values() { return values_; }
  const SurfacePtr& surface() const { return surface_; }
  const ModelSurface& model() const { return *surface_; }
  const Grid& grid() const { return surface_->grid(); }
  int size() const { return static_cast<int>(values_.size()); }

  Section& operator+=(const Section& o);
  Section& operator-=(const Section& o);
  Section& operator*=(cplx c) {
    values_ *= c;
    return *this;
  }

 private:
  SurfacePtr surface_;
  int weight_;
  Field values_;
};

Section operator+(Section a, const Section& b);
Section operator-(Section a, const Section& b);
Section operator*(cplx c, Section a);
Section operator*(Section a, cplx c);
/// Complex conjugate, a section of weight -r.
Section conj(const Section& s);
/// Pointwise product with a function (weight unchanged).
Section times(const Field& f, Section s);

void require_compatible(const Section& a, const Section& b);

Section k_derivative(const Section& s, Flavor fl = Flavor::Accurate);
Section l_derivative(const Section& s, Flavor fl = Flavor::Accurate);
/// 4 L_{r+1} K_r + r(r+1).
Section laplacian(const Section& s, Flavor fl = Flavor::Accurate);
/// The second factorization 4 K_{r-1} L_r + r(r-1).
Section laplacian_kl(const Section& s, Flavor fl = Flavor::Accurate);

/// Hyperbolic L2 pairing sum(mu conj(nu) lambda^2 dA) over the whole grid.
cplx inner_product(const Section& mu, const Section& nu);
/// Same pairing restricted to valid nodes.
cplx inner_product_valid(const Section& mu, const Section& nu);
/// Chart pairing sum(mu * phi dA) of a weight -2 section with quadratic-differential data.
cplx pair_with_quadratic(const Section& mu, const Field& phi);

double sup_norm(const Section& s);
double l2_norm(const Section& s);

struct NormReport {
  double c0 = 0, l1 = 0, l2 = 0;
  std::map<int, double> sobolev;                   // k -> H^k norm
  std::map<std::pair<int, double>, double> holder; // (k, alpha) -> C^{k,alpha} norm
};

NormReport norms(const Section& s, double alpha = 0.5);
double sobolev_norm(const Section& s, int k);
double holder_norm(const Section& s, int k, double alpha);

void write_json(std::ostream& os, const NormReport& r);
void write_csv(std::ostream& os, const Section& s);

}  // namespace wplab
