#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wplab {

using cplx = std::complex<double>;
using Field = Eigen::ArrayXcd;
using RField = Eigen::ArrayXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Parameter outside its admissible range (non-positive length, Im tau <= 0, |mu| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operands of incompatible tensor weight or grid.
class TypeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on numerical inputs that is checked at run time failed.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver failure. Carries the stage that failed and the residual history.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string stage, const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), residuals_(std::move(residuals)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::string stage_;
  std::vector<double> residuals_;
};

/// Sum with pairwise (cascade) reduction. Deterministic for a fixed input order.
double pairwise_sum(const double* data, std::size_t n);
cplx pairwise_sum(const cplx* data, std::size_t n);

inline double pairwise_sum(const RField& x) { return pairwise_sum(x.data(), static_cast<std::size_t>(x.size())); }
inline cplx pairwise_sum(const Field& x) { return pairwise_sum(x.data(), static_cast<std::size_t>(x.size())); }

}  // namespace wplab
