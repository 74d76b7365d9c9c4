#pragma once

#include <map>
#include <string>
#include <vector>

namespace wplab {

/// Diagnostics of an elliptic solve. Residual figures are re-evaluated on the returned solution.
struct SolveReport {
  std::string stage;
  double residual_sup = 0.0;
  double residual_l2 = 0.0;
  int iterations = 0;
  int linear_iterations = 0;
  int n0 = 0, n1 = 0;
  std::string truncation;
  double excluded_area = 0.0;
  std::vector<double> history;  // residual sup per outer iteration
  std::map<std::string, double> extra;
};

}  // namespace wplab
