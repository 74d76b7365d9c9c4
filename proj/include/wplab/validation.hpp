#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wplab/wp.hpp"

namespace wplab {

/// One measured figure of a check against its limit.
struct Metric {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<", "<=", ">", ">=", "in", or "" for report-only figures
  double upper = 0.0;    // upper end when relation is "in"
  bool asserted() const { return !relation.empty(); }
  bool ok() const;
};

/// Rows of a CSV table attached to a check.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckResult {
  int id = 0;
  std::string name;
  std::vector<Metric> metrics;
  std::vector<Table> tables;
  std::string error;  // set when the check threw
  bool passed() const;
  std::string summary() const;
};

struct ValidationSettings {
  std::uint64_t seed = 7;
  int threads = 1;
  Truncation truncation{};
  std::vector<int> refinement{64, 128, 256};  // operator identities
  int greens_resolution = 128;
  int random_fields = 100;
  int curvature_resolution = 256;  // prescribed-curvature checks on the collar
  int metric_resolution = 256;     // base metric of the square torus
  int frame_resolution = 128;
  std::vector<double> collar_lengths{0.5, 0.25, 0.125, 0.0625, 0.03125};
  int collar_resolution = 128;
  int wp_resolution = 64, wp_fine_resolution = 128;
  std::vector<double> pinch_heights{2, 4, 8, 16};
  int pinch_resolution = 64;
  double fd_step = 0.02;
};

/// Smooth random section: a bump away from punctures and chart ends times a random
/// low-frequency trigonometric polynomial.
Section smooth_test_section(const SurfacePtr& s, int weight, std::uint64_t seed);

/// Holomorphic sectional curvature of the WP metric at the base point of the torus tau = i * height.
struct PinchPoint {
  double height = 0.0, systole = 0.0, curvature = 0.0, symmetry = 0.0, noise = 0.0;
};
PinchPoint torus_curvature(double height, int resolution, const ValidationSettings& v, double sign, int threads);

CheckResult check_operator_identities(const ValidationSettings& v);
CheckResult check_greens_operator(const ValidationSettings& v);
CheckResult check_curvature_solver(const ValidationSettings& v);
CheckResult check_base_metric(const ValidationSettings& v);
CheckResult check_omega_frame(const ValidationSettings& v);
CheckResult check_norm_comparison(const ValidationSettings& v);
CheckResult check_wp_metric(const ValidationSettings& v);
CheckResult check_wp_curvature(const ValidationSettings& v);
CheckResult check_rauch(const ValidationSettings& v);

/// Runs check `id` (1..9), converting exceptions into a failed result.
CheckResult run_check(int id, const ValidationSettings& v);

}  // namespace wplab
