#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wplab/grid.hpp"
#include "wplab/solve_report.hpp"

namespace wplab {

enum class SurfaceKind { Disk, PuncturedDisk, Collar, PuncturedTorus };

std::string to_string(SurfaceKind k);
SurfaceKind surface_kind_from_string(const std::string& s);

struct SurfaceParams {
  double ell = 0.5;        // collar core length
  cplx tau{0.0, 1.0};      // torus modulus
};

/// Cutoffs for non-compact ends and the excluded node sets. Bounded chart ranges are in the
/// log coordinate s for Disk and PuncturedDisk; the collar range follows the injectivity rule.
struct Truncation {
  double disk_r_min = 0.05, disk_r_max = 0.9;
  double pdisk_s_min = -6.0, pdisk_s_max = -0.25;
  double collar_width = 1.0;  // injectivity radius at the collar boundary
  int boundary_ring = 8;      // nodes excluded at each end of a bounded axis
  int cusp_ring = 1;          // node layers excluded around the puncture cell
  double partition_fraction = 0.25;
  int max_newton = 50;
  double newton_tol = 1e-10;
};

/// Value and chart derivatives (d/dz, d2/dz2, d2/dz dzbar) of a real function at a point.
struct PointJet {
  double v = 0.0;
  cplx z{}, zz{};
  double zzbar = 0.0;
};

/// Reference log-density on the torus. Inside r0/2 of the puncture it is the exact cusp profile
/// -log r - log(log(1/r) + b); outside r0 it is G - log S(G + b), G the flat-torus Green's function
/// normalized as -log r + o(1) at the puncture and S a positive smooth floor of its argument.
/// A smooth radial partition of unity glues the two. The cusp scale b is solved for.
struct CuspReference {
  cplx puncture;
  cplx tau{0.0, 1.0};
  double r0 = 0.25;
  double scale = 0.0;  // b
  double floor_level = 0.5, floor_width = 0.25;

  PointJet evaluate(cplx displacement) const;
  /// Same, reusing the Green's function jet at the point.
  PointJet evaluate(cplx displacement, const PointJet& green) const;
  /// Exact cusp density 1 / (r (log(1/r) + b)).
  double cusp_density(double r) const;
  /// Area of chi(r) times the cusp density squared over the punctured disk of radius r0.
  double cusp_area() const;
  /// Partition-of-unity weight of the cusp profile.
  double cusp_weight(double r) const;
};

/// Minimal-image displacement z - zp on the lattice generated by 1 and tau.
cplx lattice_displacement(cplx z, cplx zp, cplx tau);

/// Reference log-density sampled on a torus grid together with its chart derivatives and
/// the cusp-scale derivative (value and flat Laplacian).
struct ReferenceFields {
  RField value, laplacian;
  Field dz, dzz;
  RField scale_value, scale_laplacian;  // derivatives with respect to the cusp scale
};
ReferenceFields evaluate_reference(const Grid& grid, cplx tau, const CuspReference& ref);

struct TorusMetric {
  CuspReference reference;
  RField correction;  // w: log lambda = reference + w
  SolveReport report;
};

/// A model surface on a single chart, immutable after construction.
class ModelSurface {
 public:
  SurfaceKind kind() const { return kind_; }
  const SurfaceParams& params() const { return params_; }
  const Truncation& truncation() const { return trunc_; }
  int resolution() const { return resolution_; }
  const Grid& grid() const { return grid_; }
  int size() const { return grid_.size(); }

  const RField& lambda() const { return lambda_; }
  const RField& log_lambda() const { return phi_; }
  /// Derivatives of log lambda in the chart: d/dz, d2/dz2, d2/dz dzbar.
  const Field& phi_z() const { return phi_z_; }
  const Field& phi_zz() const { return phi_zz_; }
  const RField& phi_zzbar() const { return phi_zzbar_; }

  /// 1 on nodes used for sup norms and residuals, 0 on excluded rings.
  const RField& valid() const { return valid_; }
  /// Quadrature weights for the hyperbolic area element.
  RField hyperbolic_weights() const { return grid_.area_weights() * lambda_.square(); }
  double excluded_area() const { return excluded_area_; }
  std::string truncation_summary() const;

  /// Density at an arbitrary chart point (closed form, or reference plus interpolated correction).
  double density_chart(cplx w) const;
  /// Unit phase of dz/dw at the nodes, mapping chart section values to the ambient model coordinate.
  Field ambient_phase() const;
  /// Ambient model coordinate of a chart point (z = exp(w) for Disk and PuncturedDisk).
  cplx ambient_point(cplx w) const;

  const std::optional<TorusMetric>& torus_metric() const { return torus_; }
  /// Axis-0 half-extent of the collar chart in the cylinder coordinate s.
  double collar_s_max() const { return collar_s_max_; }

 private:
  friend std::shared_ptr<const ModelSurface> construct_model(SurfaceKind, const SurfaceParams&, int,
                                                            const Truncation&);
  ModelSurface(SurfaceKind k, SurfaceParams p, Truncation t, int res, Grid g)
      : kind_(k), params_(p), trunc_(t), resolution_(res), grid_(std::move(g)) {}

  void set_cylinder_density();
  void set_valid_mask();

  SurfaceKind kind_;
  SurfaceParams params_;
  Truncation trunc_;
  int resolution_;
  Grid grid_;
  RField lambda_, phi_, phi_zzbar_, valid_;
  Field phi_z_, phi_zz_;
  double excluded_area_ = 0.0;
  double collar_s_max_ = 0.0;
  std::optional<TorusMetric> torus_;
};

using SurfacePtr = std::shared_ptr<const ModelSurface>;

SurfacePtr construct_model(SurfaceKind kind, const SurfaceParams& params, int resolution,
                           const Truncation& trunc = {});

/// Closed-form density in the ambient model coordinate (Disk: 2/(1-|z|^2), PuncturedDisk:
/// 1/(|z| |log|z||), Collar: cylinder formula). Torus: chart density.
double density_at(const ModelSurface& s, cplx z);

/// Interval [lo, hi] of the bounded chart axis (cylinder coordinate s, or log radius).
struct AxisRegion {
  double lo, hi;
};

double hyperbolic_area(const ModelSurface& s);
double hyperbolic_area(const ModelSurface& s, const AxisRegion& region);

/// Gauss curvature -lambda^-2 4 d dbar log lambda from grid derivatives of log lambda. On the torus the
/// correction field is interpolated to the cell centres, points the base solver never sees.
RField gauss_curvature(const ModelSurface& s);
/// Point at which gauss_curvature samples entry k.
cplx curvature_sample_point(const ModelSurface& s, int k);

double trace_to_length(double trace);

/// Closed polygon in the chart; vertex n is identified with vertex 0 translated by `shift`.
struct ClosedCurve {
  std::vector<cplx> vertices;
  cplx shift;
};

struct GeodesicResult {
  double length = 0.0;
  int iterations = 0;
  std::vector<double> history;
  ClosedCurve curve;
};

double curve_length(const ModelSurface& s, const ClosedCurve& c);
GeodesicResult geodesic_length_numeric(const ModelSurface& s, ClosedCurve seed, int max_iterations = 4000,
                                       double tol = 1e-6);

/// Core circle of a collar, or the horizontal (1,0) curve at height q on the torus chart.
ClosedCurve core_curve(const ModelSurface& s, int vertices = 64, double offset = 0.5);

}  // namespace wplab
