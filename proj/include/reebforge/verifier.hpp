#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reebforge/grid.hpp"
#include "reebforge/poly.hpp"
#include "reebforge/synthesizer.hpp"

namespace reebforge {

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mesh export was asked for a fiber that is neither a curve nor a surface.
class UnsupportedMesh : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NewtonOptions {
  int max_iter = 30;
  double tol_f = 1e-9;
};

struct VerifyConfig {
  /// Cell size as a fraction of each box side, for slices and the ambient
  /// scan. Unset picks 1/200 in R^3 and below, 1/60 in R^4, 1/32 in R^5 and
  /// 1/16 beyond.
  std::optional<double> grid_step;
  /// Overrides grid_step for the ambient scan only.
  std::optional<double> ambient_step;
  double tol_f = 1e-9;
  double eps_ns = 1e-6;
  int slices_per_interval = 5;
  double tol_value = 1e-4;
  double fd_tolerance = 1e-5;
  std::size_t fd_points = 100;
  std::size_t max_samples = 20000;
  /// Width of the parallel slice map; 0 reads REEBFORGE_THREADS.
  unsigned threads = 0;
};

/// Default cell fraction for hypersurfaces in R^ambient_dim.
double default_grid_fraction(std::size_t ambient_dim);
unsigned configured_threads(unsigned requested);

struct SamplePoint {
  std::vector<double> coords;
  double residual = 0.0;
  double grad_norm = 0.0;
};

/// Sign-change cells of F on an ambient grid, with their centers.
struct ZeroSetScan {
  GridBox box;
  /// Cell centers, `box.dim()` coordinates each.
  std::vector<double> centers;

  std::size_t size() const { return box.dim() == 0 ? 0 : centers.size() / box.dim(); }
};

ZeroSetScan scan_zero_set(const Polynomial& F, const GridBox& box);

struct SampleResult {
  std::vector<SamplePoint> samples;
  std::size_t seeds = 0;
  std::size_t dropped = 0;
};

/// Newton-projects up to `max_samples` sign-change cell centers onto F = 0.
SampleResult sample_zero_set(const Polynomial& F, const ZeroSetScan& scan, const NewtonOptions& newton,
                             std::size_t max_samples = 20000);
SampleResult sample_zero_set(const Polynomial& F, const GridBox& box, const NewtonOptions& newton,
                             std::size_t max_samples = 20000);

struct NonsingularResult {
  double min_grad_norm = 0.0;
  bool pass = false;
};

NonsingularResult check_nonsingular(const std::vector<SamplePoint>& samples, double eps_ns = 1e-6);

struct CriticalPoint {
  std::vector<double> coords;
  double value = 0.0;
  /// F, then dF/dx_k for k >= 2.
  std::vector<double> residuals;
  double grad_norm = 0.0;
  /// Eigenvalues of the Hessian of F in the directions transverse to x1.
  std::vector<double> transverse_hessian;
};

/// Solves F = 0, dF/dx_k = 0 (k >= 2) by damped Newton from grid seeds and
/// merges duplicates. Points where grad F vanishes are discarded.
std::vector<CriticalPoint> find_critical_points(const Polynomial& F, const ZeroSetScan& scan,
                                                const NewtonOptions& newton, double eps_ns = 1e-6);
std::vector<CriticalPoint> find_critical_points(const Polynomial& F, const GridBox& box,
                                                const NewtonOptions& newton, double eps_ns = 1e-6);

struct SliceComponent {
  std::size_t cells = 0;
  std::vector<double> centroid;
  std::optional<int> euler;
};

struct Slice {
  Rational t;
  GridBox box;
  std::vector<SliceComponent> components;
  /// Per cell: owning component of the positive region touching it, or -1.
  std::vector<std::int32_t> footprint;
  /// Two fiber components shared one positive region.
  bool ambiguous = false;
};

/// Components of {F(t, .) = 0} on `slice_box` (the box without the x1 axis),
/// found by flood fill over sign-change cells with full neighbourhoods.
Slice slice_components(const Polynomial& F, const Rational& t, const GridBox& slice_box, bool keep_footprint = false);

struct ReebVertex {
  double value = 0.0;
  int sweep_index = 0;
  int degree = 0;
};

struct ReebEdge {
  int from = 0;
  int to = 0;
  int interval = 0;
  /// Component index in each slice of the interval.
  std::vector<int> track;
  std::vector<double> centroid;
};

struct SliceSummary {
  double t = 0.0;
  int interval = 0;
  std::vector<SliceComponent> components;
};

struct ExtractedReeb {
  std::vector<SliceSummary> slices;
  std::vector<ReebVertex> vertices;
  std::vector<ReebEdge> edges;
  std::vector<int> interval_counts;
  /// Slice cell fraction actually used per interval (after any refinement).
  std::vector<double> interval_fraction;

  std::vector<int> sorted_degrees() const;
};

struct SweepOptions {
  int slices_per_interval = 5;
  double grid_step = 0.0;
  unsigned threads = 1;
};

/// Slice box for a certificate: its bounding box without x1, padded a little
/// and kept symmetric about the origin.
GridBox slice_box_for(const Certificate& cert, double fraction);
GridBox ambient_box_for(const Certificate& cert, double fraction);

/// Guard band around the predicted singular values.
Rational guard_band(const std::vector<Rational>& values);
/// Slice positions in the guard-banded interval (t_j, t_{j+1}).
std::vector<Rational> sweep_positions(const Rational& lo, const Rational& hi, const Rational& guard, int count);

ExtractedReeb extract_reeb(const Polynomial& F, const std::vector<Rational>& values, const GridBox& slice_box,
                           const SweepOptions& sweep);

struct EulerComponent {
  std::vector<double> centroid;
  std::size_t cells = 0;
  int euler = 0;
};

/// Euler characteristic of each fiber component by marching tetrahedra.
/// Needs a three-dimensional slice box.
std::vector<EulerComponent> fiber_euler(const Polynomial& F, const Rational& t, const GridBox& slice_box);

struct SliceMesh {
  std::size_t dim = 0;  // 2: polylines, 3: triangles
  std::vector<std::vector<double>> vertices;
  std::vector<std::vector<std::size_t>> elements;
};

SliceMesh slice_mesh(const Polynomial& F, const Rational& t, const GridBox& slice_box);
std::string to_obj(const SliceMesh& mesh, double t);
std::string sweep_csv(const ExtractedReeb& reeb);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  bool passed = false;
  std::vector<CheckResult> checks;
  std::size_t sample_count = 0;
  double min_grad_norm = 0.0;
  std::vector<CriticalPoint> critical_points;
  std::optional<ExtractedReeb> reeb;
  /// Per interval, Euler characteristics of the midslice components in
  /// x2 order; empty unless fibers are surfaces.
  std::vector<std::vector<int>> euler_profile;
  double seconds = 0.0;

  std::vector<std::string> failed_checks() const;
  const CheckResult* find(const std::string& name) const;
};

VerificationReport verify(const Certificate& cert, const VerifyConfig& config = {});

}  // namespace reebforge
