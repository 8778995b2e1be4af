#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reebforge/domain.hpp"
#include "reebforge/lifting.hpp"
#include "reebforge/poly.hpp"
#include "reebforge/reeb_spec.hpp"

namespace reebforge {

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthesisParams {
  /// Radius of the starting ball; the shape picks a default when unset.
  std::optional<Rational> R;
  /// Number of times the layout may be rescaled after a failed validation.
  int max_escalations = 5;
  /// Grid resolution for checking low-dimensional starting domains; 0 skips.
  double validation_step = 1.0 / 128.0;
};

struct PlacedHole {
  /// -1 for the planar disks of a theta layout, else the lift stage.
  int stage = 0;
  /// Reeb edge (0-based) whose fiber the hole shapes; for theta, the corridor.
  int edge = 0;
  /// Normalized handle index it contributes to the fiber; 0 for planar disks.
  int handle_index = 0;
  Ellipsoid ellipsoid;
  friend bool operator==(const PlacedHole&, const PlacedHole&) = default;
};

struct Layout {
  Rational R;
  std::vector<Rational> t;
  std::vector<Rational> midpoints;
  /// Transverse semiaxis along x2 for every hole.
  Rational transverse;
  std::vector<PlacedHole> holes;
  /// Ellipsoids removed before lift i, in the ambient space of that stage.
  std::vector<std::vector<Ellipsoid>> schedule;
  friend bool operator==(const Layout&, const Layout&) = default;
};

/// Connected sum of `count` copies of S^index x S^{m - index}.
struct ManifoldDescription {
  int m = 0;
  std::vector<Handle> summands;
  std::string text;
  friend bool operator==(const ManifoldDescription&, const ManifoldDescription&) = default;
};

struct VerifyDefaults {
  std::optional<double> grid_step;
  std::optional<double> tol_f;
  std::optional<double> eps_ns;
  std::optional<int> slices_per_interval;
  friend bool operator==(const VerifyDefaults&, const VerifyDefaults&) = default;
};

struct Certificate {
  ValidatedSpec spec;
  Layout layout;
  /// Starting domain before any lift.
  AlgebraicDomain base;
  LiftTower tower;
  FactoredForm defining;
  Polynomial expanded{std::size_t{1}};
  std::size_t ambient = 0;
  std::vector<Rational> predicted_singular_values;
  std::vector<std::vector<Rational>> predicted_critical_points;
  std::size_t predicted_critical_count = 0;
  std::vector<FiberType> predicted_fibers;
  ManifoldDescription predicted_manifold;
  std::string function;
  /// "stated" when the construction guarantees a Morse projection, else "expected".
  std::string morse_claim;
  Box bbox;
  VerifyDefaults verify_defaults;
  std::vector<std::string> trace;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

Certificate synthesize_path(const ValidatedSpec& spec, const SynthesisParams& params = {});
Certificate synthesize_theta(const ValidatedSpec& spec, const SynthesisParams& params = {});
/// Unit disk in R^2 lifted m - 1 times: the round m-sphere.
Certificate synthesize_sphere(const ValidatedSpec& spec, const SynthesisParams& params = {});
Certificate synthesize(const ValidatedSpec& spec, const SynthesisParams& params = {});

ManifoldDescription predict_manifold(const Certificate& cert);

std::string describe_manifold(int m, const std::vector<Handle>& summands);

}  // namespace reebforge
