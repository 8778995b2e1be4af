#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reebforge/poly.hpp"

namespace reebforge {

/// Raised when a construction step would produce an illegal domain.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Box {
  std::vector<Rational> lo;
  std::vector<Rational> hi;

  std::size_t dim() const { return lo.size(); }
  std::vector<double> lo_d() const;
  std::vector<double> hi_d() const;
  friend bool operator==(const Box&, const Box&) = default;
};

/// sum_k (x_k - center_k)^2 / semiaxes_sq[k] <= 1.
struct Ellipsoid {
  std::vector<Rational> center;
  std::vector<Rational> semiaxes_sq;

  std::size_t dim() const { return center.size(); }
  /// sum (x_k - c_k)^2 / r_k - 1, positive outside.
  Polynomial factor() const;
  double semiaxis(std::size_t k) const;
  friend bool operator==(const Ellipsoid&, const Ellipsoid&) = default;
};

/// D = intersection of {f_j > 0}, with a stored interior witness and a
/// bounding box of its closure.
struct AlgebraicDomain {
  std::size_t ambient_dim = 0;
  std::vector<Polynomial> factors;
  std::vector<std::string> meta;  // provenance of each factor
  std::vector<Ellipsoid> holes;   // ellipsoids removed in this ambient space
  std::vector<Rational> witness;
  Box bbox;

  friend bool operator==(const AlgebraicDomain&, const AlgebraicDomain&) = default;
};

AlgebraicDomain ball(std::size_t n, std::vector<Rational> center, const Rational& radius);

struct HolePolicy {
  /// Required clearance; defaults to 1/10 of the smallest semiaxis involved.
  std::optional<double> margin;
  /// Surface directions are taken from a (2k+1)^d cube-surface lattice.
  int surface_resolution = 6;
};

/// Removes closed ellipsoids from `d`. Every hole must sit inside D and clear
/// the other holes and the boundary by the margin, else ConstructionError.
AlgebraicDomain remove_ellipsoids(const AlgebraicDomain& d, const std::vector<Ellipsoid>& holes,
                                  const HolePolicy& policy = {});

double default_margin(const AlgebraicDomain& d, const std::vector<Ellipsoid>& holes);

struct ValidationWitness {
  std::string check;
  std::vector<double> point;
  std::string detail;
};

struct ValidationReport {
  bool valid = false;
  bool nonsingular = false;
  bool disjoint = false;
  bool nonempty = false;
  bool bounded = false;
  bool connected = false;
  std::size_t components = 0;
  double min_factor_gradient = 0.0;
  std::vector<ValidationWitness> witnesses;
};

/// Grid checks at resolution `grid_step` (a fraction of each bounding-box
/// side): non-singular factor zero sets, pairwise disjointness, non-empty and
/// bounded, connected.
ValidationReport validate_domain(const AlgebraicDomain& d, double grid_step, double eps_ns = 1e-6);

/// All factors strictly positive at the witness (exact).
bool witness_is_interior(const AlgebraicDomain& d);

/// Deterministic interior point far from the factor zero sets, scanned on a
/// coarse rational lattice of the bounding box.
std::vector<Rational> choose_witness(const AlgebraicDomain& d);

/// Factors sorted by their text form, for order-independent comparison.
AlgebraicDomain canonical_sorted(const AlgebraicDomain& d);

}  // namespace reebforge
