#pragma once

#include <cstddef>
#include <vector>

#include "reebforge/domain.hpp"
#include "reebforge/poly.hpp"

namespace reebforge {

/// Boundary of the lifted domain D' in R^{n'}: the zero set of
/// F = prod f_j - sum_{v > n} x_v^2 over the base domain D.
struct LiftedHypersurface {
  FactoredForm defining;
  std::size_t ambient_dim = 0;
  AlgebraicDomain base;
  std::vector<std::size_t> added_vars;
  /// Bounding box of the closure of D' (base box times [-r, r] per added var).
  Box bbox;
  std::vector<Rational> witness;

  friend bool operator==(const LiftedHypersurface&, const LiftedHypersurface&) = default;
};

LiftedHypersurface lift_once(const AlgebraicDomain& d, std::size_t n_prime);

/// D' as a domain with the single factor expand(F).
AlgebraicDomain lifted_domain(const LiftedHypersurface& lifted);

struct LiftStage {
  AlgebraicDomain domain;  // the base after this stage's holes were removed
  LiftedHypersurface lifted;
  friend bool operator==(const LiftStage&, const LiftStage&) = default;
};

struct LiftTower {
  std::vector<LiftStage> stages;
  std::size_t ambient_dim = 0;

  const LiftedHypersurface& top() const { return stages.back().lifted; }
  friend bool operator==(const LiftTower&, const LiftTower&) = default;
};

/// One stage per added dimension: remove `hole_schedule[i]`, then lift by one.
LiftTower lift_tower(const AlgebraicDomain& d0, const std::vector<std::vector<Ellipsoid>>& hole_schedule,
                     std::size_t target_ambient, const HolePolicy& policy = {});

/// Sampled upper bound for sqrt(max prod f_j) over D, rounded up to a
/// multiple of 1/16 with 10% slack.
Rational lift_radius(const AlgebraicDomain& d);

}  // namespace reebforge
