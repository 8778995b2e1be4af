#include "reebforge/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "reebforge/grid.hpp"
#include "reebforge/numeric.hpp"

namespace reebforge {

Rational lift_radius(const AlgebraicDomain& d) {
  const std::size_t n = d.ambient_dim;
  const std::size_t cells = n == 1 ? 2000 : n == 2 ? 200 : n == 3 ? 48 : n == 4 ? 20 : n == 5 ? 10 : 6;
  GridBox grid{d.bbox.lo_d(), d.bbox.hi_d(), std::vector<std::size_t>(n, cells)};
  const auto axes = grid.axes();
  std::vector<std::vector<double>> values(d.factors.size());
  for (std::size_t j = 0; j < d.factors.size(); ++j)
    GridEvaluator(NumericPolynomial(d.factors[j])).evaluate(axes, values[j]);

  double best = 0.0;
  const std::size_t total = grid.node_count();
  for (std::size_t i = 0; i < total; ++i) {
    double prod = 1.0;
    bool inside = true;
    for (const auto& v : values) {
      if (!(v[i] > 0.0)) {
        inside = false;
        break;
      }
      prod *= v[i];
    }
    if (inside) best = std::max(best, prod);
  }
  Rational at_witness = 1;
  for (const auto& f : d.factors) at_witness *= f.eval(d.witness);
  best = std::max(best, at_witness.get_d());

  const double r = 1.1 * std::sqrt(best);
  const auto sixteenths = static_cast<long>(std::ceil(r * 16.0));
  Rational out(mpz_class(std::max(1L, sixteenths)), mpz_class(16));
  out.canonicalize();
  return out;
}

LiftedHypersurface lift_once(const AlgebraicDomain& d, std::size_t n_prime) {
  const std::size_t n = d.ambient_dim;
  if (n_prime <= n) throw std::invalid_argument("lift target dimension must exceed the base dimension");
  if (d.factors.empty()) throw std::invalid_argument("cannot lift a domain without factors");
  if (!witness_is_interior(d)) throw ConstructionError("refusing to lift: witness is not interior to the domain");

  std::vector<Polynomial> factors;
  for (const auto& f : d.factors) factors.push_back(f.embed(n_prime));
  std::vector<std::size_t> added;
  for (std::size_t v = n; v < n_prime; ++v) added.push_back(v);

  LiftedHypersurface out{FactoredForm(std::move(factors), added, n_prime), n_prime, d, added, d.bbox, d.witness};
  const Rational r = lift_radius(d);
  for (std::size_t v = n; v < n_prime; ++v) {
    out.bbox.lo.push_back(-r);
    out.bbox.hi.push_back(r);
    out.witness.push_back(Rational(0));
  }
  return out;
}

AlgebraicDomain lifted_domain(const LiftedHypersurface& lifted) {
  AlgebraicDomain d;
  d.ambient_dim = lifted.ambient_dim;
  d.factors.push_back(lifted.defining.expand());
  d.meta.push_back("lift from dimension " + std::to_string(lifted.base.ambient_dim) + " with " +
                   std::to_string(lifted.base.factors.size()) + " factors");
  d.witness = lifted.witness;
  d.bbox = lifted.bbox;
  return d;
}

LiftTower lift_tower(const AlgebraicDomain& d0, const std::vector<std::vector<Ellipsoid>>& hole_schedule,
                     std::size_t target_ambient, const HolePolicy& policy) {
  if (target_ambient <= d0.ambient_dim)
    throw std::invalid_argument("lift tower needs at least one stage (target " + std::to_string(target_ambient) +
                                " <= base " + std::to_string(d0.ambient_dim) + ")");
  const std::size_t stages = target_ambient - d0.ambient_dim;
  if (hole_schedule.size() != stages)
    throw std::invalid_argument("hole schedule has " + std::to_string(hole_schedule.size()) +
                                " entries, expected " + std::to_string(stages));
  LiftTower tower;
  tower.ambient_dim = target_ambient;
  AlgebraicDomain current = d0;
  for (std::size_t i = 0; i < stages; ++i) {
    try {
      if (!hole_schedule[i].empty()) current = remove_ellipsoids(current, hole_schedule[i], policy);
      LiftedHypersurface lifted = lift_once(current, current.ambient_dim + 1);
      AlgebraicDomain next = lifted_domain(lifted);
      tower.stages.push_back({std::move(current), std::move(lifted)});
      current = std::move(next);
    } catch (const ConstructionError& e) {
      throw ConstructionError("stage " + std::to_string(i) + ": " + e.what());
    }
  }
  return tower;
}

}  // namespace reebforge
