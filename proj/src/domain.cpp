#include "reebforge/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reebforge/grid.hpp"
#include "reebforge/numeric.hpp"

namespace reebforge {

namespace {

std::string point_string(const std::vector<double>& p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

std::vector<double> to_doubles(const std::vector<Rational>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& q : v) out.push_back(q.get_d());
  return out;
}

/// Unit directions from the surface of the cube {-k..k}^d, normalised.
std::vector<std::vector<double>> sphere_directions(std::size_t d, int k) {
  // Keep the sample count manageable in higher dimensions.
  while (k > 2 && std::pow(2.0 * k + 1.0, static_cast<double>(d)) > 40000.0) --k;
  const int side = 2 * k + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(side);
  std::vector<std::vector<double>> dirs;
  std::vector<int> c(d);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t r = code;
    int maxabs = 0;
    for (std::size_t i = 0; i < d; ++i) {
      c[i] = static_cast<int>(r % side) - k;
      r /= side;
      maxabs = std::max(maxabs, std::abs(c[i]));
    }
    if (maxabs != k) continue;
    double norm = 0.0;
    for (int v : c) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    std::vector<double> u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = c[i] / norm;
    dirs.push_back(std::move(u));
  }
  return dirs;
}

std::string describe_ellipsoid(const Ellipsoid& e) {
  std::ostringstream os;
  os << "ellipsoid center=(";
  for (std::size_t i = 0; i < e.center.size(); ++i)
    os << (i ? "," : "") << rational_to_string(e.center[i]);
  os << ") semiaxes_sq=(";
  for (std::size_t i = 0; i < e.semiaxes_sq.size(); ++i)
    os << (i ? "," : "") << rational_to_string(e.semiaxes_sq[i]);
  os << ")";
  return os.str();
}

}  // namespace

std::vector<double> Box::lo_d() const { return to_doubles(lo); }
std::vector<double> Box::hi_d() const { return to_doubles(hi); }

Polynomial Ellipsoid::factor() const {
  const std::size_t n = center.size();
  if (semiaxes_sq.size() != n) throw std::invalid_argument("ellipsoid center/semiaxes mismatch");
  Polynomial f = Polynomial::constant(n, Rational(-1));
  for (std::size_t k = 0; k < n; ++k) {
    if (sgn(semiaxes_sq[k]) <= 0) throw std::invalid_argument("ellipsoid semiaxes must be positive");
    Polynomial shifted = Polynomial::variable(n, k) - Polynomial::constant(n, center[k]);
    f += (shifted * shifted) * Rational(1 / semiaxes_sq[k]);
  }
  return f;
}

double Ellipsoid::semiaxis(std::size_t k) const { return std::sqrt(semiaxes_sq[k].get_d()); }

AlgebraicDomain ball(std::size_t n, std::vector<Rational> center, const Rational& radius) {
  if (n == 0) throw std::invalid_argument("ball dimension must be positive");
  if (center.size() != n) throw std::invalid_argument("ball center has wrong dimension");
  if (sgn(radius) <= 0) throw std::invalid_argument("ball radius must be positive");
  AlgebraicDomain d;
  d.ambient_dim = n;
  Polynomial f = Polynomial::constant(n, radius * radius);
  for (std::size_t k = 0; k < n; ++k) {
    Polynomial shifted = Polynomial::variable(n, k) - Polynomial::constant(n, center[k]);
    f -= shifted * shifted;
  }
  d.factors.push_back(std::move(f));
  std::ostringstream os;
  os << "ball radius=" << rational_to_string(radius);
  d.meta.push_back(os.str());
  d.witness = center;
  for (std::size_t k = 0; k < n; ++k) {
    d.bbox.lo.push_back(center[k] - radius);
    d.bbox.hi.push_back(center[k] + radius);
  }
  return d;
}

double default_margin(const AlgebraicDomain& d, const std::vector<Ellipsoid>& holes) {
  double smallest = std::numeric_limits<double>::infinity();
  auto scan = [&](const Ellipsoid& e) {
    for (std::size_t k = 0; k < e.dim(); ++k) smallest = std::min(smallest, e.semiaxis(k));
  };
  for (const auto& e : d.holes) scan(e);
  for (const auto& e : holes) scan(e);
  return std::isfinite(smallest) ? smallest / 10.0 : 0.0;
}

bool witness_is_interior(const AlgebraicDomain& d) {
  if (d.witness.size() != d.ambient_dim) return false;
  for (const auto& f : d.factors)
    if (sgn(f.eval(d.witness)) <= 0) return false;
  return true;
}

std::vector<Rational> choose_witness(const AlgebraicDomain& d) {
  const std::size_t n = d.ambient_dim;
  std::size_t per_axis = n <= 2 ? 41 : n == 3 ? 17 : n == 4 ? 9 : n == 5 ? 7 : 5;
  std::vector<NumericPolynomial> values;
  std::vector<std::vector<NumericPolynomial>> grads;
  for (const auto& f : d.factors) {
    values.emplace_back(f);
    std::vector<NumericPolynomial> g;
    for (std::size_t k = 0; k < n; ++k) g.emplace_back(f.derivative(k));
    grads.push_back(std::move(g));
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= per_axis;

  std::vector<Rational> best;
  double best_score = -1.0;
  std::vector<Rational> q(n);
  std::vector<double> x(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t r = code;
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<long>(r % per_axis);
      r /= per_axis;
      Rational frac(mpz_class(i), mpz_class(static_cast<long>(per_axis - 1)));
      frac.canonicalize();
      q[k] = d.bbox.lo[k] + (d.bbox.hi[k] - d.bbox.lo[k]) * frac;
      x[k] = q[k].get_d();
    }
    double score = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < values.size() && score > 0.0; ++j) {
      const double v = values[j].eval(x);
      if (!(v > 0.0)) {
        score = 0.0;
        break;
      }
      double g2 = 0.0;
      for (const auto& gk : grads[j]) {
        const double c = gk.eval(x);
        g2 += c * c;
      }
      score = std::min(score, g2 > 0.0 ? v / std::sqrt(g2) : v);
    }
    if (score > best_score + 1e-12) {
      AlgebraicDomain probe;
      probe.ambient_dim = n;
      probe.factors = d.factors;
      probe.witness = q;
      if (score > 0.0 && witness_is_interior(probe)) {
        best_score = score;
        best = q;
      }
    }
  }
  if (best.empty()) throw ConstructionError("domain has no interior point on the witness lattice");
  return best;
}

AlgebraicDomain remove_ellipsoids(const AlgebraicDomain& d, const std::vector<Ellipsoid>& holes,
                                  const HolePolicy& policy) {
  const std::size_t n = d.ambient_dim;
  for (std::size_t h = 0; h < holes.size(); ++h) {
    if (holes[h].dim() != n || holes[h].semiaxes_sq.size() != n)
      throw std::invalid_argument("hole " + std::to_string(h) + " has wrong dimension");
    for (const auto& r : holes[h].semiaxes_sq)
      if (sgn(r) <= 0) throw std::invalid_argument("hole " + std::to_string(h) + " has a non-positive semiaxis");
  }
  const double margin = policy.margin.value_or(default_margin(d, holes));

  std::vector<NumericPolynomial> domain_factors;
  for (const auto& f : d.factors) domain_factors.emplace_back(f);
  std::vector<Polynomial> hole_factors;
  std::vector<NumericPolynomial> hole_numeric;
  for (const auto& h : holes) {
    hole_factors.push_back(h.factor());
    hole_numeric.emplace_back(hole_factors.back());
  }
  std::vector<NumericPolynomial> old_holes;
  for (const auto& h : d.holes) old_holes.emplace_back(h.factor());

  const auto dirs = sphere_directions(n, policy.surface_resolution);
  std::vector<double> p(n);
  for (std::size_t a = 0; a < holes.size(); ++a) {
    const auto center = to_doubles(holes[a].center);
    for (std::size_t j = 0; j < domain_factors.size(); ++j) {
      if (!(domain_factors[j].eval(center) > 0.0))
        throw ConstructionError("hole " + std::to_string(a) + " center lies outside the domain (factor " +
                                std::to_string(j) + ")");
    }
    for (std::size_t b = 0; b < holes.size(); ++b) {
      if (b == a) continue;
      if (!(hole_numeric[b].eval(center) > 0.0))
        throw ConstructionError("holes " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
    }
    for (std::size_t b = 0; b < old_holes.size(); ++b) {
      if (!(hole_numeric[a].eval(to_doubles(d.holes[b].center)) > 0.0))
        throw ConstructionError("hole " + std::to_string(a) + " swallows existing hole " + std::to_string(b));
    }
    for (const auto& u : dirs) {
      for (std::size_t k = 0; k < n; ++k) p[k] = center[k] + (holes[a].semiaxis(k) + margin) * u[k];
      for (std::size_t j = 0; j < domain_factors.size(); ++j) {
        if (!(domain_factors[j].eval(p) > 0.0))
          throw ConstructionError("hole " + std::to_string(a) + " does not clear factor " + std::to_string(j) +
                                  " (" + d.meta[j] + ") by margin " + std::to_string(margin) + " near " +
                                  point_string(p));
      }
      for (std::size_t b = 0; b < holes.size(); ++b) {
        if (b == a) continue;
        if (!(hole_numeric[b].eval(p) > 0.0))
          throw ConstructionError("holes " + std::to_string(a) + " and " + std::to_string(b) +
                                  " are closer than margin " + std::to_string(margin) + " near " +
                                  point_string(p));
      }
    }
  }

  AlgebraicDomain out = d;
  for (std::size_t a = 0; a < holes.size(); ++a) {
    out.factors.push_back(hole_factors[a]);
    out.meta.push_back(describe_ellipsoid(holes[a]));
    out.holes.push_back(holes[a]);
  }
  if (!witness_is_interior(out)) out.witness = choose_witness(out);
  return out;
}

ValidationReport validate_domain(const AlgebraicDomain& d, double grid_step, double eps_ns) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
  const std::size_t n = d.ambient_dim;
  auto lo = d.bbox.lo_d();
  auto hi = d.bbox.hi_d();
  for (std::size_t k = 0; k < n; ++k) {
    const double pad = 0.05 * (hi[k] - lo[k]);
    lo[k] -= pad;
    hi[k] += pad;
  }
  const GridBox grid = GridBox::with_fraction(lo, hi, grid_step);
  const auto axes = grid.axes();
  std::vector<std::size_t> node_shape, cell_shape;
  for (auto c : grid.cells) {
    node_shape.push_back(c + 1);
    cell_shape.push_back(c);
  }
  const Lattice nodes(node_shape);
  const Lattice cells(cell_shape);

  std::vector<std::vector<double>> values(d.factors.size());
  for (std::size_t j = 0; j < d.factors.size(); ++j)
    GridEvaluator(NumericPolynomial(d.factors[j])).evaluate(axes, values[j]);

  ValidationReport report;
  std::vector<std::size_t> multi(n);
  auto node_point = [&](std::size_t idx) {
    nodes.unravel(idx, multi);
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = axes[k][multi[k]];
    return p;
  };
  auto cell_center = [&](std::size_t idx) {
    cells.unravel(idx, multi);
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = axes[k][multi[k]] + 0.5 * grid.step(k);
    return p;
  };

  std::vector<char> inside(nodes.size(), 1);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& v : values)
      if (!(v[i] > 0.0)) {
        inside[i] = 0;
        break;
      }

  report.nonempty = std::any_of(inside.begin(), inside.end(), [](char c) { return c != 0; });
  if (!report.nonempty) report.witnesses.push_back({"nonempty", {}, "no grid node lies in D"});

  report.bounded = true;
  for (std::size_t i = 0; i < nodes.size() && report.bounded; ++i) {
    if (!inside[i]) continue;
    nodes.unravel(i, multi);
    for (std::size_t k = 0; k < n; ++k) {
      if (multi[k] == 0 || multi[k] == grid.cells[k]) {
        report.bounded = false;
        report.witnesses.push_back({"bounded", node_point(i), "D reaches the padded bounding box"});
        break;
      }
    }
  }

  std::size_t count = 0;
  const auto labels = label_components(nodes, inside, false, count);
  report.components = count;
  report.connected = count == 1;
  if (count > 1) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (labels[i] == 1) {
        report.witnesses.push_back({"connected", node_point(i), std::to_string(count) + " components"});
        break;
      }
  }

  std::vector<std::vector<char>> crossings;
  for (const auto& v : values) crossings.push_back(sign_change_cells(nodes, cells, v));

  report.nonsingular = true;
  report.min_factor_gradient = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d.factors.size(); ++j) {
    std::vector<NumericPolynomial> grad;
    for (std::size_t k = 0; k < n; ++k) grad.emplace_back(d.factors[j].derivative(k));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!crossings[j][c]) continue;
      const auto p = cell_center(c);
      double g2 = 0.0;
      for (const auto& g : grad) {
        const double v = g.eval(p);
        g2 += v * v;
      }
      const double norm = std::sqrt(g2);
      report.min_factor_gradient = std::min(report.min_factor_gradient, norm);
      if (norm < eps_ns && report.nonsingular) {
        report.nonsingular = false;
        report.witnesses.push_back({"nonsingular", p, "factor " + std::to_string(j) + " has small gradient"});
      }
    }
  }

  report.disjoint = true;
  for (std::size_t a = 0; a < d.factors.size(); ++a) {
    for (std::size_t b = a + 1; b < d.factors.size(); ++b) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (crossings[a][c] && crossings[b][c]) {
          report.disjoint = false;
          report.witnesses.push_back({"disjoint", cell_center(c),
                                      "zero sets of factors " + std::to_string(a) + " and " +
                                          std::to_string(b) + " meet"});
          break;
        }
      }
    }
  }

  report.valid = report.nonempty && report.bounded && report.connected && report.nonsingular && report.disjoint;
  return report;
}

AlgebraicDomain canonical_sorted(const AlgebraicDomain& d) {
  std::vector<std::size_t> order(d.factors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> keys;
  for (const auto& f : d.factors) keys.push_back(to_text(f));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  AlgebraicDomain out = d;
  out.factors.clear();
  out.meta.clear();
  for (auto i : order) {
    out.factors.push_back(d.factors[i]);
    out.meta.push_back(d.meta[i]);
  }
  std::vector<std::string> hole_keys;
  for (const auto& h : d.holes) hole_keys.push_back(to_text(h.factor()));
  std::vector<std::size_t> hole_order(d.holes.size());
  for (std::size_t i = 0; i < hole_order.size(); ++i) hole_order[i] = i;
  std::stable_sort(hole_order.begin(), hole_order.end(),
                   [&](std::size_t a, std::size_t b) { return hole_keys[a] < hole_keys[b]; });
  out.holes.clear();
  for (auto i : hole_order) out.holes.push_back(d.holes[i]);
  return out;
}

}  // namespace reebforge
