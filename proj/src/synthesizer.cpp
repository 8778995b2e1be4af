#include "reebforge/synthesizer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace reebforge {

namespace {

struct HoleRequest {
  int stage;
  int edge;
  int handle_index;
};

Rational ratio(long n, long d) {
  Rational r{mpz_class(n), mpz_class(d)};
  r.canonicalize();
  return r;
}

Rational pow2_inverse(int k) { return ratio(1, 1L << k); }

std::string q(const Rational& r) { return rational_to_string(r); }

/// Stages that carry holes: stage i realizes handle index i + 1, and only
/// while i + 1 <= (m - 1) / 2.
bool stage_has_holes(int i, int m) { return 2 * (i + 1) <= m - 1; }

Ellipsoid make_hole(std::size_t dim, const Rational& x0, const Rational& y, const Rational& rho,
                    const Rational& sigma) {
  Ellipsoid e;
  e.center.assign(dim, Rational(0));
  e.center[0] = x0;
  e.center[1] = y;
  e.semiaxes_sq.assign(dim, sigma * sigma);
  e.semiaxes_sq[0] = rho * rho;
  return e;
}

std::vector<Rational> padded(const std::vector<Rational>& p, std::size_t dim) {
  std::vector<Rational> out = p;
  out.resize(dim, Rational(0));
  return out;
}

void check_stage_domains(const LiftTower& tower, const SynthesisParams& params) {
  if (!(params.validation_step > 0.0)) return;
  for (std::size_t i = 0; i < tower.stages.size(); ++i) {
    const auto& d = tower.stages[i].domain;
    if (d.ambient_dim > 3) continue;
    const ValidationReport rep = validate_domain(d, params.validation_step);
    if (!rep.valid) {
      std::string why = rep.witnesses.empty() ? "unknown" : rep.witnesses.front().check + ": " +
                                                               rep.witnesses.front().detail;
      throw ConstructionError("stage " + std::to_string(i) + " domain failed grid validation (" + why + ")");
    }
  }
}

/// Fills the parts of the certificate that follow from the layout and tower.
Certificate finish(const ValidatedSpec& spec, Layout layout, AlgebraicDomain base, LiftTower tower,
                   std::vector<std::string> trace, std::string morse_claim) {
  Certificate c;
  c.spec = spec;
  c.ambient = static_cast<std::size_t>(spec.m) + 1;
  c.defining = tower.top().defining;
  c.expanded = c.defining.expand();
  c.bbox = tower.top().bbox;
  c.base = std::move(base);
  c.tower = std::move(tower);

  const std::size_t n = c.ambient;
  std::vector<std::pair<Rational, std::vector<Rational>>> crit;
  crit.push_back({-layout.R, padded({-layout.R}, n)});
  crit.push_back({layout.R, padded({layout.R}, n)});
  for (const auto& h : layout.holes) {
    const Rational& first_sq = h.ellipsoid.semiaxes_sq[0];
    // First semiaxes are exact squares of rationals by construction.
    mpz_class num, den;
    mpz_sqrt(num.get_mpz_t(), first_sq.get_num_mpz_t());
    mpz_sqrt(den.get_mpz_t(), first_sq.get_den_mpz_t());
    Rational a(num, den);
    a.canonicalize();
    for (int s : {-1, 1}) {
      std::vector<Rational> p = padded(h.ellipsoid.center, n);
      p[0] += s * a;
      crit.push_back({p[0], p});
    }
  }
  std::stable_sort(crit.begin(), crit.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  for (auto& [v, p] : crit) c.predicted_critical_points.push_back(std::move(p));
  c.predicted_critical_count = c.predicted_critical_points.size();
  c.predicted_singular_values = layout.t;

  const ExpectedReeb reeb = expected_reeb(spec, layout.t);
  for (const auto& e : reeb.edges) c.predicted_fibers.push_back(e.fiber);

  c.layout = std::move(layout);
  c.function = "projection to x1 restricted to {F = 0}";
  c.morse_claim = std::move(morse_claim);
  c.trace = std::move(trace);
  c.predicted_manifold = predict_manifold(c);
  return c;
}

std::string lift_trace(const LiftTower& tower) {
  std::ostringstream os;
  os << "lifts:";
  for (const auto& st : tower.stages) {
    os << " R^" << st.domain.ambient_dim << "->R^" << st.lifted.ambient_dim << " (" << st.domain.factors.size()
       << " factors)";
  }
  return os.str();
}

}  // namespace

std::string describe_manifold(int m, const std::vector<Handle>& summands) {
  std::vector<std::string> parts;
  for (const auto& h : summands)
    for (int c = 0; c < h.count; ++c)
      parts.push_back("S^" + std::to_string(h.index) + "xS^" + std::to_string(m - h.index));
  if (parts.empty()) return "S^" + std::to_string(m);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " # " : "") + parts[i];
  return out;
}

ManifoldDescription predict_manifold(const Certificate& cert) {
  const int m = cert.spec.m;
  std::map<int, int> merged;
  for (const auto& h : cert.layout.holes) {
    const int k = h.stage < 0 ? 1 : h.stage + 2;
    merged[std::min(k, m - k)] += 1;
  }
  ManifoldDescription d;
  d.m = m;
  for (const auto& [k, c] : merged) d.summands.push_back({k, c});
  d.text = describe_manifold(m, d.summands);
  return d;
}

Certificate synthesize_path(const ValidatedSpec& spec_in, const SynthesisParams& params) {
  if (spec_in.shape != Shape::path) throw std::invalid_argument("synthesize_path needs a path spec");
  const ValidatedSpec spec = validate(spec_in);
  const int m = spec.m;
  const int a = spec.count;

  const Rational R = params.R.value_or(Rational(a - 1));
  if (sgn(R) <= 0) throw SynthesisError("R must be positive");
  const Rational gap = 2 * R / (a - 1);
  Layout base_layout;
  base_layout.R = R;
  for (int k = 0; k < a; ++k) base_layout.t.push_back(-R + gap * k);
  for (int k = 0; k + 1 < a; ++k) base_layout.midpoints.push_back((base_layout.t[k] + base_layout.t[k + 1]) / 2);
  const Rational rho = gap / 2;

  std::vector<HoleRequest> requests;
  for (int i = 0; i <= m - 3; ++i) {
    if (!stage_has_holes(i, m)) continue;
    for (int j = 0; j + 1 < a; ++j)
      for (int c = 0; c < spec.fibers[j].count_for(i + 1); ++c) requests.push_back({i, j, i + 1});
  }

  std::vector<std::string> trace;
  trace.push_back("path a=" + std::to_string(a) + " m=" + std::to_string(m) + ": ball of radius " + q(R) +
                  " in R^3, uniform t spacing " + q(gap));

  for (int attempt = 0; attempt <= params.max_escalations; ++attempt) {
    Layout layout = base_layout;
    const Rational sigma = rho / 4 * pow2_inverse(attempt);
    layout.transverse = sigma;
    layout.schedule.assign(static_cast<std::size_t>(m - 2), {});
    for (std::size_t r = 0; r < requests.size(); ++r) {
      const auto& req = requests[r];
      // 0, +3s, -3s, +6s, -6s, ...: every hole gets its own x2 level.
      const long step = static_cast<long>((r + 1) / 2);
      const Rational y = (r % 2 == 1 ? 1 : -1) * 3 * sigma * step;
      const std::size_t dim = 3 + static_cast<std::size_t>(req.stage);
      Ellipsoid e = make_hole(dim, layout.midpoints[req.edge], y, rho, sigma);
      layout.holes.push_back({req.stage, req.edge, req.handle_index, e});
      layout.schedule[req.stage].push_back(std::move(e));
    }
    try {
      AlgebraicDomain d0 = ball(3, {Rational(0), Rational(0), Rational(0)}, R);
      LiftTower tower = lift_tower(d0, layout.schedule, static_cast<std::size_t>(m) + 1);
      check_stage_domains(tower, params);
      trace.push_back("attempt " + std::to_string(attempt) + ": transverse semiaxis " + q(sigma) + ", " +
                      std::to_string(layout.holes.size()) + " holes placed");
      trace.push_back(lift_trace(tower));
      return finish(spec, std::move(layout), std::move(d0), std::move(tower), std::move(trace), "stated");
    } catch (const ConstructionError& e) {
      trace.push_back("attempt " + std::to_string(attempt) + " rejected: " + e.what());
    }
  }
  throw SynthesisError("path layout failed validation after " + std::to_string(params.max_escalations + 1) +
                       " attempts: " + trace.back());
}

Certificate synthesize_theta(const ValidatedSpec& spec_in, const SynthesisParams& params) {
  if (spec_in.shape != Shape::theta) throw std::invalid_argument("synthesize_theta needs a theta spec");
  const ValidatedSpec spec = validate(spec_in);
  const int m = spec.m;
  const int b = spec.count;
  const Rational rho(1);

  // Per-corridor hole requests, corridors numbered bottom to top in x2.
  std::vector<std::vector<HoleRequest>> corridor(b);
  for (int c = 0; c < b; ++c)
    for (int i = 0; i <= m - 3; ++i) {
      if (!stage_has_holes(i, m)) continue;
      for (int k = 0; k < spec.fibers[c].count_for(i + 1); ++k) corridor[c].push_back({i, c, i + 1});
    }

  std::vector<std::string> trace;
  trace.push_back("theta b=" + std::to_string(b) + " m=" + std::to_string(m) + ": " + std::to_string(b - 1) +
                  " planar disks of radius " + q(rho) + " at x1 = 0");
  if (m > 2) trace.push_back("corridor fibers realized by the path hole mechanism after the first lift");

  const Rational R0 = params.R.value_or(Rational(3));
  if (R0 <= 1) throw SynthesisError("theta layout needs R > 1");
  std::string last = "no attempt";
  for (int grow = 0; grow <= params.max_escalations; ++grow) {
    const Rational R = R0 * (1L << grow);
    for (int shrink = 0; shrink < 3; ++shrink) {
      Layout layout;
      layout.R = R;
      layout.t = {-R, Rational(-1), Rational(1), R};
      layout.midpoints = {(-R - 1) / 2, Rational(0), (R + 1) / 2};
      const Rational sigma = rho / 4 * pow2_inverse(shrink);
      layout.transverse = sigma;
      layout.schedule.assign(static_cast<std::size_t>(m - 1), {});

      std::vector<Rational> widths(b);
      for (int c = 0; c < b; ++c) {
        const Rational stack = 3 * sigma * static_cast<long>(corridor[c].size());
        const bool outer = c == 0 || c == b - 1;
        widths[c] = outer ? stack : std::max(rho, stack);
      }
      Rational height = 2 * rho * (b - 1);
      for (const auto& w : widths) height += w;

      std::vector<Ellipsoid> disks;
      Rational y = -height / 2;
      for (int c = 0; c < b; ++c) {
        const Rational stack = 3 * sigma * static_cast<long>(corridor[c].size());
        Rational hy = y + (widths[c] - stack) / 2 + 3 * sigma / 2;
        for (const auto& req : corridor[c]) {
          const std::size_t dim = 3 + static_cast<std::size_t>(req.stage);
          Ellipsoid e = make_hole(dim, Rational(0), hy, rho, sigma);
          layout.holes.push_back({req.stage, c, req.handle_index, e});
          layout.schedule[req.stage + 1].push_back(std::move(e));
          hy += 3 * sigma;
        }
        y += widths[c];
        if (c + 1 < b) {
          Ellipsoid disk{{Rational(0), y + rho}, {rho * rho, rho * rho}};
          layout.holes.push_back({-1, c, 0, disk});
          disks.push_back(std::move(disk));
          y += 2 * rho;
        }
      }
      std::stable_sort(layout.holes.begin(), layout.holes.end(), [](const PlacedHole& x, const PlacedHole& z) {
        return x.stage < z.stage;
      });

      try {
        AlgebraicDomain planar = remove_ellipsoids(ball(2, {Rational(0), Rational(0)}, R), disks);
        LiftTower tower = lift_tower(planar, layout.schedule, static_cast<std::size_t>(m) + 1);
        check_stage_domains(tower, params);
        trace.push_back("attempt R=" + q(R) + " transverse " + q(sigma) + ": stack height " + q(height));
        trace.push_back(lift_trace(tower));
        const std::string claim = m == 2 ? "stated" : "expected";
        return finish(spec, std::move(layout), ball(2, {Rational(0), Rational(0)}, R), std::move(tower),
                      std::move(trace), claim);
      } catch (const ConstructionError& e) {
        last = e.what();
        trace.push_back("attempt R=" + q(R) + " transverse " + q(sigma) + " rejected: " + last);
      }
    }
  }
  throw SynthesisError("theta layout failed validation at every R up to the cap: " + last);
}

Certificate synthesize_sphere(const ValidatedSpec& spec_in, const SynthesisParams& params) {
  if (spec_in.shape != Shape::sphere) throw std::invalid_argument("synthesize_sphere needs a sphere spec");
  const ValidatedSpec spec = validate(spec_in);
  const Rational R = params.R.value_or(Rational(1));
  if (sgn(R) <= 0) throw SynthesisError("R must be positive");
  Layout layout;
  layout.R = R;
  layout.t = {-R, R};
  layout.midpoints = {Rational(0)};
  layout.transverse = 0;
  layout.schedule.assign(static_cast<std::size_t>(spec.m - 1), {});
  AlgebraicDomain d0 = ball(2, {Rational(0), Rational(0)}, R);
  LiftTower tower;
  try {
    tower = lift_tower(d0, layout.schedule, static_cast<std::size_t>(spec.m) + 1);
  } catch (const ConstructionError& e) {
    throw SynthesisError(e.what());
  }
  std::vector<std::string> trace{"sphere m=" + std::to_string(spec.m) + ": disk of radius " + q(R) + " lifted " +
                                 std::to_string(spec.m - 1) + " times",
                                 lift_trace(tower)};
  return finish(spec, std::move(layout), std::move(d0), std::move(tower), std::move(trace), "stated");
}

Certificate synthesize(const ValidatedSpec& spec, const SynthesisParams& params) {
  switch (spec.shape) {
    case Shape::path: return synthesize_path(spec, params);
    case Shape::theta: return synthesize_theta(spec, params);
    case Shape::sphere: return synthesize_sphere(spec, params);
  }
  throw std::invalid_argument("unknown shape");
}

}  // namespace reebforge
