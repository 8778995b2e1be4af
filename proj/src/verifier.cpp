#include "reebforge/verifier.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "reebforge/numeric.hpp"

namespace reebforge {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double transverse_ratio(const std::vector<double>& g) {
  const double total = norm(g);
  if (total == 0.0) return 1.0;
  double s = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) s += g[k] * g[k];
  return std::sqrt(s) / total;
}

/// Moves x onto F = 0 along the gradient. Returns false on a vanishing gradient.
bool project(const DifferentiableField& field, std::vector<double>& x, const NewtonOptions& newton) {
  for (int it = 0; it < newton.max_iter; ++it) {
    const double f = field.value(x);
    if (std::abs(f) <= newton.tol_f) return true;
    const auto g = field.gradient(x);
    double gg = 0.0;
    for (double v : g) gg += v * v;
    if (!(gg > 0.0) || !std::isfinite(gg)) return false;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= f * g[k] / gg;
  }
  return std::abs(field.value(x)) <= newton.tol_f;
}

bool inside(const GridBox& box, const std::vector<double>& x) {
  for (std::size_t k = 0; k < box.dim(); ++k)
    if (!(x[k] >= box.lo[k] && x[k] <= box.hi[k])) return false;
  return true;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

template <class T>
std::string list(const std::vector<T>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

std::vector<std::size_t> shape_plus_one(const GridBox& box) {
  std::vector<std::size_t> s;
  for (auto c : box.cells) s.push_back(c + 1);
  return s;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct SliceGrid {
  Lattice nodes;
  Lattice cells;
  std::vector<std::vector<double>> axes;
  std::vector<double> values;
};

SliceGrid evaluate_slice(const Polynomial& F, const Rational& t, const GridBox& box) {
  if (box.dim() + 1 != F.num_vars()) throw std::invalid_argument("slice box must drop exactly the x1 axis");
  const Polynomial restricted = F.restrict(0, t);
  SliceGrid g{Lattice(shape_plus_one(box)), Lattice(box.cells), box.axes(), {}};
  GridEvaluator(NumericPolynomial(restricted)).evaluate(g.axes, g.values);
  return g;
}

/// Kuhn subdivision of the unit cube: 6 tetrahedra sharing the main diagonal.
std::vector<std::array<int, 4>> kuhn_tetrahedra() {
  std::vector<std::array<int, 4>> tets;
  std::array<int, 3> perm{0, 1, 2};
  do {
    std::array<int, 4> t{};
    int code = 0;
    t[0] = 0;
    for (int s = 0; s < 3; ++s) {
      code |= 1 << perm[s];
      t[s + 1] = code;
    }
    tets.push_back(t);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return tets;
}

/// Marching tetrahedra / triangles over the selected cells. Vertices are keyed
/// by the grid edge they sit on, so the mesh is shared across cells.
struct MeshBuilder {
  const SliceGrid& grid;
  std::unordered_map<std::uint64_t, std::size_t> vertex_of_edge;
  std::vector<std::pair<std::size_t, std::size_t>> vertex_edges;
  std::vector<std::vector<std::size_t>> elements;

  std::size_t vertex(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    const std::uint64_t key = static_cast<std::uint64_t>(a) * grid.nodes.size() + b;
    auto [it, fresh] = vertex_of_edge.emplace(key, vertex_edges.size());
    if (fresh) vertex_edges.push_back({a, b});
    return it->second;
  }

  void add_cell(std::size_t cell) {
    const std::size_t d = grid.cells.dim();
    std::size_t multi_buf[16];
    std::span<std::size_t> multi(multi_buf, d);
    grid.cells.unravel(cell, multi);
    const std::size_t base = grid.nodes.ravel(multi);
    auto node = [&](int code) {
      std::size_t idx = base;
      for (std::size_t k = 0; k < d; ++k)
        if (code & (1 << k)) idx += grid.nodes.strides()[k];
      return idx;
    };
    auto positive = [&](std::size_t idx) { return grid.values[idx] > 0.0; };
    if (d == 2) {
      static const int tris[2][3] = {{0, 1, 3}, {0, 2, 3}};
      for (const auto& tri : tris) {
        std::vector<std::size_t> in, out;
        for (int c : tri) (positive(node(c)) ? in : out).push_back(node(c));
        if (in.empty() || out.empty()) continue;
        std::vector<std::size_t> seg;
        for (auto i : in)
          for (auto o : out) seg.push_back(vertex(i, o));
        elements.push_back(seg);
      }
      return;
    }
    static const auto tets = kuhn_tetrahedra();
    for (const auto& tet : tets) {
      std::vector<std::size_t> in, out;
      for (int c : tet) (positive(node(c)) ? in : out).push_back(node(c));
      if (in.empty() || out.empty()) continue;
      if (in.size() == 1 || out.size() == 1) {
        const auto& lone = in.size() == 1 ? in : out;
        const auto& rest = in.size() == 1 ? out : in;
        elements.push_back({vertex(lone[0], rest[0]), vertex(lone[0], rest[1]), vertex(lone[0], rest[2])});
      } else {
        const std::size_t ac = vertex(in[0], out[0]), ad = vertex(in[0], out[1]);
        const std::size_t bd = vertex(in[1], out[1]), bc = vertex(in[1], out[0]);
        elements.push_back({ac, ad, bd});
        elements.push_back({ac, bd, bc});
      }
    }
  }

  int euler() const {
    std::unordered_set<std::uint64_t> edges;
    for (const auto& tri : elements)
      for (int i = 0; i < 3; ++i) {
        std::uint64_t a = tri[i], b = tri[(i + 1) % 3];
        if (a > b) std::swap(a, b);
        edges.insert(a * vertex_edges.size() + b);
      }
    return static_cast<int>(vertex_edges.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(elements.size());
  }

  std::vector<std::vector<double>> coordinates() const {
    std::vector<std::vector<double>> out;
    const std::size_t d = grid.nodes.dim();
    std::size_t ma[16], mb[16];
    for (const auto& [a, b] : vertex_edges) {
      grid.nodes.unravel(a, std::span<std::size_t>(ma, d));
      grid.nodes.unravel(b, std::span<std::size_t>(mb, d));
      const double va = grid.values[a], vb = grid.values[b];
      const double s = va / (va - vb);
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k) p[k] = grid.axes[k][ma[k]] + s * (grid.axes[k][mb[k]] - grid.axes[k][ma[k]]);
      out.push_back(std::move(p));
    }
    return out;
  }
};

std::vector<int> sorted_by_first_coordinate(const std::vector<std::vector<double>>& centroids) {
  std::vector<int> order(centroids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return centroids[a][0] < centroids[b][0]; });
  return order;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::map<std::pair<int, int>, std::size_t> overlaps(const Slice& a, const Slice& b) {
  std::map<std::pair<int, int>, std::size_t> out;
  for (std::size_t c = 0; c < a.footprint.size(); ++c)
    if (a.footprint[c] >= 0 && b.footprint[c] >= 0) ++out[{a.footprint[c], b.footprint[c]}];
  return out;
}

GridBox symmetric_box(const Box& bbox, std::size_t first, double fraction) {
  std::vector<double> lo, hi;
  const auto blo = bbox.lo_d(), bhi = bbox.hi_d();
  for (std::size_t k = first; k < bbox.dim(); ++k) {
    const double h = 1.03 * std::max(std::abs(blo[k]), std::abs(bhi[k]));
    lo.push_back(-h);
    hi.push_back(h);
  }
  GridBox g = GridBox::with_fraction(lo, hi, fraction);
  for (auto& c : g.cells)
    if (c % 2 == 1) ++c;
  return g;
}

}  // namespace

double default_grid_fraction(std::size_t ambient_dim) {
  if (ambient_dim <= 3) return 1.0 / 200.0;
  if (ambient_dim == 4) return 1.0 / 60.0;
  if (ambient_dim == 5) return 1.0 / 32.0;
  return 1.0 / 16.0;
}

unsigned configured_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("REEBFORGE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ZeroSetScan scan_zero_set(const Polynomial& F, const GridBox& box) {
  const std::size_t n = box.dim();
  if (n < 2 || F.num_vars() != n) throw std::invalid_argument("scan needs a box matching F with dimension >= 2");
  const GridEvaluator eval{NumericPolynomial(F)};
  const auto axes = box.axes();
  const std::vector<std::vector<double>> rest(axes.begin() + 1, axes.end());
  std::vector<std::size_t> rest_nodes_shape, rest_cells_shape;
  for (std::size_t k = 1; k < n; ++k) {
    rest_nodes_shape.push_back(box.cells[k] + 1);
    rest_cells_shape.push_back(box.cells[k]);
  }
  const Lattice rest_nodes(rest_nodes_shape), rest_cells(rest_cells_shape);
  const auto offs = corner_offsets(rest_nodes);

  ZeroSetScan scan{box, {}};
  std::vector<double> lower, upper;
  eval.evaluate_slab(axes[0][0], rest, lower);
  std::size_t multi_buf[16];
  std::span<std::size_t> multi(multi_buf, n - 1);
  for (std::size_t i = 0; i < box.cells[0]; ++i) {
    eval.evaluate_slab(axes[0][i + 1], rest, upper);
    for (std::size_t c = 0; c < rest_cells.size(); ++c) {
      rest_cells.unravel(c, multi);
      const std::size_t base = rest_nodes.ravel(multi);
      int pos = 0;
      for (auto o : offs) pos += (lower[base + o] > 0.0) + (upper[base + o] > 0.0);
      if (pos == 0 || pos == static_cast<int>(2 * offs.size())) continue;
      scan.centers.push_back(axes[0][i] + 0.5 * box.step(0));
      for (std::size_t k = 1; k < n; ++k) scan.centers.push_back(axes[k][multi[k - 1]] + 0.5 * box.step(k));
    }
    std::swap(lower, upper);
  }
  return scan;
}

SampleResult sample_zero_set(const Polynomial& F, const ZeroSetScan& scan, const NewtonOptions& newton,
                             std::size_t max_samples) {
  const std::size_t count = scan.size();
  if (count == 0) throw VerificationError("empty zero set at this resolution");
  const DifferentiableField field(F);
  const std::size_t n = scan.box.dim();
  const std::size_t stride = std::max<std::size_t>(1, (count + max_samples - 1) / std::max<std::size_t>(max_samples, 1));
  SampleResult out;
  for (std::size_t i = 0; i < count; i += stride) {
    ++out.seeds;
    std::vector<double> x(scan.centers.begin() + i * n, scan.centers.begin() + (i + 1) * n);
    if (!project(field, x, newton)) {
      ++out.dropped;
      continue;
    }
    const auto g = field.gradient(x);
    out.samples.push_back({x, std::abs(field.value(x)), norm(g)});
  }
  if (out.samples.empty()) throw VerificationError("empty zero set at this resolution");
  return out;
}

SampleResult sample_zero_set(const Polynomial& F, const GridBox& box, const NewtonOptions& newton,
                             std::size_t max_samples) {
  return sample_zero_set(F, scan_zero_set(F, box), newton, max_samples);
}

NonsingularResult check_nonsingular(const std::vector<SamplePoint>& samples, double eps_ns) {
  NonsingularResult r;
  if (samples.empty()) return r;
  r.min_grad_norm = samples.front().grad_norm;
  for (const auto& s : samples) r.min_grad_norm = std::min(r.min_grad_norm, s.grad_norm);
  r.pass = r.min_grad_norm >= eps_ns;
  return r;
}

std::vector<CriticalPoint> find_critical_points(const Polynomial& F, const ZeroSetScan& scan,
                                                const NewtonOptions& newton, double eps_ns) {
  const DifferentiableField field(F);
  const std::size_t n = scan.box.dim();
  using Key = std::vector<long>;
  std::map<Key, std::pair<double, std::vector<double>>> buckets;
  NewtonOptions quick = newton;
  quick.max_iter = std::min(newton.max_iter, 10);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    std::vector<double> x(scan.centers.begin() + i * n, scan.centers.begin() + (i + 1) * n);
    if (transverse_ratio(field.gradient(x)) >= 0.95) continue;
    if (!project(field, x, quick)) continue;
    const double r = transverse_ratio(field.gradient(x));
    if (r >= 0.9) continue;
    Key key(n);
    for (std::size_t k = 0; k < n; ++k)
      key[k] = static_cast<long>(std::floor((x[k] - scan.box.lo[k]) / (3.0 * scan.box.step(k))));
    auto it = buckets.find(key);
    if (it == buckets.end() || r < it->second.first) buckets[key] = {r, x};
  }

  auto system = [&](const std::vector<double>& x, Eigen::VectorXd& G) {
    const auto g = field.gradient(x);
    G.resize(static_cast<Eigen::Index>(n));
    G[0] = field.value(x);
    for (std::size_t k = 1; k < n; ++k) G[static_cast<Eigen::Index>(k)] = g[k];
    return g;
  };

  std::vector<CriticalPoint> found;
  for (auto& [key, seed] : buckets) {
    std::vector<double> x = seed.second;
    Eigen::VectorXd G;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const auto g = system(x, G);
      const double scale = std::max(1.0, norm(g));
      if (std::abs(G[0]) <= newton.tol_f && G.tail(static_cast<Eigen::Index>(n - 1)).lpNorm<Eigen::Infinity>() <= 1e-9 * scale) {
        ok = true;
        break;
      }
      const auto h = field.hessian(x);
      Eigen::MatrixXd J(n, n);
      for (std::size_t c = 0; c < n; ++c) J(0, static_cast<Eigen::Index>(c)) = g[c];
      for (std::size_t r = 1; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = h[r * n + c];
      const Eigen::VectorXd step = J.fullPivLu().solve(-G);
      if (!step.allFinite()) break;
      const double g0 = G.norm();
      double alpha = 1.0;
      std::vector<double> y(n);
      Eigen::VectorXd Gy;
      bool moved = false;
      while (alpha >= 1.0 / 1024.0) {
        for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + alpha * step[static_cast<Eigen::Index>(k)];
        system(y, Gy);
        if (Gy.allFinite() && Gy.norm() < (1.0 - 1e-4 * alpha) * g0) {
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) {
        // Accept a tiny full step at the roundoff floor.
        if (step.norm() > 1e-12 * (1.0 + norm(x))) break;
        for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + step[static_cast<Eigen::Index>(k)];
      }
      x = y;
    }
    if (!ok || !inside(scan.box, x)) continue;
    const auto g = system(x, G);
    const double gn = norm(g);
    if (gn < eps_ns) continue;
    CriticalPoint cp;
    cp.coords = x;
    cp.value = x[0];
    cp.residuals.assign(G.data(), G.data() + G.size());
    cp.grad_norm = gn;
    found.push_back(std::move(cp));
  }

  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.coords < b.coords;
  });
  const double dup = 1e-6 * (1.0 + scan.box.diameter());
  std::vector<CriticalPoint> merged;
  for (auto& cp : found) {
    bool seen = false;
    for (const auto& m : merged) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) d += (m.coords[k] - cp.coords[k]) * (m.coords[k] - cp.coords[k]);
      if (std::sqrt(d) <= dup) {
        seen = true;
        break;
      }
    }
    if (!seen) merged.push_back(std::move(cp));
  }
  for (auto& cp : merged) {
    const auto h = field.hessian(cp.coords);
    Eigen::MatrixXd T(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t c = 1; c < n; ++c)
        T(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = h[r * n + c];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    cp.transverse_hessian.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  }
  std::stable_sort(merged.begin(), merged.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.value < b.value;
  });
  return merged;
}

std::vector<CriticalPoint> find_critical_points(const Polynomial& F, const GridBox& box,
                                                const NewtonOptions& newton, double eps_ns) {
  return find_critical_points(F, scan_zero_set(F, box), newton, eps_ns);
}

Slice slice_components(const Polynomial& F, const Rational& t, const GridBox& slice_box, bool keep_footprint) {
  const SliceGrid g = evaluate_slice(F, t, slice_box);
  Slice s{t, slice_box, {}, {}, false};
  const auto sc = sign_change_cells(g.nodes, g.cells, g.values);
  std::size_t count = 0;
  const auto label = label_components(g.cells, sc, true, count);
  const std::size_t d = slice_box.dim();
  s.components.assign(count, SliceComponent{0, std::vector<double>(d, 0.0), std::nullopt});
  std::size_t multi_buf[16];
  std::span<std::size_t> multi(multi_buf, d);
  for (std::size_t c = 0; c < label.size(); ++c) {
    if (label[c] < 0) continue;
    auto& comp = s.components[label[c]];
    g.cells.unravel(c, multi);
    for (std::size_t k = 0; k < d; ++k) comp.centroid[k] += g.axes[k][multi[k]] + 0.5 * slice_box.step(k);
    ++comp.cells;
  }
  for (auto& comp : s.components)
    for (auto& v : comp.centroid) v /= static_cast<double>(comp.cells);

  if (keep_footprint) {
    const auto pt = positive_touching_cells(g.nodes, g.cells, g.values);
    std::size_t pcount = 0;
    const auto plabel = label_components(g.cells, pt, true, pcount);
    std::vector<std::int32_t> owner(pcount, -1);
    for (std::size_t c = 0; c < label.size(); ++c) {
      if (label[c] < 0) continue;
      auto& o = owner[plabel[c]];
      if (o < 0)
        o = label[c];
      else if (o != label[c])
        s.ambiguous = true;
    }
    s.footprint.assign(label.size(), -1);
    for (std::size_t c = 0; c < label.size(); ++c)
      if (plabel[c] >= 0) s.footprint[c] = owner[plabel[c]];
  }
  return s;
}

std::vector<int> ExtractedReeb::sorted_degrees() const {
  std::vector<int> d;
  for (const auto& v : vertices) d.push_back(v.degree);
  std::sort(d.begin(), d.end());
  return d;
}

GridBox slice_box_for(const Certificate& cert, double fraction) { return symmetric_box(cert.bbox, 1, fraction); }

GridBox ambient_box_for(const Certificate& cert, double fraction) { return symmetric_box(cert.bbox, 0, fraction); }

Rational guard_band(const std::vector<Rational>& values) {
  if (values.size() < 2) throw std::invalid_argument("need at least two singular values");
  Rational gap = values[1] - values[0];
  for (std::size_t i = 1; i + 1 < values.size(); ++i) gap = std::min<Rational>(gap, values[i + 1] - values[i]);
  return gap / 10;
}

std::vector<Rational> sweep_positions(const Rational& lo, const Rational& hi, const Rational& guard, int count) {
  if (count <= 1) return {(lo + hi) / 2};
  std::vector<Rational> out;
  const Rational a = lo + guard, b = hi - guard;
  for (int k = 0; k < count; ++k) out.push_back(a + (b - a) * k / (count - 1));
  return out;
}

namespace {

/// Tracks through one interval, or an error message if linking was not a
/// perfect matching.
std::string link_interval(const std::vector<Slice>& slices, std::vector<std::vector<int>>& tracks) {
  tracks.clear();
  if (slices.empty()) return {};
  for (const auto& s : slices)
    if (s.ambiguous) return "two fiber components share one region at t=" + fmt(s.t.get_d());
  for (std::size_t c = 0; c < slices.front().components.size(); ++c) tracks.push_back({static_cast<int>(c)});
  for (std::size_t i = 0; i + 1 < slices.size(); ++i) {
    const auto ov = overlaps(slices[i], slices[i + 1]);
    const std::size_t na = slices[i].components.size(), nb = slices[i + 1].components.size();
    std::vector<int> fwd(na, -1), back(nb, -1);
    std::vector<int> fcount(na, 0), bcount(nb, 0);
    for (const auto& [pair, n] : ov) {
      fwd[pair.first] = pair.second;
      back[pair.second] = pair.first;
      ++fcount[pair.first];
      ++bcount[pair.second];
    }
    if (na != nb || std::any_of(fcount.begin(), fcount.end(), [](int c) { return c != 1; }) ||
        std::any_of(bcount.begin(), bcount.end(), [](int c) { return c != 1; }))
      return "ambiguous tracks between t=" + fmt(slices[i].t.get_d()) + " and t=" + fmt(slices[i + 1].t.get_d()) +
             " (" + std::to_string(na) + " -> " + std::to_string(nb) + " components)";
    for (auto& tr : tracks) tr.push_back(fwd[tr.back()]);
  }
  return {};
}

}  // namespace

ExtractedReeb extract_reeb(const Polynomial& F, const std::vector<Rational>& values, const GridBox& slice_box_in,
                           const SweepOptions& sweep) {
  const Rational guard = guard_band(values);
  const std::size_t intervals = values.size() - 1;
  GridBox box = slice_box_in;

  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<std::pair<std::size_t, Rational>> jobs;
    for (std::size_t j = 0; j < intervals; ++j)
      for (const auto& t : sweep_positions(values[j], values[j + 1], guard, sweep.slices_per_interval))
        jobs.push_back({j, t});
    std::vector<Slice> computed(jobs.size());
    parallel_for(jobs.size(), sweep.threads,
                 [&](std::size_t i) { computed[i] = slice_components(F, jobs[i].second, box, true); });

    std::vector<std::vector<Slice>> per(intervals);
    for (std::size_t i = 0; i < jobs.size(); ++i) per[jobs[i].first].push_back(std::move(computed[i]));

    std::vector<std::vector<std::vector<int>>> tracks(intervals);
    std::string problem;
    for (std::size_t j = 0; j < intervals && problem.empty(); ++j) problem = link_interval(per[j], tracks[j]);
    if (!problem.empty()) {
      if (attempt == 0) {
        box = box.refined();
        continue;
      }
      throw VerificationError("track ambiguity persists after refinement: " + problem);
    }

    ExtractedReeb out;
    for (std::size_t j = 0; j < intervals; ++j) {
      out.interval_counts.push_back(static_cast<int>(tracks[j].size()));
      out.interval_fraction.push_back(1.0 / static_cast<double>(box.cells.front()));
      for (const auto& s : per[j]) out.slices.push_back({s.t.get_d(), static_cast<int>(j), s.components});
    }

    // Vertices: components meeting across each sweep value, grouped by overlap.
    std::vector<std::vector<int>> left_vertex(intervals), right_vertex(intervals);
    for (std::size_t v = 0; v < values.size(); ++v) {
      const Slice* left = v > 0 && !per[v - 1].empty() ? &per[v - 1].back() : nullptr;
      const Slice* right = v < intervals && !per[v].empty() ? &per[v].front() : nullptr;
      const int nl = left ? static_cast<int>(left->components.size()) : 0;
      const int nr = right ? static_cast<int>(right->components.size()) : 0;
      UnionFind uf(static_cast<std::size_t>(nl + nr));
      if (left && right)
        for (const auto& [pair, n] : overlaps(*left, *right)) uf.unite(pair.first, nl + pair.second);
      std::map<int, int> group_vertex;
      std::vector<int> member_vertex(static_cast<std::size_t>(nl + nr));
      for (int i = 0; i < nl + nr; ++i) {
        const int root = uf.find(i);
        auto it = group_vertex.find(root);
        if (it == group_vertex.end()) {
          it = group_vertex.emplace(root, static_cast<int>(out.vertices.size())).first;
          out.vertices.push_back({values[v].get_d(), static_cast<int>(v), 0});
        }
        member_vertex[i] = it->second;
        ++out.vertices[it->second].degree;
      }
      if (left) left_vertex[v - 1].assign(member_vertex.begin(), member_vertex.begin() + nl);
      if (right) right_vertex[v].assign(member_vertex.begin() + nl, member_vertex.end());
    }
    for (std::size_t j = 0; j < intervals; ++j) {
      const auto& mid = per[j][per[j].size() / 2];
      for (const auto& tr : tracks[j]) {
        ReebEdge e;
        e.interval = static_cast<int>(j);
        e.track = tr;
        e.from = right_vertex[j][tr.front()];
        e.to = left_vertex[j][tr.back()];
        e.centroid = mid.components[tr[per[j].size() / 2]].centroid;
        out.edges.push_back(std::move(e));
      }
    }
    return out;
  }
  throw VerificationError("unreachable");
}

std::vector<EulerComponent> fiber_euler(const Polynomial& F, const Rational& t, const GridBox& slice_box_in) {
  if (slice_box_in.dim() != 3) throw std::invalid_argument("fiber_euler needs surface fibers (three-dimensional slices)");
  GridBox box = slice_box_in;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const SliceGrid g = evaluate_slice(F, t, box);
    const auto sc = sign_change_cells(g.nodes, g.cells, g.values);
    std::size_t count = 0;
    const auto label = label_components(g.cells, sc, true, count);
    std::vector<std::vector<std::size_t>> members(count);
    for (std::size_t c = 0; c < label.size(); ++c)
      if (label[c] >= 0) members[label[c]].push_back(c);

    std::vector<EulerComponent> out;
    bool bad = false;
    std::size_t multi[3];
    for (const auto& cells : members) {
      MeshBuilder mesh{g, {}, {}, {}};
      EulerComponent ec;
      ec.centroid.assign(3, 0.0);
      for (auto c : cells) {
        mesh.add_cell(c);
        g.cells.unravel(c, multi);
        for (std::size_t k = 0; k < 3; ++k) ec.centroid[k] += g.axes[k][multi[k]] + 0.5 * box.step(k);
      }
      for (auto& v : ec.centroid) v /= static_cast<double>(cells.size());
      ec.cells = cells.size();
      ec.euler = mesh.euler();
      if (ec.euler % 2 != 0 || ec.euler > 2) bad = true;
      out.push_back(std::move(ec));
    }
    if (!bad) return out;
    if (attempt == 0) {
      box = box.refined();
      continue;
    }
    throw VerificationError("mesh resolution error at t=" + fmt(t.get_d()) + ": odd Euler characteristic or negative genus");
  }
  throw VerificationError("unreachable");
}

SliceMesh slice_mesh(const Polynomial& F, const Rational& t, const GridBox& slice_box) {
  const std::size_t d = slice_box.dim();
  if (d != 2 && d != 3)
    throw UnsupportedMesh("mesh export supports curve and surface fibers only (slice dimension " + std::to_string(d) +
                          ")");
  const SliceGrid g = evaluate_slice(F, t, slice_box);
  const auto sc = sign_change_cells(g.nodes, g.cells, g.values);
  MeshBuilder mesh{g, {}, {}, {}};
  for (std::size_t c = 0; c < sc.size(); ++c)
    if (sc[c]) mesh.add_cell(c);
  SliceMesh out;
  out.dim = d;
  out.vertices = mesh.coordinates();
  out.elements = std::move(mesh.elements);
  return out;
}

std::string to_obj(const SliceMesh& mesh, double t) {
  std::ostringstream os;
  os.precision(12);
  os << "# fiber of x1 at t=" << t << "\n";
  for (const auto& v : mesh.vertices) {
    os << 'v';
    if (mesh.dim == 2) os << ' ' << t;
    for (double c : v) os << ' ' << c;
    os << '\n';
  }
  for (const auto& e : mesh.elements) {
    os << (mesh.dim == 2 ? 'l' : 'f');
    for (auto i : e) os << ' ' << i + 1;
    os << '\n';
  }
  return os.str();
}

std::string sweep_csv(const ExtractedReeb& reeb) {
  std::ostringstream os;
  os.precision(12);
  os << "t,interval,components\n";
  for (const auto& s : reeb.slices) os << s.t << ',' << s.interval << ',' << s.components.size() << '\n';
  return os.str();
}

std::vector<std::string> VerificationReport::failed_checks() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name);
  return out;
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

VerificationReport verify(const Certificate& cert, const VerifyConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const std::size_t n = cert.ambient;
  const int m = cert.spec.m;
  const Polynomial& F = cert.expanded;

  // Exact checks on the certificate itself.
  {
    const bool dims = F.num_vars() == n && cert.defining.num_vars() == n && n == static_cast<std::size_t>(m) + 1;
    const bool same = dims && F == cert.defining.expand();
    add("polynomial_consistency", same,
        same ? "expanded polynomial equals the product form"
             : (dims ? "expanded polynomial differs from the product form" : "ambient dimension mismatch"));
  }
  if (F.num_vars() != n) {
    rep.passed = false;
    return rep;
  }
  {
    const std::size_t base_dim = cert.tower.stages.empty() ? n : cert.tower.stages.front().domain.ambient_dim;
    std::string bad;
    for (const auto& [e, c] : F.terms())
      for (std::size_t v = base_dim; v < n && bad.empty(); ++v)
        if (e[v] % 2 != 0) bad = "odd power of x" + std::to_string(v + 1);
    add("reflection_symmetry", bad.empty(), bad.empty() ? "even in every added variable" : bad);
  }
  {
    std::string bad;
    for (const auto& p : cert.predicted_critical_points) {
      if (p.size() != n || sgn(F.eval(p)) != 0) {
        std::vector<double> pd;
        for (const auto& q : p) pd.push_back(q.get_d());
        bad = "F != 0 at predicted critical point " + list(pd);
        break;
      }
    }
    add("zero_set", bad.empty(),
        bad.empty() ? "F vanishes exactly at all " + std::to_string(cert.predicted_critical_points.size()) +
                          " predicted critical points"
                    : bad);
  }

  const double ambient_fraction = config.ambient_step.value_or(config.grid_step.value_or(default_grid_fraction(n)));
  const double slice_fraction = config.grid_step.value_or(default_grid_fraction(n));
  const NewtonOptions newton{30, config.tol_f};
  const GridBox ambient = ambient_box_for(cert, ambient_fraction);

  ZeroSetScan scan{ambient, {}};
  try {
    scan = scan_zero_set(F, ambient);
    const SampleResult samples = sample_zero_set(F, scan, newton, config.max_samples);
    rep.sample_count = samples.samples.size();
    double worst = 0.0;
    for (const auto& s : samples.samples) worst = std::max(worst, s.residual);
    add("sampling", worst <= config.tol_f,
        std::to_string(samples.samples.size()) + " samples from " + std::to_string(samples.seeds) + " seeds, " +
            std::to_string(samples.dropped) + " dropped, max |F| " + fmt(worst));
    const NonsingularResult ns = check_nonsingular(samples.samples, config.eps_ns);
    rep.min_grad_norm = ns.min_grad_norm;
    add("nonsingular", ns.pass, "min |grad F| = " + fmt(ns.min_grad_norm));

    const DifferentiableField field(F);
    const std::size_t stride = std::max<std::size_t>(1, samples.samples.size() / std::max<std::size_t>(config.fd_points, 1));
    double worst_fd = 0.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < samples.samples.size() && checked < config.fd_points; i += stride, ++checked) {
      std::vector<double> x = samples.samples[i].coords;
      const auto g = field.gradient(x);
      std::vector<double> fd(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
        const double keep = x[k];
        x[k] = keep + h;
        const double up = field.value(x);
        x[k] = keep - h;
        const double down = field.value(x);
        x[k] = keep;
        fd[k] = (up - down) / (2 * h);
      }
      double diff = 0.0;
      for (std::size_t k = 0; k < n; ++k) diff += (fd[k] - g[k]) * (fd[k] - g[k]);
      worst_fd = std::max(worst_fd, std::sqrt(diff) / std::max(norm(g), 1e-300));
    }
    add("gradient_fd", worst_fd <= config.fd_tolerance,
        std::to_string(checked) + " points, max relative error " + fmt(worst_fd));
  } catch (const VerificationError& e) {
    add("sampling", false, e.what());
    add("nonsingular", false, "no samples");
    add("gradient_fd", false, "no samples");
  }

  // Critical points of the projection to x1.
  rep.critical_points = scan.size() ? find_critical_points(F, scan, newton, config.eps_ns) : std::vector<CriticalPoint>{};
  {
    const std::size_t found = rep.critical_points.size();
    add("critical_count", found == cert.predicted_critical_count,
        "found " + std::to_string(found) + ", predicted " + std::to_string(cert.predicted_critical_count));
    std::vector<double> got, want;
    for (const auto& cp : rep.critical_points) got.push_back(cp.value);
    for (const auto& p : cert.predicted_critical_points) want.push_back(p[0].get_d());
    std::sort(want.begin(), want.end());
    std::string bad;
    if (got.size() == want.size()) {
      for (std::size_t i = 0; i < got.size() && bad.empty(); ++i)
        if (std::abs(got[i] - want[i]) > config.tol_value)
          bad = "critical value " + fmt(got[i]) + " vs predicted " + fmt(want[i]);
    }
    auto near_any = [&](double v, const std::vector<double>& pool) {
      return std::any_of(pool.begin(), pool.end(), [&](double p) { return std::abs(p - v) <= config.tol_value; });
    };
    std::vector<double> sing;
    for (const auto& t : cert.predicted_singular_values) sing.push_back(t.get_d());
    for (double t : sing)
      if (bad.empty() && !near_any(t, got)) bad = "no critical point at predicted singular value " + fmt(t);
    for (double v : got)
      if (bad.empty() && !near_any(v, sing)) bad = "critical value " + fmt(v) + " is not a predicted singular value";
    add("critical_values", bad.empty() && !got.empty(),
        bad.empty() ? (got.empty() ? "no critical points found" : "all values within " + fmt(config.tol_value))
                    : bad);
  }

  // Reeb graph by level sweep.
  const ExpectedReeb expected = expected_reeb(cert.spec, cert.predicted_singular_values);
  const GridBox sbox = slice_box_for(cert, slice_fraction);
  try {
    SweepOptions sweep{config.slices_per_interval, slice_fraction, configured_threads(config.threads)};
    rep.reeb = extract_reeb(F, cert.predicted_singular_values, sbox, sweep);
    const auto& reeb = *rep.reeb;
    std::string bad;
    if (reeb.vertices.size() != expected.vertices.size())
      bad = std::to_string(reeb.vertices.size()) + " vertices, expected " + std::to_string(expected.vertices.size());
    else if (reeb.sorted_degrees() != expected.sorted_degrees())
      bad = "degrees " + list(reeb.sorted_degrees()) + ", expected " + list(expected.sorted_degrees());
    else if (reeb.interval_counts != expected.interval_component_counts())
      bad = "interval counts " + list(reeb.interval_counts) + ", expected " + list(expected.interval_component_counts());
    else {
      std::multiset<std::tuple<int, int, int>> got, want;
      for (const auto& e : reeb.edges)
        got.insert({e.interval, reeb.vertices[e.from].degree, reeb.vertices[e.to].degree});
      for (const auto& e : expected.edges)
        want.insert({e.interval, expected.vertices[e.from].degree, expected.vertices[e.to].degree});
      if (got != want) bad = "edge endpoints differ from the expected graph";
    }
    add("reeb_graph", bad.empty(),
        bad.empty() ? std::to_string(reeb.vertices.size()) + " vertices, " + std::to_string(reeb.edges.size()) +
                          " edges, degrees " + list(reeb.sorted_degrees()) + ", interval counts " +
                          list(reeb.interval_counts)
                    : bad);

    const bool counts_ok = reeb.interval_counts == expected.interval_component_counts();
    add("fiber_components", counts_ok,
        "components per interval " + list(reeb.interval_counts) + ", one per edge expected " +
            list(expected.interval_component_counts()));

    // Morse surrogate: one vertex per distinct critical value, nondegenerate points.
    std::string mbad;
    const double guard = guard_band(cert.predicted_singular_values).get_d();
    for (std::size_t j = 0; j < cert.predicted_singular_values.size() && mbad.empty(); ++j) {
      const double t = cert.predicted_singular_values[j].get_d();
      int verts = 0;
      for (const auto& v : reeb.vertices) verts += v.sweep_index == static_cast<int>(j) ? 1 : 0;
      std::vector<double> vals;
      for (const auto& cp : rep.critical_points)
        if (std::abs(cp.value - t) <= guard) vals.push_back(cp.value);
      std::sort(vals.begin(), vals.end());
      int distinct = 0;
      for (std::size_t i = 0; i < vals.size(); ++i)
        if (i == 0 || vals[i] - vals[i - 1] > config.tol_value) ++distinct;
      if (verts != distinct)
        mbad = std::to_string(verts) + " vertices but " + std::to_string(distinct) + " critical values near t=" + fmt(t);
    }
    for (const auto& cp : rep.critical_points) {
      if (!mbad.empty()) break;
      double scale = 0.0;
      for (double e : cp.transverse_hessian) scale = std::max(scale, std::abs(e));
      for (double e : cp.transverse_hessian)
        if (std::abs(e) <= 1e-8 * std::max(1.0, scale)) mbad = "degenerate critical point at x1=" + fmt(cp.value);
    }
    if (rep.critical_points.empty() && mbad.empty()) mbad = "no critical points";
    add("morse_surrogate", mbad.empty(), mbad.empty() ? "one vertex per critical value, all nondegenerate" : mbad);
  } catch (const VerificationError& e) {
    add("reeb_graph", false, e.what());
    add("fiber_components", false, e.what());
    add("morse_surrogate", false, e.what());
  }

  if (m == 3) {
    std::string bad;
    const auto& vals = cert.predicted_singular_values;
    try {
      for (std::size_t j = 0; j + 1 < vals.size(); ++j) {
        const Rational mid = (vals[j] + vals[j + 1]) / 2;
        auto comps = fiber_euler(F, mid, sbox);
        std::vector<std::vector<double>> centroids;
        for (const auto& c : comps) centroids.push_back(c.centroid);
        std::vector<int> chis;
        for (int i : sorted_by_first_coordinate(centroids)) chis.push_back(comps[i].euler);
        std::vector<int> want;
        for (const auto& e : expected.edges)
          if (e.interval == static_cast<int>(j)) want.push_back(e.fiber.euler_characteristic(m));
        if (bad.empty() && chis != want)
          bad = "interval " + std::to_string(j) + ": chi " + list(chis) + ", expected " + list(want);
        rep.euler_profile.push_back(std::move(chis));
      }
    } catch (const VerificationError& e) {
      bad = e.what();
    }
    std::string profile;
    for (const auto& p : rep.euler_profile) profile += list(p);
    add("fiber_euler", bad.empty(), bad.empty() ? "chi per interval " + profile : bad);
  }

  rep.passed = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.passed; });
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace reebforge
