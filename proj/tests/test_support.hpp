#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "reebforge/grid.hpp"
#include "reebforge/poly.hpp"

namespace rftest {

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout (stderr is folded in).
inline CommandResult run(const std::string& cmd) {
  CommandResult r;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string cli() { return REEBFORGE_CLI; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("reebforge_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

inline reebforge::Rational Q(long n, long d = 1) {
  reebforge::Rational q{mpz_class(n), mpz_class(d)};
  q.canonicalize();
  return q;
}

inline reebforge::Rational random_rational(std::mt19937_64& rng, long range = 7, long den = 16) {
  std::uniform_int_distribution<long> num(-range * den, range * den);
  std::uniform_int_distribution<long> d(1, den);
  reebforge::Rational q{mpz_class(num(rng)), mpz_class(d(rng))};
  q.canonicalize();
  return q;
}

inline std::vector<reebforge::Rational> random_point(std::mt19937_64& rng, std::size_t n, long range = 3) {
  std::vector<reebforge::Rational> x;
  for (std::size_t k = 0; k < n; ++k) x.push_back(random_rational(rng, range));
  return x;
}

// Plain breadth-first flood fill over sign-change cells of F(t, .) on the
// node grid of `box`; neighbours share at least a corner.
inline int naive_component_count(const reebforge::Polynomial& F, double t, const reebforge::GridBox& box) {
  const std::size_t d = box.dim();
  std::vector<std::size_t> nodes(d), cells(d);
  std::size_t node_total = 1, cell_total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    cells[k] = box.cells[k];
    nodes[k] = box.cells[k] + 1;
    node_total *= nodes[k];
    cell_total *= cells[k];
  }
  auto coord = [&](std::size_t k, std::size_t i) {
    return box.lo[k] + (box.hi[k] - box.lo[k]) * (static_cast<double>(i) / static_cast<double>(box.cells[k]));
  };
  std::vector<char> positive(node_total);
  std::vector<std::size_t> idx(d);
  std::vector<double> x(d + 1);
  for (std::size_t n = 0; n < node_total; ++n) {
    std::size_t rem = n;
    for (std::size_t k = d; k-- > 0;) {
      idx[k] = rem % nodes[k];
      rem /= nodes[k];
    }
    x[0] = t;
    for (std::size_t k = 0; k < d; ++k) x[k + 1] = coord(k, idx[k]);
    positive[n] = F.eval(std::span<const double>(x)) > 0.0;
  }
  auto node_index = [&](const std::vector<std::size_t>& m) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < d; ++k) r = r * nodes[k] + m[k];
    return r;
  };
  auto cell_multi = [&](std::size_t c) {
    std::vector<std::size_t> m(d);
    for (std::size_t k = d; k-- > 0;) {
      m[k] = c % cells[k];
      c /= cells[k];
    }
    return m;
  };
  std::vector<char> active(cell_total, 0);
  for (std::size_t c = 0; c < cell_total; ++c) {
    const auto m = cell_multi(c);
    bool pos = false, neg = false;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      std::vector<std::size_t> v = m;
      for (std::size_t k = 0; k < d; ++k) v[k] += (corner >> k) & 1;
      (positive[node_index(v)] ? pos : neg) = true;
    }
    active[c] = pos && neg;
  }
  std::vector<char> seen(cell_total, 0);
  int count = 0;
  std::size_t offsets = 1;
  for (std::size_t k = 0; k < d; ++k) offsets *= 3;
  for (std::size_t c = 0; c < cell_total; ++c) {
    if (!active[c] || seen[c]) continue;
    ++count;
    std::deque<std::size_t> queue{c};
    seen[c] = 1;
    while (!queue.empty()) {
      const auto m = cell_multi(queue.front());
      queue.pop_front();
      for (std::size_t o = 0; o < offsets; ++o) {
        std::size_t rem = o, flat = 0;
        bool inside = true;
        for (std::size_t k = 0; k < d; ++k) {
          const long v = static_cast<long>(m[k]) + static_cast<long>(rem % 3) - 1;
          rem /= 3;
          if (v < 0 || v >= static_cast<long>(cells[k])) inside = false;
          flat = flat * cells[k] + static_cast<std::size_t>(std::max(v, 0L));
        }
        if (inside && active[flat] && !seen[flat]) {
          seen[flat] = 1;
          queue.push_back(flat);
        }
      }
    }
  }
  return count;
}

}  // namespace rftest
