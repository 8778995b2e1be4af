#include "reebforge/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reebforge {

std::vector<double> GridBox::axis(std::size_t k) const {
  std::vector<double> a(cells[k] + 1);
  const double n = static_cast<double>(cells[k]);
  // Symmetric boxes with an even cell count put a node exactly on 0.
  for (std::size_t i = 0; i <= cells[k]; ++i) a[i] = lo[k] + (hi[k] - lo[k]) * (static_cast<double>(i) / n);
  a.back() = hi[k];
  return a;
}

std::vector<std::vector<double>> GridBox::axes() const {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < dim(); ++k) out.push_back(axis(k));
  return out;
}

std::size_t GridBox::node_count() const {
  std::size_t n = 1;
  for (auto c : cells) n *= c + 1;
  return n;
}

std::size_t GridBox::cell_count() const {
  std::size_t n = 1;
  for (auto c : cells) n *= c;
  return n;
}

double GridBox::diameter() const {
  double s = 0.0;
  for (std::size_t k = 0; k < dim(); ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
  return std::sqrt(s);
}

GridBox GridBox::with_fraction(std::vector<double> lo, std::vector<double> hi, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("grid fraction must lie in (0, 1]");
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in dimension");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / fraction)));
  GridBox g{std::move(lo), std::move(hi), {}};
  g.cells.assign(g.lo.size(), n);
  return g;
}

GridBox GridBox::with_step(std::vector<double> lo, std::vector<double> hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in dimension");
  GridBox g{std::move(lo), std::move(hi), {}};
  for (std::size_t k = 0; k < g.lo.size(); ++k)
    g.cells.push_back(static_cast<std::size_t>(std::max(1.0, std::ceil((g.hi[k] - g.lo[k]) / step))));
  return g;
}

GridBox GridBox::refined() const {
  GridBox g = *this;
  for (auto& c : g.cells) c *= 2;
  return g;
}

Lattice::Lattice(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 16) throw std::invalid_argument("lattice dimension out of range");
  strides_.assign(shape_.size(), 1);
  for (std::size_t k = shape_.size(); k-- > 0;) {
    strides_[k] = size_;
    size_ *= shape_[k];
  }
  const std::size_t d = shape_.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<int> off(d);
    std::size_t c = code;
    bool zero = true;
    for (std::size_t k = 0; k < d; ++k) {
      off[k] = static_cast<int>(c % 3) - 1;
      c /= 3;
      if (off[k] != 0) zero = false;
    }
    if (!zero) full_offsets_.push_back(std::move(off));
  }
}

void Lattice::unravel(std::size_t index, std::span<std::size_t> out) const {
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    out[k] = index / strides_[k];
    index %= strides_[k];
  }
}

std::size_t Lattice::ravel(std::span<const std::size_t> multi) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) idx += multi[k] * strides_[k];
  return idx;
}

std::vector<std::int32_t> label_components(const Lattice& lattice, const std::vector<char>& mask,
                                           bool full, std::size_t& count) {
  std::vector<std::int32_t> label(lattice.size(), -1);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t start = 0; start < lattice.size(); ++start) {
    if (!mask[start] || label[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(count++);
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      lattice.for_each_neighbor(cur, full, [&](std::size_t nb) {
        if (mask[nb] && label[nb] < 0) {
          label[nb] = id;
          stack.push_back(nb);
        }
      });
    }
  }
  return label;
}

std::vector<std::size_t> corner_offsets(const Lattice& nodes) {
  const std::size_t d = nodes.dim();
  std::vector<std::size_t> offs;
  for (std::size_t bits = 0; bits < (std::size_t{1} << d); ++bits) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < d; ++k)
      if (bits & (std::size_t{1} << k)) o += nodes.strides()[k];
    offs.push_back(o);
  }
  return offs;
}

namespace {

template <class Pred>
std::vector<char> classify_cells(const Lattice& nodes, const Lattice& cells,
                                 const std::vector<double>& values, Pred pred) {
  const auto offs = corner_offsets(nodes);
  std::vector<char> mask(cells.size(), 0);
  std::size_t multi_buf[16];
  std::span<std::size_t> multi(multi_buf, cells.dim());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells.unravel(c, multi);
    const std::size_t base = nodes.ravel(multi);
    int pos = 0;
    for (auto o : offs) pos += values[base + o] > 0.0 ? 1 : 0;
    mask[c] = pred(pos, static_cast<int>(offs.size())) ? 1 : 0;
  }
  return mask;
}

}  // namespace

std::vector<char> sign_change_cells(const Lattice& nodes, const Lattice& cells,
                                    const std::vector<double>& values) {
  return classify_cells(nodes, cells, values, [](int pos, int total) { return pos > 0 && pos < total; });
}

std::vector<char> positive_touching_cells(const Lattice& nodes, const Lattice& cells,
                                          const std::vector<double>& values) {
  return classify_cells(nodes, cells, values, [](int pos, int) { return pos > 0; });
}

}  // namespace reebforge
