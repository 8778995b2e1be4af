#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace reebforge {

/// Axis-aligned box split into `cells[k]` equal cells along axis k.
struct GridBox {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> cells;

  std::size_t dim() const { return lo.size(); }
  double step(std::size_t k) const { return (hi[k] - lo[k]) / static_cast<double>(cells[k]); }
  std::vector<double> axis(std::size_t k) const;
  std::vector<std::vector<double>> axes() const;
  std::size_t node_count() const;
  std::size_t cell_count() const;
  double diameter() const;

  /// `fraction` is the cell size relative to each box side.
  static GridBox with_fraction(std::vector<double> lo, std::vector<double> hi, double fraction);
  /// Isotropic absolute cell size.
  static GridBox with_step(std::vector<double> lo, std::vector<double> hi, double step);
  /// Halves every cell.
  GridBox refined() const;
};

/// Row-major index helper for a d-dimensional array, last axis fastest.
class Lattice {
 public:
  explicit Lattice(std::vector<std::size_t> shape);

  std::size_t dim() const { return shape_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }

  void unravel(std::size_t index, std::span<std::size_t> out) const;
  std::size_t ravel(std::span<const std::size_t> multi) const;

  /// Calls `f(neighbor_index)` for face neighbours, or for all 3^d - 1
  /// neighbours when `full` is set.
  template <class F>
  void for_each_neighbor(std::size_t index, bool full, F&& f) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
  std::vector<std::vector<int>> full_offsets_;
};

/// Connected components of the cells where `mask` is set; unlabelled cells
/// get -1. Labels are assigned in index order, so they are deterministic.
std::vector<std::int32_t> label_components(const Lattice& lattice, const std::vector<char>& mask,
                                           bool full, std::size_t& count);

/// Cells (of a node grid with shape cells+1) whose corners carry both signs.
/// A node is positive when its value is > 0.
std::vector<char> sign_change_cells(const Lattice& nodes, const Lattice& cells,
                                    const std::vector<double>& values);
/// Cells with at least one positive corner.
std::vector<char> positive_touching_cells(const Lattice& nodes, const Lattice& cells,
                                          const std::vector<double>& values);

/// Node offsets (in node index space) of the 2^d corners of a cell.
std::vector<std::size_t> corner_offsets(const Lattice& nodes);

template <class F>
void Lattice::for_each_neighbor(std::size_t index, bool full, F&& f) const {
  const std::size_t d = shape_.size();
  std::size_t multi_buf[16];
  std::span<std::size_t> multi(multi_buf, d);
  unravel(index, multi);
  if (!full) {
    for (std::size_t k = 0; k < d; ++k) {
      if (multi[k] > 0) f(index - strides_[k]);
      if (multi[k] + 1 < shape_[k]) f(index + strides_[k]);
    }
    return;
  }
  for (const auto& off : full_offsets_) {
    bool ok = true;
    std::ptrdiff_t delta = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(multi[k]) + off[k];
      if (c < 0 || c >= static_cast<std::ptrdiff_t>(shape_[k])) {
        ok = false;
        break;
      }
      delta += off[k] * static_cast<std::ptrdiff_t>(strides_[k]);
    }
    if (ok) f(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(index) + delta));
  }
}

}  // namespace reebforge
