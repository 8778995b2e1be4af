#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reebforge/poly.hpp"

namespace reebforge {

/// Double-precision copy of a Polynomial for fast repeated evaluation.
class NumericPolynomial {
 public:
  NumericPolynomial() = default;
  explicit NumericPolynomial(const Polynomial& p);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_terms() const { return coefs_.size(); }
  std::uint32_t max_exponent() const { return max_exp_; }
  double coef(std::size_t t) const { return coefs_[t]; }
  std::uint32_t exponent(std::size_t t, std::size_t v) const { return exps_[t * num_vars_ + v]; }

  double eval(std::span<const double> x) const;

 private:
  std::size_t num_vars_ = 0;
  std::uint32_t max_exp_ = 0;
  std::vector<double> coefs_;
  std::vector<std::uint32_t> exps_;
};

/// F together with its first and second partials, all compiled to doubles.
class DifferentiableField {
 public:
  explicit DifferentiableField(const Polynomial& f);

  std::size_t num_vars() const { return value_.num_vars(); }
  double value(std::span<const double> x) const { return value_.eval(x); }
  std::vector<double> gradient(std::span<const double> x) const;
  /// Row-major num_vars x num_vars.
  std::vector<double> hessian(std::span<const double> x) const;

 private:
  NumericPolynomial value_;
  std::vector<NumericPolynomial> grad_;
  std::vector<NumericPolynomial> hess_;  // upper triangle, row-major
};

/// Evaluates a polynomial on tensor-product grids by collapsing one variable
/// at a time, so the per-node cost is the size of the innermost univariate
/// polynomial rather than the full term count.
class GridEvaluator {
 public:
  explicit GridEvaluator(const NumericPolynomial& p);

  std::size_t num_vars() const { return levels_.size(); }

  /// `axes[k]` lists the coordinates of variable k. Output is row-major with
  /// the last variable fastest.
  void evaluate(const std::vector<std::vector<double>>& axes, std::vector<double>& out) const;

  /// Fixes variable 0 at `x0` and evaluates over the remaining axes.
  void evaluate_slab(double x0, const std::vector<std::vector<double>>& rest_axes,
                     std::vector<double>& out) const;

 private:
  struct Level {
    std::vector<std::uint32_t> target;
    std::vector<std::uint32_t> power;
    std::size_t next_size = 0;
    std::uint32_t max_power = 0;
  };

  void collapse(std::size_t level, std::span<const double> coefs, double x,
                std::vector<double>& next) const;
  void recurse(std::size_t level, std::span<const double> coefs,
               const std::vector<std::vector<double>>& axes, std::size_t axis_offset,
               std::span<double> out) const;

  std::vector<double> coefs_;
  std::vector<Level> levels_;
};

}  // namespace reebforge
