#include "reebforge/numeric.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace reebforge {

NumericPolynomial::NumericPolynomial(const Polynomial& p) : num_vars_(p.num_vars()) {
  coefs_.reserve(p.terms().size());
  exps_.reserve(p.terms().size() * num_vars_);
  for (const auto& [e, c] : p.terms()) {
    coefs_.push_back(c.get_d());
    for (auto v : e) {
      exps_.push_back(v);
      max_exp_ = std::max(max_exp_, v);
    }
  }
}

double NumericPolynomial::eval(std::span<const double> x) const {
  if (x.size() != num_vars_) throw std::invalid_argument("dimension mismatch in numeric eval");
  // Small fixed-size power table on the stack for the common case.
  constexpr std::size_t kMaxVars = 8;
  constexpr std::uint32_t kMaxExp = 31;
  if (num_vars_ <= kMaxVars && max_exp_ <= kMaxExp) {
    double table[kMaxVars][kMaxExp + 1];
    for (std::size_t i = 0; i < num_vars_; ++i) {
      table[i][0] = 1.0;
      for (std::uint32_t k = 1; k <= max_exp_; ++k) table[i][k] = table[i][k - 1] * x[i];
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < coefs_.size(); ++t) {
      double term = coefs_[t];
      const std::uint32_t* e = &exps_[t * num_vars_];
      for (std::size_t i = 0; i < num_vars_; ++i) term *= table[i][e[i]];
      sum += term;
    }
    return sum;
  }
  std::vector<std::vector<double>> table(num_vars_, std::vector<double>(max_exp_ + 1, 1.0));
  for (std::size_t i = 0; i < num_vars_; ++i)
    for (std::uint32_t k = 1; k <= max_exp_; ++k) table[i][k] = table[i][k - 1] * x[i];
  double sum = 0.0;
  for (std::size_t t = 0; t < coefs_.size(); ++t) {
    double term = coefs_[t];
    for (std::size_t i = 0; i < num_vars_; ++i) term *= table[i][exps_[t * num_vars_ + i]];
    sum += term;
  }
  return sum;
}

DifferentiableField::DifferentiableField(const Polynomial& f) : value_(f) {
  const std::size_t n = f.num_vars();
  std::vector<Polynomial> first;
  for (std::size_t i = 0; i < n; ++i) {
    first.push_back(f.derivative(i));
    grad_.emplace_back(first.back());
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) hess_.emplace_back(first[i].derivative(j));
}

std::vector<double> DifferentiableField::gradient(std::span<const double> x) const {
  std::vector<double> g(grad_.size());
  for (std::size_t i = 0; i < grad_.size(); ++i) g[i] = grad_[i].eval(x);
  return g;
}

std::vector<double> DifferentiableField::hessian(std::span<const double> x) const {
  const std::size_t n = grad_.size();
  std::vector<double> h(n * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++k) {
      const double v = hess_[k].eval(x);
      h[i * n + j] = v;
      h[j * n + i] = v;
    }
  }
  return h;
}

GridEvaluator::GridEvaluator(const NumericPolynomial& p) {
  const std::size_t n = p.num_vars();
  levels_.resize(n);
  coefs_.resize(p.num_terms());
  for (std::size_t t = 0; t < p.num_terms(); ++t) coefs_[t] = p.coef(t);

  // Terms at level k are the distinct exponent tails (vars k..n-1).
  std::vector<std::vector<std::uint32_t>> current(p.num_terms());
  for (std::size_t t = 0; t < p.num_terms(); ++t)
    for (std::size_t v = 0; v < n; ++v) current[t].push_back(p.exponent(t, v));

  for (std::size_t k = 0; k < n; ++k) {
    Level& level = levels_[k];
    std::map<std::vector<std::uint32_t>, std::uint32_t> index;
    std::vector<std::vector<std::uint32_t>> next;
    level.target.resize(current.size());
    level.power.resize(current.size());
    for (std::size_t t = 0; t < current.size(); ++t) {
      std::vector<std::uint32_t> tail(current[t].begin() + 1, current[t].end());
      auto [it, inserted] = index.try_emplace(tail, static_cast<std::uint32_t>(next.size()));
      if (inserted) next.push_back(tail);
      level.target[t] = it->second;
      level.power[t] = current[t][0];
      level.max_power = std::max(level.max_power, current[t][0]);
    }
    level.next_size = next.size();
    current = std::move(next);
  }
}

void GridEvaluator::collapse(std::size_t level, std::span<const double> coefs, double x,
                             std::vector<double>& next) const {
  const Level& lv = levels_[level];
  next.assign(lv.next_size, 0.0);
  double powers[64];
  std::vector<double> heap_powers;
  double* pw = powers;
  if (lv.max_power >= 64) {
    heap_powers.resize(lv.max_power + 1);
    pw = heap_powers.data();
  }
  pw[0] = 1.0;
  for (std::uint32_t k = 1; k <= lv.max_power; ++k) pw[k] = pw[k - 1] * x;
  for (std::size_t t = 0; t < lv.target.size(); ++t) next[lv.target[t]] += coefs[t] * pw[lv.power[t]];
}

void GridEvaluator::recurse(std::size_t level, std::span<const double> coefs,
                            const std::vector<std::vector<double>>& axes, std::size_t axis_offset,
                            std::span<double> out) const {
  const auto& axis = axes[level - axis_offset];
  const std::size_t stride = out.size() / axis.size();
  std::vector<double> next;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    collapse(level, coefs, axis[i], next);
    if (level + 1 == levels_.size()) {
      out[i] = next.empty() ? 0.0 : next[0];
    } else {
      recurse(level + 1, next, axes, axis_offset, out.subspan(i * stride, stride));
    }
  }
}

void GridEvaluator::evaluate(const std::vector<std::vector<double>>& axes,
                             std::vector<double>& out) const {
  if (axes.size() != levels_.size()) throw std::invalid_argument("grid arity mismatch");
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  out.assign(total, 0.0);
  if (total == 0) return;
  recurse(0, coefs_, axes, 0, out);
}

void GridEvaluator::evaluate_slab(double x0, const std::vector<std::vector<double>>& rest_axes,
                                  std::vector<double>& out) const {
  if (rest_axes.size() + 1 != levels_.size()) throw std::invalid_argument("grid arity mismatch");
  std::vector<double> next;
  collapse(0, coefs_, x0, next);
  std::size_t total = 1;
  for (const auto& a : rest_axes) total *= a.size();
  out.assign(total, 0.0);
  if (levels_.size() == 1) {
    out.assign(1, next.empty() ? 0.0 : next[0]);
    return;
  }
  recurse(1, next, rest_axes, 1, out);
}

}  // namespace reebforge
