#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace reebforge {

using Rational = mpq_class;
using Exponent = std::vector<std::uint32_t>;

/// Graded lexicographic order: lower total degree first; within a degree the
/// larger exponent of the first variable comes first.
struct GradedLexOrder {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

std::uint32_t total_degree(const Exponent& e);

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// The term map never stores zero coefficients, so two polynomials compare
/// equal exactly when they are equal as functions.
class Polynomial {
 public:
  using TermMap = std::map<Exponent, Rational, GradedLexOrder>;

  explicit Polynomial(std::size_t num_vars);

  static Polynomial constant(std::size_t num_vars, const Rational& c);
  static Polynomial variable(std::size_t num_vars, std::size_t var);
  static Polynomial monomial(Exponent exponent, const Rational& c);

  std::size_t num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// -1 for the zero polynomial.
  int degree() const;
  /// Indices of variables with a non-zero exponent in some term.
  std::vector<std::size_t> occurring_vars() const;

  void add_term(const Exponent& exponent, const Rational& c);

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned k) const;

  Rational eval(std::span<const Rational> x) const;
  double eval(std::span<const double> x) const;

  Polynomial derivative(std::size_t var) const;
  /// Substitutes `value` for `var`; the result has num_vars - 1 variables.
  Polynomial restrict(std::size_t var, const Rational& value) const;
  /// Same polynomial viewed in `new_num_vars >= num_vars` variables.
  Polynomial embed(std::size_t new_num_vars) const;

 private:
  std::size_t num_vars_;
  TermMap terms_;
};

struct Gradient {
  std::vector<Polynomial> components;
};

Gradient gradient(const Polynomial& p);

/// prod(factors) - sum_{v in subtracted_square_vars} x_v^2, kept unexpanded.
class FactoredForm {
 public:
  FactoredForm() = default;
  FactoredForm(std::vector<Polynomial> factors, std::vector<std::size_t> subtracted_square_vars,
               std::size_t num_vars);

  const std::vector<Polynomial>& factors() const { return factors_; }
  const std::vector<std::size_t>& subtracted_square_vars() const { return subtracted_; }
  std::size_t num_vars() const { return num_vars_; }

  Rational eval(std::span<const Rational> x) const;
  double eval(std::span<const double> x) const;
  /// Product-rule gradient evaluated numerically.
  std::vector<double> gradient_at(std::span<const double> x) const;

  Polynomial product() const;
  Polynomial expand() const;
  int degree() const;

  /// Restriction of a factor variable, or of a subtracted variable at 0.
  FactoredForm restrict(std::size_t var, const Rational& value) const;

  friend bool operator==(const FactoredForm&, const FactoredForm&) = default;

 private:
  std::vector<Polynomial> factors_;
  std::vector<std::size_t> subtracted_;
  std::size_t num_vars_ = 0;
};

inline Polynomial expand(const FactoredForm& f) { return f.expand(); }

/// One term per line: `num/den e1 ... ek`, graded-lex order, LF endings.
std::string to_text(const Polynomial& p);
Polynomial polynomial_from_text(std::string_view text, std::size_t num_vars);

std::string rational_to_string(const Rational& q);
Rational rational_from_string(std::string_view s);
/// Exact conversion of a finite double.
Rational rational_from_double(double v);

}  // namespace reebforge
