#include "reebforge/poly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reebforge {

std::uint32_t total_degree(const Exponent& e) {
  std::uint32_t d = 0;
  for (auto v : e) d += v;
  return d;
}

bool GradedLexOrder::operator()(const Exponent& a, const Exponent& b) const {
  const auto da = total_degree(a);
  const auto db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

void check_arity(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                " coordinates, got " + std::to_string(got));
  }
}

template <class T>
std::vector<std::vector<T>> power_table(std::span<const T> x, std::uint32_t max_exp) {
  std::vector<std::vector<T>> table(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    table[i].resize(max_exp + 1);
    table[i][0] = T(1);
    for (std::uint32_t k = 1; k <= max_exp; ++k) table[i][k] = table[i][k - 1] * x[i];
  }
  return table;
}

std::uint32_t max_exponent(const Polynomial::TermMap& terms) {
  std::uint32_t m = 0;
  for (const auto& [e, c] : terms)
    for (auto v : e) m = std::max(m, v);
  return m;
}

}  // namespace

Polynomial::Polynomial(std::size_t num_vars) : num_vars_(num_vars) {
  if (num_vars == 0) throw std::invalid_argument("polynomial needs at least one variable");
}

Polynomial Polynomial::constant(std::size_t num_vars, const Rational& c) {
  Polynomial p(num_vars);
  p.add_term(Exponent(num_vars, 0), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t num_vars, std::size_t var) {
  if (var >= num_vars) throw std::invalid_argument("variable index out of range");
  Exponent e(num_vars, 0);
  e[var] = 1;
  return monomial(std::move(e), Rational(1));
}

Polynomial Polynomial::monomial(Exponent exponent, const Rational& c) {
  Polynomial p(exponent.size());
  p.add_term(exponent, c);
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
}

int Polynomial::degree() const {
  if (terms_.empty()) return -1;
  // Graded order: the last term has maximal degree.
  return static_cast<int>(total_degree(terms_.rbegin()->first));
}

std::vector<std::size_t> Polynomial::occurring_vars() const {
  std::vector<bool> seen(num_vars_, false);
  for (const auto& [e, c] : terms_)
    for (std::size_t i = 0; i < num_vars_; ++i)
      if (e[i] != 0) seen[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < num_vars_; ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

void Polynomial::add_term(const Exponent& exponent, const Rational& c) {
  check_arity(num_vars_, exponent.size());
  if (sgn(c) == 0) return;
  auto [it, inserted] = terms_.try_emplace(exponent, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_arity(num_vars_, other.num_vars_);
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_arity(num_vars_, other.num_vars_);
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  check_arity(a.num_vars_, b.num_vars_);
  Polynomial r(a.num_vars_);
  Exponent e(a.num_vars_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::pow(unsigned k) const {
  Polynomial r = constant(num_vars_, Rational(1));
  for (unsigned i = 0; i < k; ++i) r = r * *this;
  return r;
}

Rational Polynomial::eval(std::span<const Rational> x) const {
  check_arity(num_vars_, x.size());
  const auto table = power_table<Rational>(x, max_exponent(terms_));
  Rational sum = 0;
  for (const auto& [e, c] : terms_) {
    Rational term = c;
    for (std::size_t i = 0; i < num_vars_; ++i)
      if (e[i] != 0) term *= table[i][e[i]];
    sum += term;
  }
  return sum;
}

double Polynomial::eval(std::span<const double> x) const {
  check_arity(num_vars_, x.size());
  const auto table = power_table<double>(x, max_exponent(terms_));
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c.get_d();
    for (std::size_t i = 0; i < num_vars_; ++i)
      if (e[i] != 0) term *= table[i][e[i]];
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= num_vars_) throw std::invalid_argument("variable index out of range");
  Polynomial r(num_vars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    r.add_term(d, c * e[var]);
  }
  return r;
}

Polynomial Polynomial::restrict(std::size_t var, const Rational& value) const {
  if (var >= num_vars_) throw std::invalid_argument("variable index out of range");
  if (num_vars_ == 1) throw std::invalid_argument("cannot restrict the only variable");
  Polynomial r(num_vars_ - 1);
  Exponent reduced(num_vars_ - 1);
  for (const auto& [e, c] : terms_) {
    Rational factor;
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), value.get_num_mpz_t(), e[var]);
    mpz_pow_ui(den.get_mpz_t(), value.get_den_mpz_t(), e[var]);
    factor = Rational(num, den);
    factor.canonicalize();
    std::size_t k = 0;
    for (std::size_t i = 0; i < num_vars_; ++i)
      if (i != var) reduced[k++] = e[i];
    r.add_term(reduced, c * factor);
  }
  return r;
}

Polynomial Polynomial::embed(std::size_t new_num_vars) const {
  if (new_num_vars < num_vars_) throw std::invalid_argument("embed cannot drop variables");
  Polynomial r(new_num_vars);
  for (const auto& [e, c] : terms_) {
    Exponent w(new_num_vars, 0);
    std::copy(e.begin(), e.end(), w.begin());
    r.add_term(w, c);
  }
  return r;
}

Gradient gradient(const Polynomial& p) {
  Gradient g;
  g.components.reserve(p.num_vars());
  for (std::size_t i = 0; i < p.num_vars(); ++i) g.components.push_back(p.derivative(i));
  return g;
}

FactoredForm::FactoredForm(std::vector<Polynomial> factors,
                           std::vector<std::size_t> subtracted_square_vars, std::size_t num_vars)
    : factors_(std::move(factors)), subtracted_(std::move(subtracted_square_vars)),
      num_vars_(num_vars) {
  if (num_vars_ == 0) throw std::invalid_argument("factored form needs at least one variable");
  std::vector<bool> used(num_vars_, false);
  for (const auto& f : factors_) {
    check_arity(num_vars_, f.num_vars());
    for (auto v : f.occurring_vars()) used[v] = true;
  }
  std::vector<bool> seen(num_vars_, false);
  for (auto v : subtracted_) {
    if (v >= num_vars_) throw std::invalid_argument("subtracted variable out of range");
    if (seen[v]) throw std::invalid_argument("subtracted variables must be distinct");
    if (used[v]) throw std::invalid_argument("subtracted variable occurs in a factor");
    seen[v] = true;
  }
}

Rational FactoredForm::eval(std::span<const Rational> x) const {
  check_arity(num_vars_, x.size());
  Rational prod = 1;
  for (const auto& f : factors_) prod *= f.eval(x);
  for (auto v : subtracted_) prod -= x[v] * x[v];
  return prod;
}

double FactoredForm::eval(std::span<const double> x) const {
  check_arity(num_vars_, x.size());
  double prod = 1.0;
  for (const auto& f : factors_) prod *= f.eval(x);
  for (auto v : subtracted_) prod -= x[v] * x[v];
  return prod;
}

std::vector<double> FactoredForm::gradient_at(std::span<const double> x) const {
  check_arity(num_vars_, x.size());
  const std::size_t k = factors_.size();
  std::vector<double> values(k);
  for (std::size_t i = 0; i < k; ++i) values[i] = factors_[i].eval(x);
  std::vector<double> g(num_vars_, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double others = 1.0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) others *= values[j];
    if (others == 0.0) continue;
    for (std::size_t v = 0; v < num_vars_; ++v) {
      const auto d = factors_[i].derivative(v);
      if (!d.is_zero()) g[v] += others * d.eval(x);
    }
  }
  for (auto v : subtracted_) g[v] -= 2.0 * x[v];
  return g;
}

Polynomial FactoredForm::product() const {
  Polynomial prod = Polynomial::constant(num_vars_, Rational(1));
  for (const auto& f : factors_) prod = prod * f;
  return prod;
}

Polynomial FactoredForm::expand() const {
  Polynomial p = product();
  for (auto v : subtracted_) {
    Exponent e(num_vars_, 0);
    e[v] = 2;
    p.add_term(e, Rational(-1));
  }
  return p;
}

int FactoredForm::degree() const { return expand().degree(); }

FactoredForm FactoredForm::restrict(std::size_t var, const Rational& value) const {
  if (var >= num_vars_) throw std::invalid_argument("variable index out of range");
  std::vector<std::size_t> subtracted;
  for (auto v : subtracted_) {
    if (v == var) {
      if (sgn(value) != 0)
        throw std::invalid_argument(
            "restricting a subtracted-square variable is only representable at 0");
      continue;
    }
    subtracted.push_back(v > var ? v - 1 : v);
  }
  std::vector<Polynomial> factors;
  factors.reserve(factors_.size());
  for (const auto& f : factors_) factors.push_back(f.restrict(var, value));
  return FactoredForm(std::move(factors), std::move(subtracted), num_vars_ - 1);
}

std::string rational_to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational rational_from_string(std::string_view s) {
  std::string str(s);
  const auto slash = str.find('/');
  try {
    Rational q;
    if (slash == std::string::npos) {
      q = Rational(mpz_class(str), mpz_class(1));
    } else {
      mpz_class den(str.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator in '" + str + "'");
      q = Rational(mpz_class(str.substr(0, slash)), den);
    }
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("malformed rational '" + str + "'");
  }
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value has no rational form");
  return Rational(v);
}

std::string to_text(const Polynomial& p) {
  std::string out;
  for (const auto& [e, c] : p.terms()) {
    out += rational_to_string(c);
    for (auto v : e) {
      out += ' ';
      out += std::to_string(v);
    }
    out += '\n';
  }
  return out;
}

Polynomial polynomial_from_text(std::string_view text, std::size_t num_vars) {
  Polynomial p(num_vars);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string coeff;
    fields >> coeff;
    Exponent e;
    std::string tok;
    while (fields >> tok) {
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad exponent '" + tok +
                                    "'");
      e.push_back(v);
    }
    if (e.size() != num_vars)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(num_vars) + " exponents");
    p.add_term(e, rational_from_string(coeff));
  }
  return p;
}

}  // namespace reebforge
