#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "reebforge/numeric.hpp"
#include "reebforge/poly.hpp"
#include "test_support.hpp"

using namespace reebforge;

namespace {

Polynomial random_poly(std::mt19937_64& rng, std::size_t n, int terms, unsigned max_exp) {
  Polynomial p(n);
  std::uniform_int_distribution<unsigned> e(0, max_exp);
  for (int i = 0; i < terms; ++i) {
    Exponent ex(n);
    for (auto& v : ex) v = e(rng);
    p.add_term(ex, rftest::random_rational(rng, 3, 5));
  }
  return p;
}

// Schoolbook product on a bare map, independent of the class arithmetic.
std::map<Exponent, Rational> naive_product(const Polynomial& a, const Polynomial& b) {
  std::map<Exponent, Rational> out;
  for (const auto& [ea, ca] : a.terms())
    for (const auto& [eb, cb] : b.terms()) {
      Exponent e(ea.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
      out[e] += ca * cb;
    }
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

}  // namespace

TEST(Poly, ProductMatchesSchoolbookOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_poly(rng, 3, 6, 3);
    const auto b = random_poly(rng, 3, 5, 2);
    const auto oracle = naive_product(a, b);
    const auto prod = a * b;
    ASSERT_EQ(prod.terms().size(), oracle.size());
    for (const auto& [e, c] : prod.terms()) EXPECT_EQ(c, oracle.at(e));
  }
}

TEST(Poly, EvalIsMultiplicative) {
  std::mt19937_64 rng(12);
  const auto a = random_poly(rng, 4, 7, 3);
  const auto b = random_poly(rng, 4, 7, 3);
  const auto ab = a * b;
  for (int i = 0; i < 100; ++i) {
    const auto x = rftest::random_point(rng, 4);
    EXPECT_EQ(ab.eval(std::span<const Rational>(x)), a.eval(std::span<const Rational>(x)) * b.eval(std::span<const Rational>(x)));
  }
}

TEST(Poly, ZeroCoefficientsAreDropped) {
  Polynomial x = Polynomial::variable(2, 0);
  Polynomial d = x - x;
  EXPECT_TRUE(d.is_zero());
  EXPECT_EQ(d.degree(), -1);
  EXPECT_EQ(d, Polynomial(2));
}

TEST(Poly, PowMatchesRepeatedProduct) {
  std::mt19937_64 rng(13);
  const auto a = random_poly(rng, 2, 3, 2);
  EXPECT_EQ(a.pow(3), a * a * a);
  EXPECT_EQ(a.pow(0), Polynomial::constant(2, 1));
}

TEST(Poly, GradedLexOrder) {
  GradedLexOrder lt;
  EXPECT_TRUE(lt({0, 0}, {1, 0}));
  EXPECT_TRUE(lt({2, 0}, {1, 1}));
  EXPECT_TRUE(lt({1, 1}, {0, 2}));
  EXPECT_FALSE(lt({0, 2}, {0, 2}));
}

TEST(Poly, DerivativeAgreesWithExactDifferenceQuotient) {
  std::mt19937_64 rng(14);
  const auto p = random_poly(rng, 3, 8, 4);
  const Rational h{mpz_class(1), mpz_class(1) << 40};
  for (int i = 0; i < 25; ++i) {
    auto x = rftest::random_point(rng, 3, 2);
    for (std::size_t v = 0; v < 3; ++v) {
      auto xp = x, xm = x;
      xp[v] += h;
      xm[v] -= h;
      const Rational fd = (p.eval(std::span<const Rational>(xp)) - p.eval(std::span<const Rational>(xm))) / (2 * h);
      const double exact = p.derivative(v).eval(std::span<const Rational>(x)).get_d();
      EXPECT_NEAR(fd.get_d(), exact, 1e-9 * (1.0 + std::abs(exact)));
    }
  }
}

TEST(Poly, RestrictCommutesWithEvaluation) {
  std::mt19937_64 rng(15);
  const auto p = random_poly(rng, 4, 10, 3);
  for (int i = 0; i < 30; ++i) {
    const auto x = rftest::random_point(rng, 4);
    const Polynomial r = p.restrict(0, x[0]);
    ASSERT_EQ(r.num_vars(), 3u);
    std::vector<Rational> rest(x.begin() + 1, x.end());
    EXPECT_EQ(r.eval(std::span<const Rational>(rest)), p.eval(std::span<const Rational>(x)));
  }
}

TEST(Poly, EmbedAddsInertVariables) {
  std::mt19937_64 rng(16);
  const auto p = random_poly(rng, 2, 5, 3);
  const auto q = p.embed(4);
  EXPECT_EQ(q.num_vars(), 4u);
  auto x = rftest::random_point(rng, 4);
  std::vector<Rational> head(x.begin(), x.begin() + 2);
  EXPECT_EQ(q.eval(std::span<const Rational>(x)), p.eval(std::span<const Rational>(head)));
  EXPECT_EQ(q.occurring_vars().size(), p.occurring_vars().size());
}

TEST(Poly, TextRoundTrip) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    const auto p = random_poly(rng, 3, 9, 4);
    const std::string text = to_text(p);
    EXPECT_EQ(polynomial_from_text(text, 3), p);
    EXPECT_EQ(text.find('\r'), std::string::npos);
  }
}

TEST(Poly, TextFormat) {
  Polynomial p = Polynomial::constant(2, Rational(1)) - Polynomial::variable(2, 0).pow(2) * rftest::Q(3, 2);
  EXPECT_EQ(to_text(p), "1/1 0 0\n-3/2 2 0\n");
}

TEST(Poly, RationalStrings) {
  EXPECT_EQ(rational_to_string(rftest::Q(-6, 4)), "-3/2");
  EXPECT_EQ(rational_from_string("10/4"), rftest::Q(5, 2));
  EXPECT_EQ(rational_from_double(0.375), rftest::Q(3, 8));
  EXPECT_THROW(rational_from_string("x/2"), std::exception);
}

TEST(Poly, FactoredFormExpandsToProductMinusSquares) {
  const std::size_t n = 3;
  Polynomial f1 = Polynomial::constant(n, 4) - Polynomial::variable(n, 0).pow(2);
  Polynomial f2 = Polynomial::variable(n, 1).pow(2) + Polynomial::constant(n, 1);
  FactoredForm F({f1, f2}, {2}, n);
  EXPECT_EQ(F.expand(), f1 * f2 - Polynomial::variable(n, 2).pow(2));
  EXPECT_EQ(F.degree(), 4);
  std::mt19937_64 rng(18);
  const auto P = F.expand();
  for (int i = 0; i < 20; ++i) {
    auto x = rftest::random_point(rng, n);
    EXPECT_EQ(F.eval(std::span<const Rational>(x)), P.eval(std::span<const Rational>(x)));
  }
}

TEST(Poly, FactoredGradientMatchesExpanded) {
  const std::size_t n = 3;
  Polynomial f1 = Polynomial::constant(n, 4) - Polynomial::variable(n, 0).pow(2) - Polynomial::variable(n, 1).pow(2);
  Polynomial f2 = Polynomial::variable(n, 0).pow(2) * Rational(2) + Polynomial::variable(n, 1) - Polynomial::constant(n, 1);
  FactoredForm F({f1, f2}, {2}, n);
  const auto g = gradient(F.expand());
  std::mt19937_64 rng(19);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x{std::uniform_real_distribution<double>(-2, 2)(rng), 0.3, -0.7};
    const auto num = F.gradient_at(std::span<const double>(x));
    for (std::size_t k = 0; k < n; ++k)
      EXPECT_NEAR(num[k], g.components[k].eval(std::span<const double>(x)), 1e-10);
  }
}

TEST(Numeric, FieldMatchesExactDerivatives) {
  std::mt19937_64 rng(20);
  const auto p = random_poly(rng, 3, 12, 4);
  DifferentiableField f(p);
  for (int i = 0; i < 20; ++i) {
    const auto xq = rftest::random_point(rng, 3, 1);
    std::vector<double> x;
    for (const auto& q : xq) x.push_back(q.get_d());
    EXPECT_NEAR(f.value(x), p.eval(std::span<const Rational>(xq)).get_d(), 1e-9);
    const auto g = f.gradient(x);
    const auto h = f.hessian(x);
    for (std::size_t a = 0; a < 3; ++a) {
      const auto da = p.derivative(a);
      EXPECT_NEAR(g[a], da.eval(std::span<const Rational>(xq)).get_d(), 1e-8);
      for (std::size_t b = 0; b < 3; ++b)
        EXPECT_NEAR(h[a * 3 + b], da.derivative(b).eval(std::span<const Rational>(xq)).get_d(), 1e-7);
    }
  }
}

TEST(Numeric, GridEvaluatorMatchesPointwise) {
  std::mt19937_64 rng(21);
  const auto p = random_poly(rng, 3, 15, 4);
  NumericPolynomial np(p);
  GridEvaluator ge(np);
  std::vector<std::vector<double>> axes{{-1.0, 0.0, 0.5}, {-0.25, 0.75}, {0.0, 1.0, 1.5, -2.0}};
  std::vector<double> out;
  ge.evaluate(axes, out);
  ASSERT_EQ(out.size(), 24u);
  std::size_t idx = 0;
  for (double a : axes[0])
    for (double b : axes[1])
      for (double c : axes[2]) {
        std::vector<double> x{a, b, c};
        EXPECT_NEAR(out[idx++], np.eval(x), 1e-10 * (1 + std::abs(np.eval(x))));
      }
}
