#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "reebforge/verifier.hpp"
#include "test_support.hpp"

using namespace reebforge;
using rftest::Q;

namespace {

FiberType torus(int genus = 1) { return FiberType{{Handle{1, genus}}}; }

const Certificate& sphere2() {
  static const Certificate c = synthesize(validate(SphereSpec{2}));
  return c;
}
const Certificate& sphere3() {
  static const Certificate c = synthesize(validate(SphereSpec{3}));
  return c;
}
const Certificate& theta() {
  static const Certificate c = synthesize(validate(ThetaSpec{2, 3, {FiberType{}, FiberType{}, FiberType{}}}));
  return c;
}
const Certificate& path() {
  static const Certificate c = synthesize(validate(PathSpec{3, 4, {FiberType{}, torus(), FiberType{}}}));
  return c;
}
const Certificate& path_genus2() {
  static const Certificate c = synthesize(validate(PathSpec{3, 5, {FiberType{}, torus(2), torus(), FiberType{}}}));
  return c;
}

Rational midpoint(const Certificate& c, std::size_t interval) {
  return (c.predicted_singular_values[interval] + c.predicted_singular_values[interval + 1]) / 2;
}

std::vector<int> eulers(const Certificate& c, const Rational& t, double fraction) {
  std::vector<int> out;
  for (const auto& e : fiber_euler(c.expanded, t, slice_box_for(c, fraction))) out.push_back(e.euler);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Verifier, DefaultFractions) {
  EXPECT_DOUBLE_EQ(default_grid_fraction(3), 1.0 / 200);
  EXPECT_DOUBLE_EQ(default_grid_fraction(4), 1.0 / 60);
  EXPECT_DOUBLE_EQ(default_grid_fraction(5), 1.0 / 32);
  EXPECT_DOUBLE_EQ(default_grid_fraction(6), 1.0 / 16);
  EXPECT_GT(configured_threads(3), 0u);
}

TEST(Verifier, SphereSamplesLieOnTheSphere) {
  const auto box = GridBox::with_fraction({-1.1, -1.1, -1.1}, {1.1, 1.1, 1.1}, 1.0 / 40);
  const auto res = sample_zero_set(sphere2().expanded, box, NewtonOptions{});
  ASSERT_GT(res.samples.size(), 1000u);
  for (const auto& s : res.samples) {
    double r2 = 0;
    for (double c : s.coords) r2 += c * c;
    EXPECT_LE(std::abs(std::sqrt(r2) - 1.0), 1e-6);
    EXPECT_NEAR(s.grad_norm, 2.0, 1e-5);
  }
  EXPECT_TRUE(check_nonsingular(res.samples).pass);
}

TEST(Verifier, EmptyZeroSetHasNoSamples) {
  Polynomial p = Polynomial::constant(3, 1);
  for (std::size_t k = 0; k < 3; ++k) p += Polynomial::variable(3, k).pow(2);
  const auto box = GridBox::with_fraction({-1, -1, -1}, {1, 1, 1}, 1.0 / 20);
  EXPECT_EQ(scan_zero_set(p, box).size(), 0u);
  EXPECT_THROW(sample_zero_set(p, box, NewtonOptions{}), VerificationError);
}

TEST(Verifier, NonsingularRejectsASmallGradient) {
  std::vector<SamplePoint> s{{{0, 0}, 0, 3.0}, {{1, 0}, 0, 1e-8}};
  const auto r = check_nonsingular(s, 1e-6);
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.min_grad_norm, 1e-8);
}

TEST(Verifier, SphereCriticalPointsAtThePoles) {
  const auto box = ambient_box_for(sphere2(), 1.0 / 80);
  const auto cps = find_critical_points(sphere2().expanded, box, NewtonOptions{});
  ASSERT_EQ(cps.size(), 2u);
  EXPECT_NEAR(cps[0].value, -1.0, 1e-6);
  EXPECT_NEAR(cps[1].value, 1.0, 1e-6);
  for (const auto& cp : cps)
    for (double e : cp.transverse_hessian) EXPECT_NEAR(std::abs(e), 2.0, 1e-9);
}

TEST(Verifier, GuardBandAndSweepPositions) {
  const std::vector<Rational> v{Q(-3), Q(-1), Q(1), Q(3)};
  EXPECT_EQ(guard_band(v), Q(1, 5));
  const auto pos = sweep_positions(Q(-1), Q(1), Q(1, 5), 5);
  ASSERT_EQ(pos.size(), 5u);
  EXPECT_EQ(pos.front(), Q(-4, 5));
  EXPECT_EQ(pos.back(), Q(4, 5));
  EXPECT_EQ(pos[2], Q(0));
  EXPECT_EQ(sweep_positions(Q(-1), Q(1), Q(1, 5), 1), std::vector<Rational>{Q(0)});
}

TEST(Verifier, SymmetricBoxesHaveANodeAtZero) {
  const auto box = slice_box_for(theta(), 1.0 / 200);
  for (std::size_t k = 0; k < box.dim(); ++k) {
    EXPECT_EQ(box.cells[k] % 2, 0u);
    EXPECT_DOUBLE_EQ(box.lo[k], -box.hi[k]);
    EXPECT_EQ(box.axis(k)[box.cells[k] / 2], 0.0);
  }
}

TEST(Verifier, ThetaSliceCountsAgreeWithFloodFillOracle) {
  const auto box = slice_box_for(theta(), 1.0 / 200);
  for (const auto& [t, expect] : std::vector<std::pair<Rational, int>>{{Q(-2), 1}, {Q(0), 3}, {Q(1, 2), 3}, {Q(2), 1}}) {
    const auto s = slice_components(theta().expanded, t, box);
    EXPECT_EQ(static_cast<int>(s.components.size()), expect) << "t=" << t.get_d();
    EXPECT_EQ(rftest::naive_component_count(theta().expanded, t.get_d(), box), expect);
  }
}

TEST(Verifier, ThetaReebGraph) {
  const auto& c = theta();
  const auto reeb = extract_reeb(c.expanded, c.predicted_singular_values, slice_box_for(c, 1.0 / 200),
                                 SweepOptions{5, 1.0 / 200, 1});
  EXPECT_EQ(reeb.interval_counts, (std::vector<int>{1, 3, 1}));
  EXPECT_EQ(reeb.sorted_degrees(), (std::vector<int>{1, 1, 4, 4}));
  EXPECT_EQ(reeb.edges.size(), 5u);
  EXPECT_EQ(reeb.slices.size(), 15u);
  const std::string csv = sweep_csv(reeb);
  EXPECT_EQ(csv.rfind("t,interval,components\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
}

TEST(Verifier, ThreadCountDoesNotChangeTheSweep) {
  const auto& c = theta();
  const auto box = slice_box_for(c, 1.0 / 100);
  const auto a = extract_reeb(c.expanded, c.predicted_singular_values, box, SweepOptions{5, 1.0 / 100, 1});
  const auto b = extract_reeb(c.expanded, c.predicted_singular_values, box, SweepOptions{5, 1.0 / 100, 3});
  EXPECT_EQ(sweep_csv(a), sweep_csv(b));
  EXPECT_EQ(a.sorted_degrees(), b.sorted_degrees());
}

TEST(Verifier, FiberEulerCharacteristics) {
  const double f = 1.0 / 60;
  EXPECT_EQ(eulers(sphere3(), Q(0), f), std::vector<int>{2});
  EXPECT_EQ(eulers(path(), midpoint(path(), 0), f), std::vector<int>{2});
  EXPECT_EQ(eulers(path(), midpoint(path(), 1), f), std::vector<int>{0});
  EXPECT_EQ(eulers(path_genus2(), midpoint(path_genus2(), 1), f), std::vector<int>{-2});
  EXPECT_EQ(eulers(path_genus2(), midpoint(path_genus2(), 2), f), std::vector<int>{0});
}

TEST(Verifier, FiberEulerNeedsSurfaces) {
  EXPECT_THROW(fiber_euler(theta().expanded, Q(0), slice_box_for(theta(), 1.0 / 50)), std::exception);
}

TEST(Verifier, CurveMeshIsClosed) {
  const auto mesh = slice_mesh(sphere2().expanded, Q(0), slice_box_for(sphere2(), 1.0 / 100));
  EXPECT_EQ(mesh.dim, 2u);
  ASSERT_FALSE(mesh.elements.empty());
  // A closed polyline has as many segments as vertices.
  EXPECT_EQ(mesh.elements.size(), mesh.vertices.size());
  for (const auto& v : mesh.vertices) EXPECT_NEAR(std::hypot(v[0], v[1]), 1.0, 1e-3);
  const std::string obj = to_obj(mesh, 0.0);
  EXPECT_NE(obj.find("\nv 0 "), std::string::npos);
  EXPECT_NE(obj.find("\nl "), std::string::npos);
}

TEST(Verifier, SurfaceMeshHasTriangles) {
  const auto mesh = slice_mesh(sphere3().expanded, Q(0), slice_box_for(sphere3(), 1.0 / 30));
  EXPECT_EQ(mesh.dim, 3u);
  ASSERT_FALSE(mesh.elements.empty());
  for (const auto& e : mesh.elements) EXPECT_EQ(e.size(), 3u);
  EXPECT_NE(to_obj(mesh, 0.0).find("\nf "), std::string::npos);
}

TEST(Verifier, SphereCertificatePasses) {
  const auto rep = verify(sphere2());
  EXPECT_TRUE(rep.passed);
  EXPECT_TRUE(rep.failed_checks().empty());
  ASSERT_TRUE(rep.reeb.has_value());
  EXPECT_EQ(rep.reeb->interval_counts, std::vector<int>{1});
  EXPECT_EQ(rep.critical_points.size(), 2u);
  ASSERT_NE(rep.find("critical_values"), nullptr);
  EXPECT_EQ(rep.find("fiber_euler"), nullptr);
}

TEST(Verifier, ThetaCertificatePasses) {
  const auto rep = verify(theta());
  EXPECT_TRUE(rep.passed) << (rep.failed_checks().empty() ? "" : rep.failed_checks().front());
  EXPECT_EQ(rep.critical_points.size(), 6u);
  EXPECT_GE(rep.min_grad_norm, 1e-6);
}

TEST(Verifier, PerturbedPolynomialFailsTheZeroSetCheck) {
  Certificate c = sphere2();
  c.expanded += Polynomial::constant(3, Q(1, 100));
  const auto rep = verify(c);
  EXPECT_FALSE(rep.passed);
  const auto failed = rep.failed_checks();
  EXPECT_NE(std::find(failed.begin(), failed.end(), "zero_set"), failed.end());
  EXPECT_NE(std::find(failed.begin(), failed.end(), "polynomial_consistency"), failed.end());
}

TEST(Verifier, ThetaWithATorusCorridor) {
  const auto c = synthesize(validate(ThetaSpec{3, 3, {FiberType{}, FiberType{}, torus()}}));
  const auto rep = verify(c);
  EXPECT_TRUE(rep.passed);
  ASSERT_EQ(rep.euler_profile.size(), 3u);
  EXPECT_EQ(rep.euler_profile[1], (std::vector<int>{2, 2, 0}));
  ASSERT_TRUE(rep.reeb.has_value());
  EXPECT_EQ(rep.reeb->sorted_degrees(), (std::vector<int>{1, 1, 4, 4}));
}

TEST(Verifier, PathInDimensionFour) {
  const auto c = synthesize(validate(PathSpec{4, 4, {FiberType{}, torus(), FiberType{}}}));
  EXPECT_EQ(c.ambient, 5u);
  const auto rep = verify(c);
  EXPECT_TRUE(rep.passed) << (rep.failed_checks().empty() ? "" : rep.failed_checks().front());
  EXPECT_EQ(rep.critical_points.size(), 4u);
  EXPECT_EQ(rep.find("fiber_euler"), nullptr);
}
