#include <gtest/gtest.h>

#include <cmath>

#include "reebforge/synthesizer.hpp"
#include "test_support.hpp"

using namespace reebforge;
using rftest::Q;

namespace {

FiberType torus(int genus = 1) { return FiberType{{Handle{1, genus}}}; }

ValidatedSpec theta_spec() { return validate(ThetaSpec{2, 3, {FiberType{}, FiberType{}, FiberType{}}}); }
ValidatedSpec path_spec() { return validate(PathSpec{3, 4, {FiberType{}, torus(), FiberType{}}}); }

// Every predicted point is exactly a critical point of x1 on {F = 0}.
void expect_exact_critical_points(const Certificate& c) {
  const auto grad = gradient(c.expanded);
  for (const auto& p : c.predicted_critical_points) {
    ASSERT_EQ(p.size(), c.ambient);
    const std::span<const Rational> x(p);
    EXPECT_EQ(c.expanded.eval(x), 0);
    for (std::size_t k = 1; k < c.ambient; ++k) EXPECT_EQ(grad.components[k].eval(x), 0) << "partial " << k;
    EXPECT_NE(grad.components[0].eval(x), 0);
  }
}

}  // namespace

TEST(Synthesizer, SphereIsTheRoundSphere) {
  const auto c = synthesize(validate(SphereSpec{2}));
  EXPECT_EQ(c.ambient, 3u);
  Polynomial expect = Polynomial::constant(3, 1);
  for (std::size_t k = 0; k < 3; ++k) expect -= Polynomial::variable(3, k).pow(2);
  EXPECT_EQ(c.expanded, expect);
  EXPECT_EQ(c.predicted_singular_values, (std::vector<Rational>{Q(-1), Q(1)}));
  EXPECT_EQ(c.predicted_manifold.text, "S^2");
  expect_exact_critical_points(c);
}

TEST(Synthesizer, ThetaPredictions) {
  const auto c = synthesize(theta_spec());
  EXPECT_EQ(c.ambient, 3u);
  EXPECT_EQ(c.predicted_critical_count, 6u);
  EXPECT_EQ(c.predicted_critical_points.size(), 6u);
  EXPECT_EQ(c.predicted_singular_values, c.layout.t);
  EXPECT_EQ(c.layout.t.size(), 4u);
  EXPECT_EQ(c.predicted_manifold.text, "S^1xS^1 # S^1xS^1");
  EXPECT_EQ(c.morse_claim, "stated");
  EXPECT_EQ(c.expanded, c.defining.expand());
  expect_exact_critical_points(c);
  // Critical values are the x1 extremes of the outer disk and the removed disks.
  for (const auto& p : c.predicted_critical_points) {
    bool matched = false;
    for (const auto& t : c.layout.t) matched = matched || p[0] == t;
    EXPECT_TRUE(matched);
  }
}

TEST(Synthesizer, ThetaPlanarDisksAreDisjointAndInside) {
  const auto c = synthesize(theta_spec());
  int planar = 0;
  for (const auto& h : c.layout.holes) {
    if (h.stage != -1) continue;
    ++planar;
    const auto& e = h.ellipsoid;
    EXPECT_EQ(e.center[0], 0);
    EXPECT_EQ(e.semiaxes_sq[0], 1);
    EXPECT_LT(e.semiaxis(1) + std::abs(e.center[1].get_d()), c.layout.R.get_d());
  }
  EXPECT_EQ(planar, 2);
}

TEST(Synthesizer, PathPredictions) {
  const auto c = synthesize(path_spec());
  EXPECT_EQ(c.ambient, 4u);
  EXPECT_EQ(c.predicted_critical_count, 4u);
  EXPECT_EQ(c.layout.t, (std::vector<Rational>{Q(-3), Q(-1), Q(1), Q(3)}));
  EXPECT_EQ(c.predicted_singular_values, c.layout.t);
  EXPECT_EQ(c.predicted_manifold.text, "S^1xS^2");
  EXPECT_EQ(c.morse_claim, "stated");
  ASSERT_EQ(c.predicted_fibers.size(), 3u);
  EXPECT_EQ(c.predicted_fibers[1], torus());
  expect_exact_critical_points(c);
}

TEST(Synthesizer, PathGenusTwo) {
  const auto c = synthesize(validate(PathSpec{3, 5, {FiberType{}, torus(2), torus(), FiberType{}}}));
  EXPECT_EQ(c.predicted_critical_count, 8u);
  EXPECT_EQ(c.predicted_manifold.summands, (std::vector<Handle>{Handle{1, 3}}));
  expect_exact_critical_points(c);
}

TEST(Synthesizer, ThetaInDimensionThree) {
  const auto c = synthesize(validate(ThetaSpec{3, 3, {FiberType{}, FiberType{}, torus()}}));
  EXPECT_EQ(c.ambient, 4u);
  EXPECT_EQ(c.predicted_critical_count, 8u);
  EXPECT_EQ(c.morse_claim, "expected");
  expect_exact_critical_points(c);
}

TEST(Synthesizer, Deterministic) {
  EXPECT_EQ(synthesize(path_spec()), synthesize(path_spec()));
  EXPECT_EQ(synthesize(theta_spec()), synthesize(theta_spec()));
}

TEST(Synthesizer, ExplicitRadiusScalesThePath) {
  SynthesisParams p;
  p.R = Q(6);
  const auto c = synthesize(path_spec(), p);
  EXPECT_EQ(c.layout.t, (std::vector<Rational>{Q(-6), Q(-2), Q(2), Q(6)}));
  expect_exact_critical_points(c);
}

TEST(Synthesizer, DescribeManifold) {
  EXPECT_EQ(describe_manifold(3, {}), "S^3");
  EXPECT_EQ(describe_manifold(3, {Handle{1, 2}}), "S^1xS^2 # S^1xS^2");
  EXPECT_EQ(describe_manifold(4, {Handle{2, 1}}), "S^2xS^2");
}
