#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <contour/layer_ops.hpp>

#include "oracles.hpp"

using namespace contour;

namespace {

PeriodicField random_field(std::size_t n, unsigned seed, int kmax = 6) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> a(kmax + 1), b(kmax + 1);
  for (int k = 0; k <= kmax; ++k) { a[k] = d(rng); b[k] = d(rng); }
  return PeriodicField::from_function(n, [&](double t) {
    double s = a[0];
    for (int k = 1; k <= kmax; ++k) s += (a[k] * std::cos(k * t) + b[k] * std::sin(k * t)) / (k * k);
    return s;
  });
}

InterfacePair deformed(std::size_t n, double eh, double eH) {
  auto p = InterfacePair::concentric(1.0, 1.6, n);
  p.h = PeriodicField::from_function(n, [&](double t) { return eh * std::cos(2 * t) + 0.5 * eh * std::sin(5 * t); });
  p.H = PeriodicField::from_function(n, [&](double t) { return eH * std::sin(3 * t); });
  return p;
}

double max_diff(const PeriodicField& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, std::abs(a[j] - b[j]));
  return e;
}

}  // namespace

TEST(SingularOps, CircleReductions) {
  auto pair = InterfacePair::concentric(1.0, 2.0, 64);
  auto psi = random_field(64, 1);
  for (Curve c : {Curve::inner, Curve::outer}) {
    auto nrm = singular_normal(c, pair, psi);
    for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(nrm[j], -psi.mean() / 2, 1e-13);
    auto one = singular_normal(c, pair, PeriodicField(64, 1.0));
    EXPECT_NEAR(one.max(), -0.5, 1e-14);
    EXPECT_NEAR(one.min(), -0.5, 1e-14);
    for (int k : {1, 3, 7}) {
      auto cosk = PeriodicField::from_function(64, [k](double t) { return std::cos(k * t); });
      auto tan = singular_tangent(c, pair, cosk);
      for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(tan[j], 0.5 * std::sin(k * tan.theta(j)), 1e-13);
    }
    EXPECT_LT(singular_tangent(c, pair, PeriodicField(64, 2.0)).sup_norm(), 1e-14);
  }
}

TEST(SingularOps, MatchBirkhoffRottOracle) {
  const std::size_t n = 512;
  auto pair = InterfacePair::concentric(1.0, 2.0, n, 0.1 * (1.0 - 0.5));
  pair.h = PeriodicField::from_function(n, [](double t) { return 0.05 * std::cos(2 * t); });
  auto cos1 = PeriodicField::from_function(n, [](double t) { return std::cos(t); });
  auto sin1 = PeriodicField::from_function(n, [](double t) { return std::sin(t); });
  auto ref_n = oracle::birkhoff_rott(pair.f(), cos1, 4);
  auto ref_t = oracle::birkhoff_rott(pair.f(), sin1, 4);
  EXPECT_LT(max_diff(singular_normal(Curve::inner, pair, cos1), ref_n.normal), 1e-7);
  EXPECT_LT(max_diff(singular_tangent(Curve::inner, pair, sin1), ref_t.tangent), 1e-7);
}

TEST(SingularOps, OuterCurveMatchesOracle) {
  const std::size_t n = 128;
  auto pair = deformed(n, 0.0, 0.02);
  auto psi = random_field(n, 4);
  auto ref = oracle::birkhoff_rott(pair.F(), psi, 4);
  EXPECT_LT(max_diff(singular_normal(Curve::outer, pair, psi), ref.normal), 1e-9);
  EXPECT_LT(max_diff(singular_tangent(Curve::outer, pair, psi), ref.tangent), 1e-9);
}

TEST(SingularOps, TangentHasMeanZeroAndIsLinear) {
  auto pair = deformed(64, 0.02, 0.02);
  auto a = random_field(64, 2), b = random_field(64, 3);
  for (Curve c : {Curve::inner, Curve::outer}) {
    EXPECT_NEAR(singular_tangent(c, pair, a).mean(), 0.0, 1e-10);
    auto lhs = singular_normal(c, pair, 2.0 * a + b);
    auto rhs = 2.0 * singular_normal(c, pair, a) + singular_normal(c, pair, b);
    EXPECT_LT((lhs - rhs).sup_norm(), 1e-13);
    auto lt = singular_tangent(c, pair, 2.0 * a + b);
    auto rt = 2.0 * singular_tangent(c, pair, a) + singular_tangent(c, pair, b);
    EXPECT_LT((lt - rt).sup_norm(), 1e-13);
  }
}

TEST(SingularOps, SteepCurveRejected) {
  auto pair = InterfacePair::concentric(1.0, 2.0, 64);
  pair.h = PeriodicField::from_function(64, [](double t) { return 0.02 * std::cos(30 * t); });
  EXPECT_THROW(singular_normal(Curve::inner, pair, PeriodicField(64, 1.0)), GeometryError);
}

TEST(Interaction, ConcentricMultipliers) {
  const std::size_t n = 256;
  auto pair = InterfacePair::concentric(1.0, 1.6, n);
  const double s = 1.0 / 1.6;
  for (int k : {1, 2, 5}) {
    auto psi = PeriodicField::from_function(n, [k](double t) { return std::cos(k * t); });
    auto io = interaction_inner_from_outer(pair, psi);
    auto oi = interaction_outer_from_inner(pair, psi);
    const double sk = std::pow(s, k);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = psi.theta(j);
      EXPECT_NEAR(io.radial[j], -0.5 * sk * std::cos(k * t), 1e-10);
      EXPECT_NEAR(io.tangential[j], 0.5 * sk * std::sin(k * t), 1e-10);
      EXPECT_NEAR(oi.radial[j], 0.5 * sk * std::cos(k * t), 1e-10);
      EXPECT_NEAR(oi.tangential[j], 0.5 * sk * std::sin(k * t), 1e-10);
    }
  }
  // agrees with the Poisson multiplier on a generic density
  auto psi = random_field(n, 9);
  auto io = interaction_inner_from_outer(pair, psi);
  auto expect = -0.5 * (poisson_smooth(psi, s) - psi.mean());
  EXPECT_LT((io.radial - expect).sup_norm(), 1e-10);
}

TEST(Interaction, ConstantDensity) {
  auto pair = deformed(64, 0.0, 0.0);
  auto one = PeriodicField(64, 1.0);
  auto io = interaction_inner_from_outer(pair, one);
  auto oi = interaction_outer_from_inner(pair, one);
  EXPECT_LT(io.radial.sup_norm() + io.tangential.sup_norm() + oi.tangential.sup_norm(), 1e-13);
  EXPECT_LT((oi.radial - 1.0).sup_norm(), 1e-13);
}

TEST(Interaction, MatchDirectKernelOracle) {
  const std::size_t n = 64;
  auto pair = deformed(n, 0.01, 0.015);
  auto psi = random_field(n, 5);
  const PeriodicField f = pair.f(), F = pair.F();
  std::vector<double> er, et;
  oracle::cross_kernel(f, F, psi, 16, er, et);
  auto io = interaction_inner_from_outer(pair, psi);
  for (std::size_t j = 0; j < n; ++j) {
    EXPECT_NEAR(io.radial[j], f[j] * er[j], 1e-9);
    EXPECT_NEAR(io.tangential[j], f[j] * et[j], 1e-9);
  }
  oracle::cross_kernel(F, f, psi, 16, er, et);
  auto oi = interaction_outer_from_inner(pair, psi);
  for (std::size_t j = 0; j < n; ++j) {
    EXPECT_NEAR(oi.radial[j], F[j] * er[j], 1e-9);
    EXPECT_NEAR(oi.tangential[j], F[j] * et[j], 1e-9);
  }
}

TEST(Interaction, TangentPairingsHaveMeanZero) {
  auto pair = deformed(64, 0.01, 0.015);
  auto psi = random_field(64, 6);
  auto a = to_pairings(Curve::inner, pair, interaction_inner_from_outer(pair, psi));
  auto b = to_pairings(Curve::outer, pair, interaction_outer_from_inner(pair, psi));
  EXPECT_NEAR(a.tangent.mean(), 0.0, 1e-10);
  EXPECT_NEAR(b.tangent.mean(), 0.0, 1e-10);
  auto c2 = interaction_inner_from_outer(pair, 3.0 * psi);
  auto c1 = interaction_inner_from_outer(pair, psi);
  EXPECT_LT((c2.radial - 3.0 * c1.radial).sup_norm(), 1e-13);
}

TEST(DoubleLayer, CircleValuesAndJump) {
  auto pair = InterfacePair::concentric(1.0, 2.0, 128);
  auto one = PeriodicField(128, 1.0);
  for (double x : {0.0, 0.3, -0.5}) {
    auto v = double_layer_offcurve(Curve::inner, pair, one, {x, 0.2});
    EXPECT_NEAR(v.value, -1.0, 1e-12);
    EXPECT_FALSE(v.near_curve);
  }
  EXPECT_NEAR(double_layer_offcurve(Curve::inner, pair, one, {1.5, 0.3}).value, 0.0, 1e-12);
  EXPECT_NEAR(double_layer_offcurve(Curve::outer, pair, one, {1.5, 0.3}).value, -1.0, 1e-12);
  auto cos1 = PeriodicField::from_function(128, [](double t) { return std::cos(t); });
  EXPECT_NEAR(double_layer_offcurve(Curve::inner, pair, cos1, {0.0, 0.0}).value, 0.0, 1e-14);
  // jump across the curve: inside minus outside limit equals -psi
  auto psi = PeriodicField::from_function(128, [](double t) { return 1.0 + 0.3 * std::cos(2 * t); });
  const double t0 = 0.4, d = 0.05;
  auto in = double_layer_offcurve(Curve::inner, pair, psi, {(1 - d) * std::cos(t0), (1 - d) * std::sin(t0)});
  auto out = double_layer_offcurve(Curve::inner, pair, psi, {(1 + d) * std::cos(t0), (1 + d) * std::sin(t0)});
  EXPECT_NEAR(in.value - out.value, -(1.0 + 0.3 * std::cos(2 * t0)), 0.05);
  EXPECT_TRUE(double_layer_offcurve(Curve::inner, pair, psi, {1.01, 0.0}).near_curve);
}
