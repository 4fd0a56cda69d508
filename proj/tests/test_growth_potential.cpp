#include <gtest/gtest.h>

#include <cmath>

#include <contour/growth_potential.hpp>

using namespace contour;

namespace {

// Potential of G0 (1 + a cos w) on the disc of radius r: the cos mode is D cos(w)/rho outside
// and -(a G0/3) rho^2 + C rho inside, matched in value and slope at r.
struct DiscOracle {
  double G0, a, r;
  double D() const { return a * G0 * r * r * r / 6.0; }
  double radial(double rho, double th) const {
    const double m0 = rho <= r ? -G0 * rho / 2 : -G0 * r * r / (2 * rho);
    return m0 - D() / (rho * rho) * std::cos(th);
  }
  double tangential(double rho, double th) const { return -D() / (rho * rho) * std::sin(th); }
};

InterfacePair pair_with(double eps_h, double eps_H, std::size_t n = 32) {
  auto p = InterfacePair::concentric(1.0, 2.0, n);
  p.h = PeriodicField::from_function(n, [&](double t) { return eps_h * std::cos(3 * t); });
  p.H = PeriodicField::from_function(n, [&](double t) { return eps_H * std::sin(2 * t); });
  return p;
}

}  // namespace

TEST(WRule, Structure) {
  auto q = make_w_rule(16, 0.05);
  EXPECT_EQ(q.nodes.size(), 22u);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    s += q.weights[i];
    EXPECT_LT(q.nodes[i], 1.0);
  }
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_THROW(make_w_rule(8, 0.05), std::invalid_argument);
  EXPECT_THROW(make_w_rule(16, 0.3), std::invalid_argument);
  for (double w : q.nodes) if (w > 0.9) EXPECT_GE(w, 0.9);
}

TEST(GrowthPotential, RadialSourceOnCircles) {
  const double G0 = 1.7;
  auto pair = pair_with(0.0, 0.0);
  QuadSpec q{128, 128};
  auto src = sample_source([&](double, double) { return G0; }, q, pair.delta);
  auto gi = grad_inner(pair, src);
  auto go = grad_outer(pair, src);
  auto sp = source_speeds(pair, src);
  EXPECT_NEAR(sp.c, -G0 / 2, 1e-14);
  for (std::size_t j = 0; j < pair.n(); ++j) {
    EXPECT_NEAR(gi.tangential[j], 0.0, 1e-12);
    EXPECT_NEAR(gi.radial[j], -G0 / 2, 1e-6);
    EXPECT_NEAR(go.tangential[j], 0.0, 1e-12);
    EXPECT_NEAR(go.radial[j], sp.c_tilde, 1e-10);
  }
}

TEST(GrowthPotential, ZeroSource) {
  auto pair = pair_with(0.01, 0.01);
  QuadSpec q{32, 64};
  auto src = sample_source([](double, double) { return 0.0; }, q, pair.delta);
  auto gi = grad_inner(pair, src);
  auto go = grad_outer(pair, src);
  EXPECT_EQ(gi.radial.sup_norm() + gi.tangential.sup_norm() + go.radial.sup_norm() + go.tangential.sup_norm(), 0.0);
}

TEST(GrowthPotential, AngularSourceMatchesDiscPotential) {
  const DiscOracle o{1.3, 0.2, 1.0};
  auto pair = pair_with(0.0, 0.0);
  QuadSpec q{256, 256};
  auto src = sample_source([&](double, double om) { return o.G0 * (1 + o.a * std::cos(om)); }, q, pair.delta);
  auto gi = grad_inner(pair, src);
  auto go = grad_outer(pair, src);
  double ei = 0.0, eo = 0.0;
  for (std::size_t j = 0; j < pair.n(); ++j) {
    const double th = pair.h.theta(j);
    ei = std::max({ei, std::abs(gi.radial[j] - o.radial(1.0, th)), std::abs(gi.tangential[j] - o.tangential(1.0, th))});
    eo = std::max({eo, std::abs(go.radial[j] - o.radial(2.0, th)), std::abs(go.tangential[j] - o.tangential(2.0, th))});
  }
  EXPECT_LT(ei, 1e-5);
  EXPECT_LT(eo, 1e-6);
  auto sp = source_speeds(pair, src);
  EXPECT_NEAR(gi.radial.mean(), sp.c, 1e-5);
}

// Outward flux through either curve equals minus the enclosed source.
TEST(GrowthPotential, FluxIdentityOnDeformedCurves) {
  const double G0 = 1.0;
  auto pair = pair_with(0.01, 0.01, 32);
  QuadSpec q{256, 256};
  auto src = sample_source([&](double, double) { return G0; }, q, pair.delta);
  const PeriodicField f = pair.f(), F = pair.F();
  const double expect = -G0 * (f * f).mean() / 2;
  auto gi = grad_inner(pair, src);
  auto go = grad_outer(pair, src);
  EXPECT_NEAR((f * gi.radial - derivative(f) * gi.tangential).mean(), expect, 1e-5);
  EXPECT_NEAR((F * go.radial - derivative(F) * go.tangential).mean(), expect, 1e-6);
  EXPECT_NEAR(gi.tangential.mean(), 0.0, 1e-6);
}

TEST(GrowthPotential, InnerConvergesInNw) {
  auto pair = pair_with(0.01, 0.0, 32);
  const PeriodicField f = pair.f();
  const double expect = -(f * f).mean() / 2;
  double prev = 1e9;
  for (int nw : {16, 64, 128}) {
    QuadSpec q{nw, 128};
    auto gi = grad_inner(pair, sample_source([](double, double) { return 1.0; }, q, pair.delta));
    const double err = std::abs((f * gi.radial - derivative(f) * gi.tangential).mean() - expect);
    EXPECT_LT(err, 0.5 * prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-9);
}

TEST(GrowthPotential, LinearInSource) {
  auto pair = pair_with(0.01, -0.005);
  QuadSpec q{32, 64};
  auto g = [](double w, double om) { return (1 - w * w) * (1 + 0.3 * std::sin(2 * om)); };
  auto a = grad_inner(pair, sample_source(g, q, pair.delta));
  auto b = grad_inner(pair, sample_source([&](double w, double om) { return 2.5 * g(w, om); }, q, pair.delta));
  for (std::size_t j = 0; j < pair.n(); ++j) {
    EXPECT_NEAR(b.radial[j], 2.5 * a.radial[j], 1e-13);
    EXPECT_NEAR(b.tangential[j], 2.5 * a.tangential[j], 1e-13);
  }
}

TEST(GrowthPotential, SpeedConsistencyUnderSmallDeformation) {
  QuadSpec q{64, 128};
  for (double eps : {1e-3, 2e-3}) {
    auto pair = pair_with(eps, eps);
    auto src = sample_source([](double w, double) { return 1.0 - 0.5 * w * w; }, q, pair.delta);
    auto sp = source_speeds(pair, src);
    EXPECT_LT(std::abs(grad_inner(pair, src).radial.mean() - sp.c), 1e-4 + 10 * eps * eps);
    EXPECT_LT(std::abs(grad_outer(pair, src).radial.mean() - sp.c_tilde), 10 * eps * eps);
  }
}

TEST(GrowthPotential, SourceFromPressure) {
  const double G0 = 0.9;
  auto pair = pair_with(0.0, 0.0, 16);
  PressureOptions opt;
  opt.n_rho = 64;
  opt.n_omega = 8;
  auto ref = solve_reference(GrowthLaw::constant(G0), 1.0, 1.0, pair, opt);
  auto src = sample_source(ref, QuadSpec{32, 64}, pair.delta);
  for (double v : src.values) EXPECT_NEAR(v, G0, 1e-14);
  EXPECT_THROW(grad_inner(pair_with(0.0, 0.0, 24), src), std::invalid_argument);
  auto other = pair;
  other.delta *= 0.5;
  EXPECT_THROW(grad_inner(other, src), std::invalid_argument);
}
