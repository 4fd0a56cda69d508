#include <gtest/gtest.h>

#include <cmath>

#include <contour/evolution.hpp>

#include "oracles.hpp"

using namespace contour;

namespace {

ModelParams small_model(double mu, double nu, GrowthLaw law, std::size_t n, Integrator it = Integrator::etd1) {
  ModelParams m;
  m.mu = mu;
  m.nu = nu;
  m.law = law;
  m.pressure.n_rho = 128;
  m.pressure.n_omega = int(n);
  m.quad = {std::max(32, int(2 * n)), int(4 * n)};
  m.integrator = it;
  return m;
}

SimState state_with(std::size_t n, double eh, int kh, double eH, int kH, double r = 1.0, double R = 1.5) {
  SimState s;
  s.pair = InterfacePair::concentric(r, R, n);
  s.pair.h = PeriodicField::from_function(n, [&](double t) { return eh * std::cos(kh * t); });
  s.pair.H = PeriodicField::from_function(n, [&](double t) { return eH * std::cos(kH * t); });
  return s;
}

double cos_amp(const PeriodicField& f, int k) { return 2.0 * f.coeffs()[k].real(); }

// Sharp-interface linear theory for a constant source G0 in the inner disc. With
// f = r(1 + a cos k theta), F = R(1 + b cos k theta) the pressure perturbation is
// A_ rho^k inside and B rho^k + C rho^-k outside. Returns dh_k/dt, dH_k/dt at fixed (r, R).
std::array<double, 2> exact_mode_rates(int k, double mu, double nu, double G0, double r, double R, double a,
                                       double b) {
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  M << 0, std::pow(R, k), std::pow(R, -k), std::pow(r, k), -std::pow(r, k), -std::pow(r, -k),
      mu * k * std::pow(r, k - 1), -nu * k * std::pow(r, k - 1), nu * k * std::pow(r, -k - 1);
  rhs << G0 * r * r * b / (2 * nu), G0 * r * r * a * (1 / (2 * mu) - 1 / (2 * nu)), G0 * r * a;
  const Eigen::Vector3d x = M.fullPivLu().solve(rhs);
  const double dth = G0 * a / 2 - mu * k * x(0) * std::pow(r, k - 2);
  const double dtH = (-G0 * r * r * b / (2 * R) - nu * k * (x(1) * std::pow(R, k - 1) - x(2) * std::pow(R, -k - 1))) / R;
  return {dth, dtH};
}

// Concentric constant-source radii: r = r0 e^{G0 t/2}, and the annulus area is conserved.
std::array<double, 2> exact_radii(double G0, double r0, double R0, double t) {
  const double r = r0 * std::exp(G0 * t / 2);
  return {r, std::sqrt(R0 * R0 + r * r - r0 * r0)};
}

double radial_error(Integrator it, double dt, double t_end) {
  auto m = small_model(1.0, 2.0, GrowthLaw::constant(1.0), 16, it);
  RunOptions o;
  o.dt = dt;
  o.t_end = t_end;
  o.output_every = 1 << 30;
  double err = 0.0;
  run(state_with(16, 0, 1, 0, 1), m, o, [&](const SimState& s) {
    const auto ex = exact_radii(1.0, 1.0, 1.5, s.time);
    err = std::max(std::abs(s.pair.f().mean() - ex[0]), std::abs(s.pair.F().mean() - ex[1]));
  });
  return err;
}

}  // namespace

TEST(Evolution, ConcentricIsPureDrift) {
  auto m = small_model(1.0, 2.0, GrowthLaw::linear(1.0, 1.0), 32);
  auto s = state_with(32, 0, 1, 0, 1);
  refresh(s, m);
  const Rhs r = assemble_rhs(s, m);
  // no fluctuation at all; the drift matches c_* up to the source discretization
  EXPECT_LT((r.rhs_h - r.rhs_h.mean()).sup_norm(), 1e-13);
  EXPECT_LT((r.rhs_H - r.rhs_H.mean()).sup_norm(), 1e-13);
  EXPECT_NEAR(r.rhs_h.mean(), -s.c_star / s.pair.r, 1e-5);
  EXPECT_NEAR(r.rhs_H.mean(), -s.c_tilde_star / s.pair.R, 1e-5);
  const Velocities v = velocity_direct(s);
  EXPECT_LT((v.dth + s.c_star / s.pair.r).sup_norm(), 1e-5);
  EXPECT_LT((v.dtH + s.c_tilde_star / s.pair.R).sup_norm(), 1e-5);
  EXPECT_NEAR(s.c_tilde_star, s.c_star * s.pair.r / s.pair.R, 1e-14);
}

TEST(Evolution, RateSigns) {
  for (auto [mu, nu] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}}) {
    auto m = small_model(mu, nu, GrowthLaw::constant(1.0), 16);
    auto s = state_with(16, 0, 1, 0, 1);
    refresh(s, m);
    const Rhs r = assemble_rhs(s, m);
    EXPECT_EQ(r.lambda_h > 0, mu < nu);
    EXPECT_GT(r.lambda_H, 0.0);
  }
}

TEST(Evolution, MatchesSharpInterfaceLinearTheory) {
  const double eps = 1e-4, mu = 1.0, nu = 2.0;
  auto m = small_model(mu, nu, GrowthLaw::constant(1.0), 64);
  m.pressure.n_rho = 256;
  for (int k : {1, 3}) {
    for (int col = 0; col < 2; ++col) {
      auto s = state_with(64, col == 0 ? eps : 0.0, k, col == 1 ? eps : 0.0, k);
      refresh(s, m);
      const Velocities v = velocity_contour(s);
      const auto ex = exact_mode_rates(k, mu, nu, 1.0, 1.0, 1.5, col == 0 ? eps : 0.0, col == 1 ? eps : 0.0);
      const double scale = std::max(std::abs(ex[0]), std::abs(ex[1]));
      EXPECT_NEAR(cos_amp(v.dth, k), ex[0], 1e-3 * scale) << "k=" << k << " col=" << col;
      EXPECT_NEAR(cos_amp(v.dtH, k), ex[1], 1e-3 * scale) << "k=" << k << " col=" << col;
    }
  }
}

TEST(Evolution, CrossOracleDirectVelocity) {
  auto m = small_model(1.0, 2.0, GrowthLaw::linear(1.0, 1.0), 64);
  m.pressure.n_rho = 512;
  auto s = state_with(64, 1e-3, 2, 1e-3, 3);
  refresh(s, m);
  const Velocities a = velocity_contour(s), b = velocity_direct(s);
  EXPECT_LT((a.dth - b.dth).sup_norm(), 1e-3 * b.dth.sup_norm());
  EXPECT_LT((a.dtH - b.dtH).sup_norm(), 1e-3 * b.dtH.sup_norm());
  // the fluctuations themselves, which carry the shape dynamics
  const PeriodicField fa = a.dth - a.dth.mean(), fb = b.dth - b.dth.mean();
  EXPECT_LT((fa - fb).sup_norm(), 2e-2 * fb.sup_norm());
}

TEST(Evolution, StabilityDichotomy) {
  for (auto [mu, nu] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}}) {
    auto m = small_model(mu, nu, GrowthLaw::constant(1.0), 32);
    auto s = state_with(32, 1e-4, 3, 0.0, 1);
    refresh(s, m);
    // growth rate of f_3 = r h_3
    const double rate = cos_amp(velocity_contour(s).dth, 3) / 1e-4;
    EXPECT_EQ(rate < 0, mu < nu) << mu << " " << nu;
  }
}

TEST(Dispersion, DiagonalLimit) {
  const double A = -0.3, c = -0.6, r = 1.0, R = 1.4;
  const int k = 200;
  const auto M = dispersion_matrix(k, A, c, r, R);
  EXPECT_NEAR(M[0][0], -A * c * k / r, 1e-9 * k);
  EXPECT_NEAR(M[1][1], c * r / R * k / R, 1e-9 * k);
  EXPECT_LT(std::abs(M[0][1]) + std::abs(M[1][0]), 1e-20);
}

TEST(Dispersion, EqualMobilityDecouplesInnerRate) {
  for (int k : {1, 2, 7}) EXPECT_NEAR(dispersion_matrix(k, 0.0, -0.5, 1.0, 1.5)[0][0], 0.0, 1e-15);
}

TEST(Dispersion, StableWhenLessMobileInside) {
  for (double mu : {0.3, 0.7, 0.95})
    for (double R : {1.2, 1.5, 3.0})
      for (int k = 1; k <= 12; ++k) {
        const double A = mobility_contrast(mu, 1.0), c = -0.5;
        for (auto e : eigenvalues(dispersion_matrix(k, A, c, 1.0, R))) EXPECT_LT(e.real(), 0.0);
      }
}

TEST(Dispersion, InnerModeGrowsWhenMoreMobileInside) {
  const double A = mobility_contrast(2.0, 1.0), c = -0.5;
  double prev = 0.0;
  for (int k = 1; k <= 16; ++k) {
    const double e = inner_eigenvalue(dispersion_matrix(k, A, c, 1.0, 1.5)).real();
    EXPECT_GT(e, prev);
    prev = e;
  }
  const double e8 = inner_eigenvalue(dispersion_matrix(8, A, c, 1.0, 1.5)).real();
  const double e16 = inner_eigenvalue(dispersion_matrix(16, A, c, 1.0, 1.5)).real();
  EXPECT_NEAR(e16 / e8, 2.0, 1e-3);
}

TEST(Etd, ExactOnLinearPart) {
  const std::size_t n = 32;
  const PeriodicField h0 = PeriodicField::from_function(n, [](double t) { return std::cos(3 * t) + 0.2 * std::sin(7 * t); });
  const PeriodicField zero(n);
  for (double dt : {1e-3, 0.1, 2.0}) {
    const PeriodicField h = detail::etd_update(h0, 0.4, dt, zero, nullptr);
    const PeriodicField ex = PeriodicField::from_function(n, [&](double t) {
      return std::exp(-0.4 * 3 * dt) * std::cos(3 * t) + 0.2 * std::exp(-0.4 * 7 * dt) * std::sin(7 * t);
    });
    EXPECT_LT((h - ex).sup_norm(), 1e-14);
  }
}

TEST(Etd, PhiFunctionsAreSmoothAtZero) {
  for (double z : {-1e-2, -1e-4, -1e-6, 1e-6, 1e-4, 1e-2}) {
    EXPECT_NEAR(detail::phi1(z), std::expm1(z) / z, 1e-12);
    EXPECT_NEAR(detail::phi2(z), 0.5 + z / 6 + z * z / 24 + z * z * z / 120 + z * z * z * z / 720, 1e-13);
  }
  EXPECT_DOUBLE_EQ(detail::phi1(0.0), 1.0);
  EXPECT_DOUBLE_EQ(detail::phi2(0.0), 0.5);
}

TEST(Evolution, RadialTrajectoryMatchesClosedForm) {
  EXPECT_LT(radial_error(Integrator::etd2rk, 0.005, 1.0), 1e-6);
}

TEST(Evolution, SelfConvergenceOrders) {
  const double e1 = radial_error(Integrator::etd1, 0.02, 0.4), e2 = radial_error(Integrator::etd1, 0.01, 0.4);
  EXPECT_NEAR(e1 / e2, 2.0, 0.2);
  const double f1 = radial_error(Integrator::etd2rk, 0.04, 0.4), f2 = radial_error(Integrator::etd2rk, 0.02, 0.4);
  EXPECT_NEAR(f1 / f2, 4.0, 0.5);
}

TEST(Evolution, ZeroPerturbationStaysZero) {
  auto m = small_model(1.0, 2.0, GrowthLaw::linear(1.0, 1.0), 16);
  m.pressure.n_rho = 64;
  RunOptions o;
  o.dt = 1e-3;
  o.t_end = 1.0;
  o.output_every = 100;
  double worst = 0.0;
  int emitted = 0;
  run(state_with(16, 0, 1, 0, 1), m, o, [&](const SimState& s) {
    worst = std::max(worst, (s.pair.h - s.pair.h.mean()).sup_norm() + (s.pair.H - s.pair.H.mean()).sup_norm());
    ++emitted;
  });
  EXPECT_EQ(emitted, 11);
  EXPECT_LT(worst, 1e-10);
}

TEST(Evolution, AnnulusAreaConserved) {
  auto m = small_model(1.0, 2.0, GrowthLaw::linear(1.0, 1.0), 32, Integrator::etd2rk);
  RunOptions o;
  o.dt = 0.02;
  o.t_end = 1.0;
  double a0 = -1.0, drift = 0.0;
  run(state_with(32, 1e-3, 2, 1e-3, 3), m, o, [&](const SimState& s) {
    if (a0 < 0) a0 = s.diag.annulus_area;
    drift = std::max(drift, std::abs(s.diag.annulus_area - a0) / a0);
  });
  EXPECT_LT(drift, 1e-6);
}

TEST(Evolution, ModeDecaysAtSharpInterfaceRate) {
  const double mu = 1.0, nu = 2.0, eps = 1e-3;
  auto m = small_model(mu, nu, GrowthLaw::constant(1.0), 32);
  RunOptions o;
  o.dt = 0.01;
  o.t_end = 0.1;
  std::vector<double> t, amp;
  run(state_with(32, eps, 3, 0, 1), m, o, [&](const SimState& s) {
    t.push_back(s.time);
    // shape amplitude of f_3 relative to the mean radius
    amp.push_back(mode_amplitude(s.pair.h, 3) / (1.0 + s.pair.h.mean()));
  });
  for (std::size_t i = 1; i < amp.size(); ++i) EXPECT_LT(amp[i], amp[i - 1]);
  const auto ex = exact_mode_rates(3, mu, nu, 1.0, 1.0, 1.5, eps, 0.0);
  // d/dt log(h_3 / (1 + h_0)) at t = 0, ignoring the small induced outer mode
  const double rate0 = ex[0] / eps - 0.5;
  const double initial = (std::log(amp[1]) - std::log(amp[0])) / (t[1] - t[0]);
  EXPECT_NEAR(initial, rate0, 0.05 * std::abs(rate0));
}

TEST(Evolution, GuardRejectsCoarseUnstableStep) {
  auto m = small_model(2.0, 1.0, GrowthLaw::constant(1.0), 16);
  auto s = state_with(16, 1e-4, 3, 0, 1);
  refresh(s, m);
  const double g = dt_guard(s, m);
  EXPECT_NEAR(g, 0.5 * s.pair.r / (std::abs(s.c_star) * 16), 1e-15);
  EXPECT_THROW(step_etd(s, 2 * g, m), std::invalid_argument);
  // run() splits such steps instead
  RunOptions o;
  o.dt = 2.5 * g;
  o.t_end = 5 * g;
  std::vector<double> times;
  run(s, m, o, [&](const SimState& x) { times.push_back(x.time); });
  ASSERT_EQ(times.size(), 3u);
  EXPECT_NEAR(times.back(), 5 * g, 1e-15);
  EXPECT_EQ(dt_guard(state_with(16, 0, 1, 0, 1), small_model(1.0, 2.0, GrowthLaw::constant(1.0), 16)), INFINITY);
}

TEST(Evolution, RunIsDeterministic) {
  auto m = small_model(1.0, 2.0, GrowthLaw::linear(1.0, 1.0), 16);
  RunOptions o;
  o.dt = 0.05;
  o.t_end = 0.2;
  std::vector<double> a, b;
  run(state_with(16, 1e-3, 2, 5e-4, 3), m, o, [&](const SimState& s) { a.insert(a.end(), s.pair.h.samples().begin(), s.pair.h.samples().end()); });
  run(state_with(16, 1e-3, 2, 5e-4, 3), m, o, [&](const SimState& s) { b.insert(b.end(), s.pair.h.samples().begin(), s.pair.h.samples().end()); });
  EXPECT_EQ(a, b);
}
