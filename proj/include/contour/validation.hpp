#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evolution.hpp"
#include "io.hpp"
#include "kernels.hpp"

namespace contour::validation {

// Multiplies every tolerance. CONTOUR_TOL_SCALE=1e-6 makes the suites fail on purpose.
inline double tol_scale() {
  const char* e = std::getenv("CONTOUR_TOL_SCALE");
  if (!e || !*e) return 1.0;
  char* end = nullptr;
  const double v = std::strtod(e, &end);
  if (*end != '\0' || !(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument("CONTOUR_TOL_SCALE must be a positive number");
  return v;
}

struct Check {
  std::string what;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=", ">=", or "~" (|value - target| <= limit)
  double target = 0.0;
  bool pass = false;
};

struct SuiteResult {
  std::string name;
  std::vector<Check> checks;
  std::string error;  // set when the suite threw
  double seconds = 0.0;

  bool pass() const {
    if (!error.empty() || checks.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  void at_most(std::string what, double v, double tol) {
    const double lim = tol * tol_scale();
    checks.push_back({std::move(what), v, lim, "<=", 0.0, v <= lim});
  }
  // A smaller tolerance scale raises the bound.
  void at_least(std::string what, double v, double bound) {
    const double lim = bound >= 0.0 ? bound / tol_scale() : bound * tol_scale();
    checks.push_back({std::move(what), v, lim, ">=", 0.0, v >= lim});
  }
  void within(std::string what, double v, double target, double tol) {
    const double lim = tol * tol_scale();
    checks.push_back({std::move(what), v, lim, "~", target, std::abs(v - target) <= lim});
  }
};

inline std::string describe(const Check& c) {
  char buf[256];
  if (c.relation == "~")
    std::snprintf(buf, sizeof buf, "%s: %.6g (target %.6g +- %.3g)", c.what.c_str(), c.value, c.target, c.limit);
  else
    std::snprintf(buf, sizeof buf, "%s: %.6g %s %.3g", c.what.c_str(), c.value, c.relation.c_str(), c.limit);
  return buf;
}

// Least-squares slope of log(y) against log(x), or of y against x when semilog.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y, bool loglog) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = loglog ? std::log(x[i]) : x[i], b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline SimState perturbed_state(std::size_t n, double r, double R, double eh, int kh, double eH, int kH) {
  SimState s;
  s.pair = InterfacePair::concentric(r, R, n);
  s.pair.h = PeriodicField::from_function(n, [&](double t) { return eh * std::cos(kh * t); });
  s.pair.H = PeriodicField::from_function(n, [&](double t) { return eH * std::cos(kH * t); });
  return s;
}

inline ModelParams suite_model(double mu, double nu, GrowthLaw law, std::size_t n, int n_rho) {
  ModelParams m;
  m.mu = mu;
  m.nu = nu;
  m.law = law;
  m.pressure.n_rho = n_rho;
  m.pressure.n_omega = int(n);
  m.quad = {int(2 * n), int(4 * n)};
  m.integrator = Integrator::etd2rk;
  return m;
}

inline SuiteResult kernel_identities() {
  SuiteResult res{"kernel-identities"};
  double cr = 0.0;
  for (int i = 0; i < 18; ++i) {
    const double s = 0.1 + 0.05 * i;
    for (int l = 0; l < 512; ++l) {
      const double xi = two_pi * (l + 0.5) / 512;
      const auto d = eval_poisson_derivs({s, xi});
      // xi-derivatives straight from P = (1 - s^2)/D, Q = 2 s sin(xi)/D
      const double D = 1 + s * s - 2 * s * std::cos(xi), Dx = 2 * s * std::sin(xi);
      const double Px = -(1 - s * s) * Dx / (D * D);
      const double Qx = 2 * s * std::cos(xi) / D - 2 * s * std::sin(xi) * Dx / (D * D);
      cr = std::max({cr, std::abs(Qx - s * d.dP_ds) / (1 + std::abs(Qx)),
                     std::abs(Px + s * d.dQ_ds) / (1 + std::abs(Px))});
    }
  }
  res.at_most("Cauchy-Riemann in s, s in [0.1, 0.95] x 512 nodes", cr, 1e-10);

  double mean_err = 0.0, conj_err = 0.0;
  for (double s : {0.1, 0.3, 0.7, 0.95}) {
    const auto P = PeriodicField::from_function(512, [&](double x) { return eval_poisson({s, x}).P; });
    mean_err = std::max(mean_err, std::abs(P.mean() - 1.0));
  }
  res.at_most("mean of P(s, .) minus 1", mean_err, 1e-10);
  // 1024 nodes: at 512 the conjugate of P(0.95, .) aliases above the target
  for (double s : {0.3, 0.7, 0.95, 1.2}) {
    const auto P = PeriodicField::from_function(1024, [&](double x) { return eval_poisson({s, x}).P; });
    const auto Q = PeriodicField::from_function(1024, [&](double x) { return eval_poisson({s, x}).Q; });
    conj_err = std::max(conj_err, (Q - (s < 1 ? 1.0 : -1.0) * hilbert(P)).sup_norm());
  }
  res.at_most("Q - sgn(1 - s) Hilbert P", conj_err, 1e-8);

  double dj_err = 0.0;
  for (double s : {0.0, 0.2, 0.6, 0.9, 0.95, 1.05, 1.3, 2.0}) {
    const auto dJ = PeriodicField::from_function(2048, [&](double x) { return eval_dJ_ds({s, x}); });
    dj_err = std::max(dj_err, std::abs(two_pi * dJ.mean() - (s < 1 ? -4 * pi : 0.0)));
  }
  res.at_most("integral of dJ/ds minus (-4 pi | 0)", dj_err, 1e-8);
  return res;
}

inline SuiteResult circle_exactness() {
  SuiteResult res{"circle-exactness"};
  const std::size_t n = 256;
  const double r = 1.0, R = 1.5, s = r / R;
  const auto pair = InterfacePair::concentric(r, R, n);
  const auto psi = PeriodicField::from_function(n, [](double t) {
    return 0.3 + std::cos(t) - 0.5 * std::sin(2 * t) + 0.25 * std::cos(5 * t) + 0.1 * std::sin(11 * t);
  });
  double tan_err = 0.0, nrm_err = 0.0;
  for (Curve c : {Curve::inner, Curve::outer}) {
    tan_err = std::max(tan_err, (singular_tangent(c, pair, psi) - 0.5 * hilbert(psi)).sup_norm());
    nrm_err = std::max(nrm_err, (singular_normal(c, pair, psi) + 0.5 * psi.mean()).sup_norm());
  }
  res.at_most("singular tangent minus Hilbert/2", tan_err, 1e-10);
  res.at_most("singular normal minus (-mean/2)", nrm_err, 1e-10);

  const PeriodicField Ps = poisson_smooth(psi, s), osc = Ps - psi.mean();
  const auto io = interaction_inner_from_outer(pair, psi);
  const auto oi = interaction_outer_from_inner(pair, psi);
  const double io_err =
      std::max((io.radial + 0.5 * osc).sup_norm(), (io.tangential - 0.5 * hilbert(Ps)).sup_norm());
  const double oi_err = std::max((oi.radial - 0.5 * osc - psi.mean()).sup_norm(),
                                 (oi.tangential - 0.5 * hilbert(Ps)).sup_norm());
  res.at_most("inner-from-outer interaction vs -(1/2)(r/R)^k multiplier", io_err, 1e-10);
  res.at_most("outer-from-inner interaction vs +(1/2)(r/R)^k multiplier", oi_err, 1e-10);
  return res;
}

inline double interp(const std::vector<double>& x, const std::vector<double>& y, double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t i = std::clamp<std::size_t>(std::size_t(it - x.begin()), 1, x.size() - 1);
  const double a = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return (1 - a) * y[i - 1] + a * y[i];
}

inline SuiteResult radial_pressure() {
  SuiteResult res{"radial-pressure"};
  {
    const double G0 = 1.3, mu = 1.0, nu = 2.0, r = 1.0, R = 1.5;
    const auto rp = solve_radial(GrowthLaw::constant(G0), mu, nu, r, R, 128);
    const double pr = G0 * r * r / (2 * nu) * std::log(R / r);
    double err = std::abs(rp.p_at_r - pr);
    for (int i = 0; i < rp.grid.size(); ++i) {
      const double rho = rp.rho_grid[i];
      const double ex = rho < r ? pr + G0 * (r * r - rho * rho) / (4 * mu) : G0 * r * r / (2 * nu) * std::log(R / rho);
      err = std::max(err, std::abs(rp.p_star[i] - ex));
    }
    res.at_most("constant-G closed form", err, 1e-10);
    res.at_most("constant-G c_* + G0 r / 2", std::abs(rp.c_star + G0 * r / 2), 1e-10);
  }
  const auto law = GrowthLaw::linear(1.0, 1.0);
  const double mu = 1.0, nu = 2.0, r = 1.0, R = 1.5;
  {
    const auto ref = solve_radial(law, mu, nu, r, R, 4096);
    std::vector<double> ns, ec, ep;
    for (int n : {64, 128, 256, 512}) {
      const auto c = solve_radial(law, mu, nu, r, R, n);
      double e = 0.0;
      for (int i = 0; i < c.grid.size(); ++i)
        e = std::max(e, std::abs(c.p_star[i] - interp(ref.rho_grid, ref.p_star, c.rho_grid[i])));
      ns.push_back(n);
      ep.push_back(e);
      ec.push_back(std::abs(c.c_star - ref.c_star));
    }
    res.at_least("linear-G order of c_* in N_rho", -fit_slope(ns, ec, true), 2.0);
    res.at_least("linear-G order of p_* in N_rho", -fit_slope(ns, ep, true), 2.0);
  }
  {
    auto pair = InterfacePair::concentric(r, R, 32);
    PressureOptions opt;
    opt.n_rho = 256;
    opt.n_omega = 8;
    const auto ref = solve_reference(law, mu, nu, pair, opt);
    const auto bg = boundary_gradients(ref);
    double prod = 0.0;
    for (int i = 0; i < ref.grid.n_in; ++i) prod += ref.source(i, 0) * ref.grid.volume(i) * two_pi;
    res.at_most("flux balance: outflow at R minus production", std::abs(two_pi * nu * (-R * bg.outer_r.mean()) - prod),
                1e-6);
    const auto rad = solve_radial(law, mu, nu, r, R, 256);
    res.at_most("c~_* - (r/R) c_*", std::max(std::abs(rad.c_star_tilde - (r / R) * rad.c_star),
                                             std::abs(ref.c_tilde - (r / R) * ref.c)),
                1e-12);
  }
  return res;
}

// Fitted exponential rate of |f_k| over [0, t_end].
inline double fitted_rate(double mu, double nu, int k, double t_end, double dt) {
  const std::size_t n = 32;
  const ModelParams m = suite_model(mu, nu, GrowthLaw::linear(1.0, 1.0), n, 256);
  std::vector<double> t, a;
  run(perturbed_state(n, 1.0, 1.5, 1e-4, k, 0.0, 1), m, {dt, t_end, 1}, [&](const SimState& s) {
    t.push_back(s.time);
    a.push_back(mode_amplitude(s.pair.f(), k));
  });
  return fit_slope(t, a, false);
}

inline SuiteResult dispersion_match() {
  SuiteResult res{"dispersion-match"};
  const double r = 1.0, R = 1.5;
  for (auto [mu, nu] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}}) {
    const bool stable = mu < nu;
    const double c_star = solve_radial(GrowthLaw::linear(1.0, 1.0), mu, nu, r, R, 256).c_star;
    for (int k : {2, 3, 5}) {
      const double eig = inner_eigenvalue(dispersion_matrix(k, mobility_contrast(mu, nu), c_star, r, R)).real();
      const double rate = stable ? fitted_rate(mu, nu, k, 0.2, 0.01) : fitted_rate(mu, nu, k, 0.02, 0.002);
      const std::string tag = "mu=" + io::num(mu) + " nu=" + io::num(nu) + " k=" + std::to_string(k);
      if (!stable) res.at_least(tag + " fitted growth rate", rate, 0.0);
      res.at_most(tag + " |rate - Re eig M(k)| / |Re eig| (rate " + io::num(rate) + ", eig " + io::num(eig) + ")",
                  std::abs(rate - eig) / std::abs(eig), stable ? 0.02 : 0.05);
    }
  }
  return res;
}

inline SuiteResult conservation() {
  SuiteResult res{"conservation"};
  const std::size_t n = 32;
  ModelParams m = suite_model(1.0, 2.0, GrowthLaw::linear(1.0, 1.0), n, 128);
  double a0 = -1.0, drift = 0.0;
  run(perturbed_state(n, 1.0, 1.5, 1e-3, 2, 1e-3, 3), m, {0.02, 1.0, 1}, [&](const SimState& s) {
    if (a0 < 0) a0 = s.diag.annulus_area;
    drift = std::max(drift, std::abs(s.diag.annulus_area - a0) / a0);
  });
  res.at_most("annulus area relative drift over t in [0, 1]", drift, 1e-6);
  return res;
}

inline SuiteResult output_schema() {
  SuiteResult res{"output-schema"};
  static const std::string golden_diag =
      "time,annulus_area,m0,M0,c_star,c,h_amp_1,h_amp_2,h_amp_3,h_amp_4,h_amp_5,h_amp_6,h_amp_7,h_amp_8,"
      "H_amp_1,H_amp_2,H_amp_3,H_amp_4,H_amp_5,H_amp_6,H_amp_7,H_amp_8";
  static const std::string golden_disp =
      "k,inner_re,inner_im,outer_re,outer_im,decoupled_inner,decoupled_outer,unstable";
  static const std::vector<std::string> golden_keys{"time", "r", "R", "h", "H", "diagnostics"};
  static const std::vector<std::string> golden_diag_keys{
      "annulus_area", "m0", "M0", "c_star", "c", "pressure_residual", "pressure_iterations",
      "density_iterations", "density_contraction", "h_modes", "H_modes"};
  int mismatches = (io::diagnostics_header() != golden_diag) + (io::dispersion_header() != golden_disp);
  SimState s = perturbed_state(16, 1.0, 1.5, 1e-3, 2, 0.0, 1);
  s.diag.h_modes.assign(kDiagModes, 0.0);
  s.diag.H_modes.assign(kDiagModes, 0.0);
  const auto j = nlohmann::ordered_json::parse(io::state_json(s));
  std::vector<std::string> keys, dkeys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  for (const auto& [k, v] : j.at("diagnostics").items()) dkeys.push_back(k);
  mismatches += (keys != golden_keys) + (dkeys != golden_diag_keys);
  const std::string row = io::diagnostics_row(s);
  mismatches += std::count(row.begin(), row.end(), ',') != std::count(golden_diag.begin(), golden_diag.end(), ',');
  res.at_most("schema mismatches against the golden headers", mismatches, 0.0);
  return res;
}

struct Suite {
  std::string name;
  std::string summary;
  std::function<SuiteResult()> run;
};

inline const std::vector<Suite>& suites() {
  static const std::vector<Suite> all{
      {"kernel-identities", "Cauchy-Riemann, Poisson mean, conjugate and dJ/ds integral identities", kernel_identities},
      {"circle-exactness", "layer operators on concentric circles equal their Fourier multipliers", circle_exactness},
      {"radial-pressure", "radial pressure closed form, convergence order and flux balance", radial_pressure},
      {"conservation", "annulus area over a two-mode run", conservation},
      {"dispersion-match", "fitted mode rates against the dispersion matrix", dispersion_match},
      {"output-schema", "trajectory and CSV columns against the golden headers", output_schema},
  };
  return all;
}

// Runs a suite, turning exceptions into a failed result.
inline SuiteResult run_suite(const Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = s.run();
  } catch (const std::exception& e) {
    r = SuiteResult{s.name};
    r.error = e.what();
  }
  r.name = s.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace contour::validation
