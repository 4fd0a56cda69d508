#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "densities.hpp"
#include "geometry.hpp"
#include "growth_potential.hpp"
#include "layer_ops.hpp"
#include "pressure.hpp"
#include "spectral.hpp"

namespace contour {

class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Integrator { etd1, etd2rk };

struct ModelParams {
  double mu = 1.0, nu = 2.0;
  GrowthLaw law = GrowthLaw::constant(1.0);
  PressureOptions pressure{};
  QuadSpec quad{};
  DensityOptions densities{};
  Integrator integrator = Integrator::etd1;
};

struct DiagRecord {
  double annulus_area = 0.0;
  double m0 = 0.0, M0 = 0.0;
  std::vector<double> h_modes, H_modes;  // k = 1..8
  double pressure_residual = 0.0;
  int pressure_iterations = 0;
  int density_iterations = 0;
  double density_contraction = 0.0;
  double c_star = 0.0, c = 0.0;
};

struct SimState {
  double time = 0.0;
  InterfacePair pair;
  // caches, filled by refresh()
  std::shared_ptr<const ReferencePressure> pressure;
  GradComponents grad_in, grad_out;
  BoundaryDensities densities;
  double c_star = 0.0, c_tilde_star = 0.0;
  DiagRecord diag;
  bool fresh = false;
};

inline constexpr int kDiagModes = 8;

// Recompute pressure, growth gradients and densities for the current pair.
inline void refresh(SimState& s, const ModelParams& m) {
  const auto& p = s.pair;
  const RadialPressure rad =
      solve_radial(m.law, m.mu, m.nu, make_radial_grid(p.r, p.R, p.delta, m.pressure.n_rho));
  s.c_star = rad.c_star;
  s.c_tilde_star = rad.c_star_tilde;
  auto ref = std::make_shared<ReferencePressure>(solve_reference(m.law, m.mu, m.nu, p, m.pressure));
  const SampledSource src = sample_source(*ref, m.quad, p.delta);
  s.grad_in = grad_inner(p, src);
  s.grad_out = grad_outer(p, src);
  s.densities = solve_densities(p, s.grad_in, s.grad_out, mobility_contrast(m.mu, m.nu), m.densities);
  s.pressure = ref;

  DiagRecord& d = s.diag;
  d.annulus_area = annulus_area(p);
  const auto sm = smallness_norms(p);
  d.m0 = sm.m0;
  d.M0 = sm.M0;
  d.h_modes.assign(kDiagModes, 0.0);
  d.H_modes.assign(kDiagModes, 0.0);
  for (int k = 1; k <= kDiagModes && std::size_t(k) < p.n() / 2; ++k) {
    d.h_modes[k - 1] = mode_amplitude(p.h, k);
    d.H_modes[k - 1] = mode_amplitude(p.H, k);
  }
  d.pressure_residual = ref->residual_history.empty() ? 0.0 : ref->residual_history.back();
  d.pressure_iterations = ref->iterations;
  d.density_iterations = s.densities.iterations;
  d.density_contraction = s.densities.contraction;
  d.c_star = s.c_star;
  d.c = ref->c;
  s.fresh = true;
}

struct Velocities {
  PeriodicField dth, dtH;
};

// d/dt of h and H from the boundary-integral contour equations.
inline Velocities velocity_contour(const SimState& s) {
  if (!s.fresh) throw std::logic_error("velocity_contour: stale caches");
  const auto& p = s.pair;
  const auto& d = s.densities;
  const PeriodicField f = p.f(), F = p.F(), df = derivative(f), dF = derivative(F);
  const auto io = to_pairings(Curve::inner, p, interaction_inner_from_outer(p, d.outer_prime));
  const auto oi = to_pairings(Curve::outer, p, interaction_outer_from_inner(p, d.jump_prime));
  const PeriodicField in = singular_tangent(Curve::inner, p, d.jump_prime) + io.tangent -
                           (df * s.grad_in.tangential - f * s.grad_in.radial);
  const PeriodicField out = singular_tangent(Curve::outer, p, d.outer_prime) + oi.tangent -
                            (dF * s.grad_out.tangential - F * s.grad_out.radial);
  Velocities v{PeriodicField(p.n()), PeriodicField(p.n())};
  for (std::size_t j = 0; j < p.n(); ++j) {
    v.dth[j] = -in[j] / (f[j] * p.r);
    v.dtH[j] = -out[j] / (F[j] * p.R);
  }
  return v;
}

struct Rhs {
  PeriodicField rhs_h, rhs_H;  // everything except the linear fractional-heat part
  double lambda_h = 0.0, lambda_H = 0.0;
  Velocities total;
};

// dh/dt = -lambda_h |D| h + rhs_h and dH/dt = -lambda_H |D| H + rhs_H.
inline Rhs assemble_rhs(const SimState& s, const ModelParams& m) {
  Rhs out;
  out.total = velocity_contour(s);
  const double A = mobility_contrast(m.mu, m.nu);
  out.lambda_h = A * s.c_star / s.pair.r;
  out.lambda_H = -s.c_tilde_star / s.pair.R;
  out.rhs_h = out.total.dth + out.lambda_h * frac_laplacian_half(s.pair.h);
  out.rhs_H = out.total.dtH + out.lambda_H * frac_laplacian_half(s.pair.H);
  return out;
}

// Interface velocities from one-sided gradients of the reference-coordinate pressure.
inline Velocities velocity_direct(const SimState& s) {
  if (!s.pressure) throw std::logic_error("velocity_direct: no pressure cache");
  const auto& p = s.pair;
  const std::size_t n = p.n();
  const BoundaryGradients bg = boundary_gradients(*s.pressure);
  const PeriodicField gr(resample(bg.inner_r, n)), gt(resample(bg.inner_theta, n)),
      Gr(resample(bg.outer_r, n));
  const PeriodicField dh = derivative(p.h), dH = derivative(p.H);
  Velocities v{PeriodicField(n), PeriodicField(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double a = 1.0 + p.h[j], b = 1.0 + p.H[j];
    v.dth[j] = -(s.pressure->mu / p.r) *
               (((a * a + dh[j] * dh[j]) / (a * a * a)) * gr[j] - (dh[j] / (a * a)) * gt[j]);
    v.dtH[j] = -(s.pressure->nu / p.R) * ((b * b + dH[j] * dH[j]) / (b * b * b)) * Gr[j];
  }
  return v;
}

using Mat22 = std::array<std::array<double, 2>, 2>;

// d/dt (f_k, F_k) = M(k) (f_k, F_k) for the linearized contour equations.
inline Mat22 dispersion_matrix(int k, double A, double c_star, double r, double R) {
  if (k < 1) throw std::invalid_argument("dispersion_matrix: need k >= 1");
  const double s = std::pow(r / R, k), ct = c_star * r / R;
  const cplx mH(0.0, -1.0);
  Mat22 M{};
  for (int col = 0; col < 2; ++col) {
    const auto d = linearized_densities(k, A, c_star, ct, r, R, col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0);
    M[0][col] = (-(1.0 / (2.0 * r)) * mH * (d[0] + s * d[1])).real();
    M[1][col] = (-(1.0 / (2.0 * R)) * mH * (d[1] + s * d[0])).real();
  }
  return M;
}

inline std::array<cplx, 2> eigenvalues(const Mat22& M) {
  const double tr = M[0][0] + M[1][1], det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  const cplx disc = std::sqrt(cplx(tr * tr / 4.0 - det));
  return {tr / 2.0 + disc, tr / 2.0 - disc};
}

// The eigenvalue whose eigenvector leans on the inner interface (continuous in s_k from the diagonal).
inline cplx inner_eigenvalue(const Mat22& M) {
  const auto e = eigenvalues(M);
  return std::abs(e[0] - M[0][0]) <= std::abs(e[1] - M[0][0]) ? e[0] : e[1];
}

// Largest dt for which unstable inner modes stay resolved; infinity when lambda_h >= 0.
inline double dt_guard(const SimState& s, const ModelParams& m) {
  if (mobility_contrast(m.mu, m.nu) * s.c_star / s.pair.r >= 0.0) return INFINITY;
  return 0.5 * s.pair.r / (std::abs(s.c_star) * double(s.pair.n()));
}

namespace detail {

inline double phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

inline double phi2(double z) {
  if (std::abs(z) < 0.1) {
    // sum_j z^j / (j + 2)!
    double s = 0.0;
    for (int j = 8; j >= 0; --j) s = s * z / double(j + 3) + 1.0;
    return 0.5 * s;
  }
  return (std::expm1(z) - z) / (z * z);
}

// u_k <- e^{z} u_k + dt phi1(z) N_k (+ dt phi2(z) D_k), z = -lambda |k| dt
inline PeriodicField etd_update(const PeriodicField& u, double lambda, double dt, const PeriodicField& N,
                                const PeriodicField* D) {
  auto cu = u.coeffs(), cn = N.coeffs();
  std::vector<cplx> cd;
  if (D) cd = D->coeffs();
  const std::size_t h = u.size() / 2;
  for (std::size_t k = 0; k <= h; ++k) {
    const double z = -lambda * double(k) * dt;
    cu[k] = std::exp(z) * cu[k] + dt * phi1(z) * cn[k];
    if (D) cu[k] += dt * phi2(z) * cd[k];
  }
  return PeriodicField::from_coeffs(cu, u.size());
}

}  // namespace detail

// One exponential step; the returned state has fresh caches.
inline SimState step_etd(const SimState& s0, double dt, const ModelParams& m) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_etd: need dt > 0");
  SimState s = s0;
  if (!s.fresh) refresh(s, m);
  if (dt > dt_guard(s, m) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the unstable-regime guard " << dt_guard(s, m);
    throw std::invalid_argument(os.str());
  }
  const Rhs r0 = assemble_rhs(s, m);
  const PeriodicField Nh = dealias(r0.rhs_h), NH = dealias(r0.rhs_H);
  SimState next;
  next.pair = s.pair;
  next.pair.h = detail::etd_update(s.pair.h, r0.lambda_h, dt, Nh, nullptr);
  next.pair.H = detail::etd_update(s.pair.H, r0.lambda_H, dt, NH, nullptr);
  if (m.integrator == Integrator::etd2rk) {
    if (collision_check(next.pair) <= 0.0) throw CollisionError("interfaces collide in the ETD2RK stage");
    // the stage is evaluated on re-referenced curves, and its velocities are mapped back to this frame
    SimState stage;
    stage.pair = rereference(next.pair);
    refresh(stage, m);
    const Velocities v = velocity_contour(stage);
    const PeriodicField nh = (stage.pair.r / s.pair.r) * v.dth + r0.lambda_h * frac_laplacian_half(next.pair.h);
    const PeriodicField nH = (stage.pair.R / s.pair.R) * v.dtH + r0.lambda_H * frac_laplacian_half(next.pair.H);
    const PeriodicField Dh = dealias(nh) - Nh, DH = dealias(nH) - NH;
    next.pair.h = detail::etd_update(s.pair.h, r0.lambda_h, dt, Nh, &Dh);
    next.pair.H = detail::etd_update(s.pair.H, r0.lambda_H, dt, NH, &DH);
  }
  next.time = s.time + dt;
  if (collision_check(next.pair) <= 0.0) {
    std::ostringstream os;
    os << "interfaces collide at t = " << next.time;
    throw CollisionError(os.str());
  }
  if (rereference_due(next.pair)) next.pair = rereference(next.pair);
  next.fresh = false;
  refresh(next, m);
  return next;
}

struct RunOptions {
  double dt = 1e-2;
  double t_end = 1.0;
  int output_every = 1;  // emit every k-th step; the initial state is always emitted
};

// Thrown by run() with the last good state attached.
class RunError : public std::runtime_error {
 public:
  enum class Kind { collision, solver };
  RunError(Kind k, const std::string& msg, SimState last)
      : std::runtime_error(msg), kind(k), last_good(std::move(last)) {}
  Kind kind;
  SimState last_good;
};

// Steps are split into equal substeps when the unstable-regime guard is tighter than dt.
inline void run(SimState s, const ModelParams& m, const RunOptions& opt,
                const std::function<void(const SimState&)>& emit) {
  if (!(opt.dt > 0.0 && opt.dt < opt.t_end)) throw std::invalid_argument("run: need 0 < dt < T_end");
  try {
    if (!s.fresh) refresh(s, m);
  } catch (const SolverError& e) {
    throw RunError(RunError::Kind::solver, e.what(), s);
  }
  emit(s);
  const long nsteps = std::lround(std::ceil(opt.t_end / opt.dt - 1e-9));
  for (long i = 1; i <= nsteps; ++i) {
    const double target = std::min(opt.t_end, double(i) * opt.dt);
    try {
      while (s.time < target - 1e-12) {
        const double left = target - s.time;
        const int sub = std::max(1, int(std::ceil(left / std::min(left, dt_guard(s, m)) - 1e-9)));
        s = step_etd(s, left / sub, m);
      }
      s.time = target;
    } catch (const CollisionError& e) {
      throw RunError(RunError::Kind::collision, e.what(), s);
    } catch (const GeometryError& e) {
      throw RunError(RunError::Kind::solver, e.what(), s);
    } catch (const SolverError& e) {
      throw RunError(RunError::Kind::solver, e.what(), s);
    }
    if (i % opt.output_every == 0 || i == nsteps) emit(s);
  }
}

}  // namespace contour
