#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spectral.hpp"

namespace contour {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double default_delta(double r, double R) { return (R - r) / (20.0 * R); }
inline double delta_min(double r, double R) { return (R - r) / (100.0 * R); }
inline double delta_max(double r, double R) { return (R - r) / (10.0 * R); }

struct InterfacePair {
  double r = 1.0;
  double R = 2.0;
  double delta = 0.0;
  PeriodicField h;
  PeriodicField H;

  std::size_t n() const { return h.size(); }
  PeriodicField f() const { return r * (h + 1.0); }
  PeriodicField F() const { return R * (H + 1.0); }

  static InterfacePair concentric(double r, double R, std::size_t n, double delta = 0.0) {
    return {r, R, delta > 0.0 ? delta : default_delta(r, R), PeriodicField(n), PeriodicField(n)};
  }

  // Throws GeometryError naming the first violated invariant.
  void validate() const {
    if (!(r > 0.0 && R > r)) throw GeometryError("need 0 < r < R");
    if (h.size() != H.size()) throw GeometryError("h and H must share the grid size");
    const double tol = 1e-12 * delta;
    if (delta < delta_min(r, R) - tol || delta > delta_max(r, R) + tol)
      throw GeometryError("delta outside [(R-r)/(100R), (R-r)/(10R)]");
    if ((h.sup_norm() + H.sup_norm()) / delta >= 1.0)
      throw GeometryError("smallness violated: (|h|_inf + |H|_inf)/delta >= 1");
    if (f().max() >= F().min()) throw GeometryError("interfaces not nested");
  }
};

// Quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 and its first two derivatives.
inline std::array<double, 3> smoothstep(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double t2 = t * t, t3 = t2 * t;
  return {t3 * (10.0 + t * (-15.0 + 6.0 * t)), 30.0 * t2 * (1.0 - t) * (1.0 - t),
          60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)};
}

// Cutoff eta_delta(u) with eta, eta', eta''.
inline std::array<double, 3> eta_delta(double u, double delta) {
  if (u <= 1.0 - 2.0 * delta || u >= 1.0 + 2.0 * delta) return {0.0, 0.0, 0.0};
  if (u < 1.0 - delta) {
    auto s = smoothstep((u - (1.0 - 2.0 * delta)) / delta);
    return {s[0], s[1] / delta, s[2] / (delta * delta)};
  }
  if (u <= 1.0 + delta) return {1.0, 0.0, 0.0};
  auto s = smoothstep((1.0 + 2.0 * delta - u) / delta);
  return {s[0], -s[1] / delta, s[2] / (delta * delta)};
}

struct MapSample {
  double zeta;
  double grad_r;      // e_r . grad zeta
  double grad_theta;  // e_theta . grad zeta
  double rho_dzeta;   // rho d(zeta)/d(rho)
};

// Point values h(omega), h'(omega), H(omega), H'(omega) fed to the map.
struct DeviationValues {
  double h = 0.0, dh = 0.0, H = 0.0, dH = 0.0;
};

inline MapSample eval_map(double r, double R, double delta, double rho, const DeviationValues& d) {
  const auto ei = eta_delta(rho / r, delta);
  const auto eo = eta_delta(rho / R, delta);
  MapSample m;
  m.zeta = 1.0 + d.h * ei[0] + d.H * eo[0];
  m.grad_r = d.h * ei[1] / r + d.H * eo[1] / R;
  m.rho_dzeta = rho * m.grad_r;
  m.grad_theta = rho > 0.0 ? (d.dh * ei[0] + d.dH * eo[0]) / rho : 0.0;
  return m;
}

inline DeviationValues deviation_at(const InterfacePair& p, double omega) {
  return {eval_at(p.h, omega), eval_at(derivative(p.h), omega), eval_at(p.H, omega),
          eval_at(derivative(p.H), omega)};
}

inline MapSample eval_map(const InterfacePair& p, double rho, double omega) {
  return eval_map(p.r, p.R, p.delta, rho, deviation_at(p, omega));
}

// 2x2 matrices in the polar frame (e_r, e_theta) at the point X.
using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 jacobian_forward(const MapSample& m, double rho) {
  return {{{m.zeta + m.rho_dzeta, rho * m.grad_theta}, {0.0, m.zeta}}};
}

inline Mat2 jacobian_inverse(const MapSample& m, double rho) {
  const double den = m.zeta * m.zeta + m.zeta * m.rho_dzeta;
  if (den <= 0.1) throw GeometryError("degenerate reference map: zeta^2 + zeta rho dzeta <= 0.1");
  const double iz = 1.0 / m.zeta;
  return {{{iz - m.rho_dzeta / den, -rho * m.grad_theta / den}, {0.0, iz}}};
}

inline Mat2 jacobian_inverse(const InterfacePair& p, double rho, double omega) {
  return jacobian_inverse(eval_map(p, rho, omega), rho);
}

struct KernelArgs {
  double b_tilde, B_tilde, b, B;
};

// Point form: h at theta and at theta+xi, H at theta.
inline KernelArgs kernel_args(double r, double R, double delta, double w, double h_theta,
                              double h_shifted, double H_theta) {
  const double e = eta_delta(w, delta)[0];
  const double ri = 1.0 / (1.0 + h_theta);
  const double ro = 1.0 / (1.0 + H_theta);
  return {w * (1.0 + h_shifted * e) * ri, (r / R) * w * (1.0 + h_shifted * e) * ro,
          w * (1.0 + h_theta * e) * ri, (r / R) * w * (1.0 + h_theta * e) * ro};
}

inline KernelArgs kernel_args(const InterfacePair& p, double w, double theta, double xi) {
  if (w < 0.0 || w > 1.0 + 4.0 * p.delta) throw std::invalid_argument("kernel_args: w out of range");
  return kernel_args(p.r, p.R, p.delta, w, eval_at(p.h, theta), eval_at(p.h, theta + xi),
                     eval_at(p.H, theta));
}

struct Smallness {
  double m0, M0;
};

inline Smallness smallness_norms(const InterfacePair& p) {
  return {p.h.sup_norm() / p.delta + derivative(p.h).sup_norm(),
          p.H.sup_norm() / p.delta + derivative(p.H).sup_norm()};
}

inline double collision_check(const InterfacePair& p) { return p.F().min() - p.f().max(); }

inline InterfacePair rereference(const InterfacePair& p) {
  const PeriodicField f = p.f(), F = p.F();
  const double r1 = f.mean(), R1 = F.mean();
  InterfacePair q;
  q.r = r1;
  q.R = R1;
  q.delta = (1.0 - r1 / R1) / (1.0 - p.r / p.R) * p.delta;
  q.h = f * (1.0 / r1) + (-1.0);
  q.H = F * (1.0 / R1) + (-1.0);
  // exact zero mean in the spectral sense
  q.h += -q.h.mean();
  q.H += -q.H.mean();
  if (q.delta < delta_min(r1, R1) * (1 - 1e-12) || q.delta > delta_max(r1, R1) * (1 + 1e-12))
    throw GeometryError("re-referenced delta leaves the admissible band");
  return q;
}

inline bool rereference_due(const InterfacePair& p) {
  return std::abs(p.h.mean()) > 0.1 * p.delta || std::abs(p.H.mean()) > 0.1 * p.delta;
}

inline double annulus_area(const InterfacePair& p) {
  const PeriodicField f = p.f(), F = p.F();
  return pi * (F * F - f * f).mean();
}

}  // namespace contour
