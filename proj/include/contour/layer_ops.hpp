#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "geometry.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "spectral.hpp"

namespace contour {

enum class Curve { inner, outer };

namespace detail {

inline const PeriodicField& deviation(Curve c, const InterfacePair& p) { return c == Curve::inner ? p.h : p.H; }

struct SingularParts {
  PeriodicField normal, tangent;
};

// gamma'^perp . K psi and gamma' . K psi from the mean / bounded / principal-value split, with
// the xi-integrals on the grid xi_m = 2 pi (m + 1/2)/N. Only the deviation enters.
inline SingularParts singular_parts(const PeriodicField& h, const PeriodicField& psi, bool want_normal,
                                    bool want_tangent) {
  const int n = int(h.size());
  if (psi.size() != h.size()) throw std::invalid_argument("density and curve sizes differ");
  const PeriodicField dh = derivative(h);
  if (dh.sup_norm() >= 0.5) throw GeometryError("singular operators need |h'|_inf < 0.5");
  const PeriodicField hs = shift(h, pi / n), ps = shift(psi, pi / n);
  const double pbar = psi.mean(), wq = two_pi / n;
  std::vector<double> sn2(n), tn2(n);
  for (int m = 0; m < n; ++m) {
    const double xi = two_pi * (m + 0.5) / n;
    sn2[m] = 2.0 * std::sin(0.5 * xi);
    tn2[m] = 2.0 * std::tan(0.5 * xi);
    if (std::abs(sn2[m]) <= 1e-8) throw std::logic_error("shifted grid hit xi = 0");
  }
  SingularParts out{PeriodicField(h.size()), PeriodicField(h.size())};
  const PeriodicField Hpsi = want_tangent ? hilbert(psi) : PeriodicField(h.size());
  parallel_for(n, [&](int j) {
    const double h0 = h[j], a = dh[j] / (1.0 + h0);
    double sl = 0.0, s2 = 0.0, s3 = 0.0, t2 = 0.0, t3 = 0.0;
    for (int m = 0; m < n; ++m) {
      const int q = (j + m) % n;
      const double d = (hs[q] - h0) / sn2[m];
      const double l = d * d / ((1.0 + h0) * (1.0 + hs[q]));
      const double p = ps[q] / (1.0 + l);
      sl += l * p;
      s2 += d / sn2[m] * p;
      s3 += p / tn2[m];
      t2 += d / sn2[m] * p / (1.0 + hs[q]);
      t3 += l * p / tn2[m];
    }
    sl *= wq;
    if (want_normal) {
      const double L0 = -pi * pbar, L1 = -0.5 * sl, L2 = s2 * wq / (1.0 + h0), L3 = -a * s3 * wq;
      out.normal[j] = (L0 + L1 + L2 + L3) / two_pi;
    }
    if (want_tangent) {
      const double T1 = 0.5 * a * (two_pi * pbar - sl), T2 = -a * t2 * wq, T3 = t3 * wq;
      out.tangent[j] = (T1 + T2 + T3) / two_pi + 0.5 * Hpsi[j];
    }
  });
  return out;
}

// Fine trapezoid size so that the aliasing error of the smooth kernel is below round-off.
inline int interaction_grid(int n, double smax) {
  const int extra = int(std::ceil(std::log(1e-17) / std::log(std::max(smax, 1e-3))));
  int m = n;
  while (m < n / 2 + extra) m *= 2;
  return m;
}

}  // namespace detail

// gamma'(theta)^perp . K_gamma psi on the chosen interface.
inline PeriodicField singular_normal(Curve c, const InterfacePair& pair, const PeriodicField& psi) {
  return detail::singular_parts(detail::deviation(c, pair), psi, true, false).normal;
}

// gamma'(theta) . K_gamma psi on the chosen interface.
inline PeriodicField singular_tangent(Curve c, const InterfacePair& pair, const PeriodicField& psi) {
  return detail::singular_parts(detail::deviation(c, pair), psi, false, true).tangent;
}

struct Interaction {
  PeriodicField radial, tangential;
};

// f e_r . K_{gamma, gamma~} psi and f e_theta . K_{gamma, gamma~} psi with psi living on gamma~.
inline Interaction interaction_inner_from_outer(const InterfacePair& pair, const PeriodicField& psi) {
  const int n = int(pair.n());
  const PeriodicField f = pair.f(), F = pair.F();
  if (f.max() >= F.min()) throw GeometryError("interfaces not nested");
  const int M = detail::interaction_grid(n, f.max() / F.min()), st = M / n;
  const std::vector<double> Ff = resample(F, std::size_t(M)), pf = resample(psi, std::size_t(M));
  Interaction out{PeriodicField(pair.n()), PeriodicField(pair.n())};
  parallel_for(n, [&](int j) {
    double sr = 0.0, st_ = 0.0;
    for (int m = 0; m < M; ++m) {
      const int q = (j * st + m) % M;
      const auto pq = eval_poisson({f[j] / Ff[q], two_pi * m / M});
      sr += (1.0 - pq.P) * pf[q];
      st_ += pq.Q * pf[q];
    }
    out.radial[j] = sr / (2.0 * M);
    out.tangential[j] = -st_ / (2.0 * M);
  });
  return out;
}

// F e_r . K_{gamma~, gamma} psi and F e_theta . K_{gamma~, gamma} psi with psi living on gamma.
inline Interaction interaction_outer_from_inner(const InterfacePair& pair, const PeriodicField& psi) {
  const int n = int(pair.n());
  const PeriodicField f = pair.f(), F = pair.F();
  if (f.max() >= F.min()) throw GeometryError("interfaces not nested");
  const int M = detail::interaction_grid(n, f.max() / F.min()), st = M / n;
  const std::vector<double> ff = resample(f, std::size_t(M)), pf = resample(psi, std::size_t(M));
  Interaction out{PeriodicField(pair.n()), PeriodicField(pair.n())};
  parallel_for(n, [&](int j) {
    double sr = 0.0, st_ = 0.0;
    for (int m = 0; m < M; ++m) {
      const int q = (j * st + m) % M;
      const auto pq = eval_poisson({ff[q] / F[j], two_pi * m / M});
      sr += (1.0 + pq.P) * pf[q];
      st_ += pq.Q * pf[q];
    }
    out.radial[j] = sr / (2.0 * M);
    out.tangential[j] = -st_ / (2.0 * M);
  });
  return out;
}

struct Pairings {
  PeriodicField tangent, normal;  // gamma' . K psi, gamma'^perp . K psi
};

// Converts the polar components (scaled by the curve radius) into pairings with gamma', gamma'^perp.
inline Pairings to_pairings(Curve c, const InterfacePair& pair, const Interaction& in) {
  const PeriodicField g = c == Curve::inner ? pair.f() : pair.F();
  PeriodicField ratio = derivative(g);
  for (std::size_t j = 0; j < ratio.size(); ++j) ratio[j] /= g[j];
  return {ratio * in.radial + in.tangential, ratio * in.tangential - in.radial};
}

struct DoubleLayerValue {
  double value;
  bool near_curve;  // closer than three grid spacings: accuracy degraded
};

// (1/2 pi) int (x - gamma) . n_out |gamma'| / |x - gamma|^2 psi dtheta' by the trapezoid rule.
inline DoubleLayerValue double_layer_offcurve(Curve c, const InterfacePair& pair, const PeriodicField& psi,
                                              std::array<double, 2> x) {
  const PeriodicField g = c == Curve::inner ? pair.f() : pair.F();
  const PeriodicField dg = derivative(g);
  const int n = int(g.size());
  double s = 0.0, dmin = 1e300, len = 0.0;
  for (int q = 0; q < n; ++q) {
    const double t = g.theta(q), ct = std::cos(t), sn = std::sin(t);
    const double gx = g[q] * ct, gy = g[q] * sn;
    const double tx = dg[q] * ct - g[q] * sn, ty = dg[q] * sn + g[q] * ct;
    const double dx = x[0] - gx, dy = x[1] - gy, d2 = dx * dx + dy * dy;
    if (d2 == 0.0) throw std::invalid_argument("double layer evaluated on a node of the curve");
    s += (dx * ty - dy * tx) / d2 * psi[q];
    dmin = std::min(dmin, std::sqrt(d2));
    len += std::hypot(tx, ty);
  }
  const double spacing = len * two_pi / n / n;
  return {s / n, dmin < 3.0 * spacing};
}

}  // namespace contour
