#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "pressure.hpp"
#include "spectral.hpp"

namespace contour {

struct QuadSpec {
  int n_w = 256;
  int n_xi = 512;
};

// Midpoint rule on [0, 1]: N_w - N_b cells below the cut-off band and N_b = max(8, N_w/4)
// cells on [1 - 2 delta, 1]; the last two band cells are split geometrically into 8 subcells
// with boundaries 1 - 2 dw 2^-m.
struct WRule {
  std::vector<double> nodes, weights;
};

inline WRule make_w_rule(int n_w, double delta) {
  if (n_w < 16) throw std::invalid_argument("quadrature needs N_w >= 16");
  if (!(delta > 0.0 && delta < 0.25)) throw std::invalid_argument("quadrature needs 0 < delta < 1/4");
  WRule q;
  const int nb = std::max(8, n_w / 4), n0 = n_w - nb;
  const double a = 1.0 - 2.0 * delta;
  for (int i = 0; i < n0; ++i) {
    q.nodes.push_back((i + 0.5) * a / n0);
    q.weights.push_back(a / n0);
  }
  const double dw = 2.0 * delta / nb;
  for (int i = 0; i < nb - 2; ++i) {
    q.nodes.push_back(a + (i + 0.5) * dw);
    q.weights.push_back(dw);
  }
  std::vector<double> b;
  for (int m = 0; m < 8; ++m) b.push_back(1.0 - 2.0 * dw * std::ldexp(1.0, -m));
  b.push_back(1.0);
  for (int m = 0; m < 8; ++m) {
    q.nodes.push_back(0.5 * (b[m] + b[m + 1]));
    q.weights.push_back(b[m + 1] - b[m]);
  }
  return q;
}

// g0 sampled on the w-nodes x the uniform phi-grid of N_xi points, row-major in w.
struct SampledSource {
  double delta = 0.0;
  WRule w;
  int n_xi = 0;
  std::vector<double> values;

  double at(std::size_t iw, std::size_t m) const { return values[iw * std::size_t(n_xi) + m]; }
};

inline void check_quad(const QuadSpec& q) {
  if (q.n_xi < 8 || q.n_xi % 2) throw std::invalid_argument("quadrature needs even N_xi >= 8");
}

template <class Fn>
  requires std::invocable<Fn, double, double>
SampledSource sample_source(Fn&& g, const QuadSpec& q, double delta) {
  check_quad(q);
  SampledSource s{delta, make_w_rule(q.n_w, delta), q.n_xi, {}};
  s.values.resize(s.w.nodes.size() * std::size_t(q.n_xi));
  for (std::size_t i = 0; i < s.w.nodes.size(); ++i)
    for (int m = 0; m < q.n_xi; ++m) s.values[i * q.n_xi + m] = g(s.w.nodes[i], two_pi * m / q.n_xi);
  return s;
}

// Linear in rho between pressure cell centres (extrapolated at both ends), spectral in omega.
inline SampledSource sample_source(const ReferencePressure& p, const QuadSpec& q, double delta) {
  check_quad(q);
  SampledSource s{delta, make_w_rule(q.n_w, delta), q.n_xi, {}};
  const auto& g = p.grid;
  const int L = g.n_in;
  std::vector<PeriodicField> rows;
  for (int i = 0; i < L; ++i) {
    PeriodicField row(std::vector<double>(p.g0.begin() + std::ptrdiff_t(i) * p.n_omega,
                                          p.g0.begin() + std::ptrdiff_t(i + 1) * p.n_omega));
    rows.emplace_back(resample(row, std::size_t(q.n_xi)));
  }
  s.values.resize(s.w.nodes.size() * std::size_t(q.n_xi));
  for (std::size_t iw = 0; iw < s.w.nodes.size(); ++iw) {
    const double rho = s.w.nodes[iw] * g.r;
    int i = int(std::upper_bound(g.centers.begin(), g.centers.begin() + L, rho) - g.centers.begin());
    i = std::clamp(i, 1, L - 1);
    const double a = (rho - g.centers[i - 1]) / (g.centers[i] - g.centers[i - 1]);
    for (int m = 0; m < q.n_xi; ++m) s.values[iw * q.n_xi + m] = (1 - a) * rows[i - 1][m] + a * rows[i][m];
  }
  return s;
}

struct GradComponents {
  PeriodicField tangential, radial;
};

namespace detail {

inline void check_source(const InterfacePair& pair, const SampledSource& src) {
  if (src.n_xi % int(pair.n()) != 0) throw std::invalid_argument("N_xi must be a multiple of N");
  if (src.delta != pair.delta) throw std::invalid_argument("source sampled for a different cut-off width");
}

// Y(w, phi) g0(w, phi) on the fine grid for one w-node.
inline std::vector<double> weighted_row(const SampledSource& src, std::size_t iw, const std::vector<double>& hf,
                                        double delta) {
  const double w = src.w.nodes[iw];
  const auto e = eta_delta(w, delta);
  std::vector<double> F(src.n_xi);
  for (int m = 0; m < src.n_xi; ++m) F[m] = (1.0 + hf[m] * (e[0] + w * e[1])) * src.at(iw, m);
  return F;
}

}  // namespace detail

namespace detail {

inline constexpr int kTaylorOrder = 3;

// s-derivatives of K and J up to kTaylorOrder. With z = s e^{i xi}, K = Im(s(1+z)/(1-z)) and
// J = -Re(s(1+z)/(1-z)) - s.
inline std::array<KJ, kTaylorOrder + 1> kj_derivatives(double s, double xi) {
  const cplx a = std::polar(1.0, xi);
  const cplx u = 1.0 / (1.0 - s * a);
  std::array<KJ, kTaylorOrder + 1> out;
  const cplx phi = s * (1.0 + s * a) * u;
  out[0] = {phi.imag(), -phi.real() - s};
  // d^n/ds^n [s(1+z)/(1-z)] = 2 n! a^{n-1} u^{n+1} - [n == 1]
  cplx t = 2.0 * u * u;
  for (int n = 1; n <= kTaylorOrder; ++n) {
    out[n] = {t.imag(), -t.real()};
    t *= double(n + 1) * a * u;
  }
  return out;
}

// d^n/db^n of b^p
inline double power_derivative(int p, int n, double b) {
  if (n > p) return 0.0;
  double c = 1.0;
  for (int i = 0; i < n; ++i) c *= p - i;
  return c * std::pow(b, p - n);
}

}  // namespace detail

// e_theta and e_r components of grad(Gamma * g) on the inner interface.
inline GradComponents grad_inner(const InterfacePair& pair, const SampledSource& src) {
  detail::check_source(pair, src);
  constexpr int nt = detail::kTaylorOrder;
  const int n = int(pair.n()), nx = src.n_xi, stride = nx / n, nk = nx / 2;
  const std::vector<double> hf = resample(pair.h, std::size_t(nx));
  const std::size_t nwq = src.w.nodes.size();
  std::vector<std::vector<double>> rows(nwq);
  // spec[iw][i] is the spectrum of h^i F
  std::vector<std::array<std::vector<cplx>, nt + 1>> spec(nwq);
  for (std::size_t iw = 0; iw < nwq; ++iw) {
    rows[iw] = detail::weighted_row(src, iw, hf, pair.delta);
    std::vector<double> v = rows[iw];
    for (int i = 0; i <= nt; ++i) {
      spec[iw][i] = rfft(v);
      spec[iw][i][nk] *= 0.5;
      for (int m = 0; m < nx; ++m) v[m] *= hf[m];
    }
  }
  double binom[nt + 1][nt + 1] = {};
  for (int i = 0; i <= nt; ++i) {
    binom[i][0] = 1.0;
    for (int l = 1; l <= i; ++l) binom[i][l] = binom[i - 1][l - 1] + (l < i ? binom[i - 1][l] : 0.0);
  }
  GradComponents out{PeriodicField(pair.n()), PeriodicField(pair.n())};
  const double dxi = two_pi / nx;
  parallel_for(n, [&](int j) {
    const int jf = j * stride;
    const double hj = hf[jf], th = two_pi * j / n;
    std::vector<cplx> rot(nk + 1);
    for (int k = 0; k <= nk; ++k) rot[k] = std::polar(1.0, k * th);
    double tk = 0.0, tj = 0.0;
    for (std::size_t iw = 0; iw < nwq; ++iw) {
      const double w = src.w.nodes[iw], e = eta_delta(w, pair.delta)[0];
      const double b = w * (1.0 + hj * e) / (1.0 + hj);
      // b~ - b = c1 (h(theta + xi) - h(theta))
      const double c1 = w * e / (1.0 + hj);
      const auto& F = rows[iw];
      // Taylor terms of K(b~) about b, each summed mode by mode
      double pk = 0.0, pj = 0.0, cn = 1.0;
      for (int o = 0; o <= nt; ++o) {
        double sk = 0.0, sj = 0.0, s0 = 0.0;
        for (int k = 0; k <= nk; ++k) {
          cplx g = 0.0;
          double hp = 1.0;
          for (int i = o; i >= 0; --i) {
            g += binom[o][i] * hp * spec[iw][i][k];
            hp *= -hj;
          }
          if (k == 0) {
            s0 = g.real();
            continue;
          }
          const cplx z = g * rot[k];
          const double dp = detail::power_derivative(k + 1, o, b);
          sk += dp * z.imag();
          sj += dp * z.real();
        }
        pk += cn * (-4.0 * pi * sk);
        pj += cn * (-4.0 * pi * (detail::power_derivative(1, o, b) * s0 + sj));
        cn *= c1 / (o + 1);
      }
      // what the truncated series misses, on the fine grid
      for (int m = 1; m < nx; ++m) {
        const int q = (jf + m) % nx;
        const double xi = m * dxi;
        const double db = c1 * (hf[q] - hj);
        const auto a = eval_kj({b + db, xi});
        const auto d = detail::kj_derivatives(b, xi);
        double rk = a.K, rj = a.J, f = 1.0;
        for (int o = 0; o <= nt; ++o) {
          rk -= f * d[o].K;
          rj -= f * d[o].J;
          f *= db / (o + 1);
        }
        pk += dxi * rk * F[q];
        pj += dxi * rj * F[q];
      }
      tk += src.w.weights[iw] * pk;
      tj += src.w.weights[iw] * pj;
    }
    out.tangential[j] = pair.r / (4.0 * pi) * tk;
    out.radial[j] = pair.r / (4.0 * pi) * tj;
  });
  return out;
}

// The same components on the outer interface; the kernel argument stays below r(1+4 delta)/R.
inline GradComponents grad_outer(const InterfacePair& pair, const SampledSource& src) {
  detail::check_source(pair, src);
  const int n = int(pair.n()), nx = src.n_xi, stride = nx / n;
  const std::vector<double> hf = resample(pair.h, std::size_t(nx));
  const std::size_t nwq = src.w.nodes.size();
  std::vector<std::vector<double>> rows(nwq);
  for (std::size_t iw = 0; iw < nwq; ++iw) rows[iw] = detail::weighted_row(src, iw, hf, pair.delta);
  GradComponents out{PeriodicField(pair.n()), PeriodicField(pair.n())};
  const double dxi = two_pi / nx;
  parallel_for(n, [&](int j) {
    const int jf = j * stride;
    const double Hj = pair.H[std::size_t(j)];
    double tk = 0.0, tj = 0.0;
    for (std::size_t iw = 0; iw < nwq; ++iw) {
      const double w = src.w.nodes[iw], e = eta_delta(w, pair.delta)[0];
      double sk = 0.0, sj = 0.0;
      for (int m = 0; m < nx; ++m) {
        const int q = (jf + m) % nx;
        const double B = (pair.r / pair.R) * w * (1.0 + hf[q] * e) / (1.0 + Hj);
        const auto a = eval_kj({B, m * dxi});
        sk += a.K * rows[iw][q];
        sj += a.J * rows[iw][q];
      }
      tk += src.w.weights[iw] * sk * dxi;
      tj += src.w.weights[iw] * sj * dxi;
    }
    out.tangential[j] = pair.r / (4.0 * pi) * tk;
    out.radial[j] = pair.r / (4.0 * pi) * tj;
  });
  return out;
}

struct SourceSpeeds {
  double c, c_tilde;
};

// c = -(1/2 pi r) int_{B_r} g0 dX and c~ = (r/R) c.
inline SourceSpeeds source_speeds(const InterfacePair& pair, const SampledSource& src) {
  double s = 0.0;
  for (std::size_t iw = 0; iw < src.w.nodes.size(); ++iw) {
    double row = 0.0;
    for (int m = 0; m < src.n_xi; ++m) row += src.at(iw, m);
    s += src.w.weights[iw] * src.w.nodes[iw] * row * two_pi / src.n_xi;
  }
  const double c = -pair.r * s / two_pi;
  return {c, (pair.r / pair.R) * c};
}

}  // namespace contour
