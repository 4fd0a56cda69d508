#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// this Boost release calls unqualified isnan inside pchip
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include <Eigen/Core>
#include <unsupported/Eigen/IterativeSolvers>

#include "geometry.hpp"
#include "spectral.hpp"

namespace contour {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

class GrowthLaw {
 public:
  enum class Kind { linear, tabulated, constant };

  static GrowthLaw linear(double G0, double pM) {
    if (!(G0 > 0.0 && pM > 0.0)) throw std::invalid_argument("linear growth law needs G0 > 0, pM > 0");
    GrowthLaw g;
    g.kind_ = Kind::linear;
    g.G0_ = G0;
    g.pM_ = pM;
    return g;
  }

  // Degenerate G = G0 everywhere; only used to exercise closed forms.
  static GrowthLaw constant(double G0) {
    GrowthLaw g;
    g.kind_ = Kind::constant;
    g.G0_ = G0;
    g.pM_ = std::numeric_limits<double>::infinity();
    return g;
  }

  // Samples (p_i, G_i): p increasing from 0, G strictly decreasing, last G = 0.
  static GrowthLaw tabulated(std::vector<double> p, std::vector<double> G) {
    if (p.size() < 4 || p.size() != G.size()) throw std::invalid_argument("growth table needs >= 4 samples");
    if (p.front() != 0.0) throw std::invalid_argument("growth table must start at p = 0");
    if (!(G.front() > 0.0)) throw std::invalid_argument("growth table needs G(0) > 0");
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (!(p[i] > p[i - 1])) throw std::invalid_argument("growth table p must increase");
      if (!(G[i] < G[i - 1])) throw std::invalid_argument("growth table G must decrease");
    }
    if (G.back() != 0.0) throw std::invalid_argument("growth table must end with G(pM) = 0");
    GrowthLaw g;
    g.kind_ = Kind::tabulated;
    g.G0_ = G.front();
    g.pM_ = p.back();
    g.p0_ = p.front();
    g.p1_ = p.back();
    using Interp = boost::math::interpolators::pchip<std::vector<double>>;
    g.table_ = std::make_shared<Interp>(std::move(p), std::move(G));
    g.slope0_ = g.table_->prime(g.p0_);
    g.slope1_ = g.table_->prime(g.p1_);
    return g;
  }

  Kind kind() const { return kind_; }
  double G0() const { return G0_; }
  double pM() const { return pM_; }

  double operator()(double p) const {
    switch (kind_) {
      case Kind::constant: return G0_;
      case Kind::linear: return G0_ * (1.0 - p / pM_);
      case Kind::tabulated:
        if (p <= p0_) return (*table_)(p0_) + slope0_ * (p - p0_);
        if (p >= p1_) return slope1_ * (p - p1_);
        return (*table_)(p);
    }
    return 0.0;
  }

  double derivative(double p) const {
    switch (kind_) {
      case Kind::constant: return 0.0;
      case Kind::linear: return -G0_ / pM_;
      case Kind::tabulated:
        if (p <= p0_) return slope0_;
        if (p >= p1_) return slope1_;
        return table_->prime(p);
    }
    return 0.0;
  }

 private:
  Kind kind_ = Kind::linear;
  double G0_ = 1.0, pM_ = 1.0;
  double p0_ = 0.0, p1_ = 1.0, slope0_ = 0.0, slope1_ = 0.0;
  std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> table_;
};

// Cell-centred radial grid with faces at rho = 0, r and R. The cut-off bands around r and R
// get their own uniform spacing so the reference map is resolved.
struct RadialGrid {
  double r = 1.0, R = 2.0;
  std::vector<double> faces;    // n + 1 entries
  std::vector<double> centers;  // midpoints
  std::vector<double> widths;
  int n_in = 0;  // cells with center < r

  int size() const { return int(centers.size()); }
  double volume(int i) const { return centers[i] * widths[i]; }
};

inline RadialGrid make_radial_grid(double r, double R, double delta, int n) {
  if (n < 32) throw std::invalid_argument("radial grid needs at least 32 cells");
  const int nb = std::max(6, n / 16);
  const double a = r * (1.0 - 2.0 * delta), b = r * (1.0 + 2.0 * delta), c = R * (1.0 - 2.0 * delta);
  // the disc carries the source, so it is weighted double when sharing the remaining cells
  const double l0 = 2.0 * a, l3 = c - b;
  int rest = n - 3 * nb;
  int n0 = std::max(4, int(std::lround(rest * l0 / (l0 + l3))));
  n0 = std::min(n0, rest - 4);
  const int n3 = rest - n0;
  RadialGrid g;
  g.r = r;
  g.R = R;
  auto seg = [&](double lo, double hi, int m) {
    for (int i = 0; i < m; ++i) g.faces.push_back(lo + (hi - lo) * double(i) / double(m));
  };
  seg(0.0, a, n0);
  seg(a, r, nb);
  seg(r, b, nb);
  seg(b, c, n3);
  seg(c, R, nb);
  g.faces.push_back(R);
  g.faces[std::size_t(n0 + nb)] = r;
  for (int i = 0; i < n; ++i) {
    g.centers.push_back(0.5 * (g.faces[i] + g.faces[i + 1]));
    g.widths.push_back(g.faces[i + 1] - g.faces[i]);
  }
  g.n_in = n0 + nb;
  return g;
}

namespace detail {

// Two-point resistances for the radially symmetric operator, exact for the constant-source
// profile inside r and for the logarithmic profile in the annulus.
struct RadialStencil {
  std::vector<double> res_lo, res_hi;  // centre to lower / upper face, coefficient included
  std::vector<double> T0;              // face transmissibility, size n + 1 (T0[0] = 0)
  std::vector<double> w_lo;            // weight of the lower cell in the face value
  std::vector<double> a_eff;           // cross-term coefficient at the face
  std::vector<double> a;               // mobility per cell

  RadialStencil(const RadialGrid& g, double mu, double nu) {
    const int n = g.size();
    res_lo.resize(n);
    res_hi.resize(n);
    a.resize(n);
    for (int i = 0; i < n; ++i) {
      const double rc = g.centers[i], f0 = g.faces[i], f1 = g.faces[i + 1];
      if (i < g.n_in) {
        a[i] = mu;
        res_lo[i] = f0 > 0.0 ? (rc * rc - f0 * f0) / (2.0 * mu * f0 * f0) : 0.0;
        res_hi[i] = (f1 * f1 - rc * rc) / (2.0 * mu * f1 * f1);
      } else {
        a[i] = nu;
        res_lo[i] = std::log(rc / f0) / nu;
        res_hi[i] = std::log(f1 / rc) / nu;
      }
    }
    T0.assign(n + 1, 0.0);
    w_lo.assign(n + 1, 1.0);
    a_eff.assign(n + 1, 0.0);
    for (int f = 1; f < n; ++f) {
      const double rl = res_hi[f - 1], rr = res_lo[f];
      T0[f] = 1.0 / (rl + rr);
      w_lo[f] = rr / (rl + rr);
      a_eff[f] = (a[f - 1] * rl + a[f] * rr) / (rl + rr);
    }
    T0[n] = 1.0 / res_hi[n - 1];
    w_lo[n] = 0.0;
    a_eff[n] = a[n - 1];
  }
};

template <class T>
void thomas(const std::vector<double>& lo, const std::vector<double>& di, const std::vector<double>& up,
            std::vector<T>& x) {
  const std::size_t n = di.size();
  std::vector<double> c(n);
  double d = di[0];
  c[0] = up[0] / d;
  x[0] /= d;
  for (std::size_t i = 1; i < n; ++i) {
    d = di[i] - lo[i] * c[i - 1];
    c[i] = i + 1 < n ? up[i] / d : 0.0;
    x[i] = (x[i] - lo[i] * x[i - 1]) / d;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
}

}  // namespace detail

struct RadialPressure {
  RadialGrid grid;
  std::vector<double> rho_grid;  // cell centres
  std::vector<double> p_star;
  double p_at_r = 0.0;
  double c_star = 0.0;
  double c_star_tilde = 0.0;
  int iterations = 0;
};

inline RadialPressure solve_radial(const GrowthLaw& law, double mu, double nu, const RadialGrid& g,
                                   int max_iter = 200, double tol = 1e-14) {
  const int n = g.size();
  detail::RadialStencil st(g, mu, nu);
  std::vector<double> p(n, 0.0), lo(n), di(n), up(n);
  std::vector<double> hist;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = i > 0 ? -st.T0[i] : 0.0;
      up[i] = i + 1 < n ? -st.T0[i + 1] : 0.0;
      di[i] = st.T0[i] + st.T0[i + 1];
      rhs[i] = 0.0;
      if (i < g.n_in) {
        // shifted Picard: (A + kappa) p_new = G(p) + kappa p with kappa = -G'(p) >= 0
        const double kap = std::max(0.0, -law.derivative(p[i])) * g.volume(i);
        di[i] += kap;
        rhs[i] = g.volume(i) * law(p[i]) + kap * p[i];
      }
    }
    detail::thomas(lo, di, up, rhs);
    double diff = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(rhs[i] - p[i]));
      scale = std::max(scale, std::abs(rhs[i]));
    }
    p = std::move(rhs);
    hist.push_back(diff);
    if (!std::isfinite(diff)) break;
    if (diff <= tol * (1.0 + scale)) break;
  }
  if (it == max_iter || !std::isfinite(hist.back())) {
    std::ostringstream os;
    os << "radial pressure Picard iteration failed after " << hist.size()
       << " iterations, last update " << hist.back();
    throw SolverError(os.str(), hist);
  }
  RadialPressure out;
  out.grid = g;
  out.rho_grid = g.centers;
  out.p_star = p;
  out.iterations = int(hist.size());
  double prod = 0.0;
  for (int i = 0; i < g.n_in; ++i) prod += law(p[i]) * g.volume(i);
  out.c_star = -prod / g.r;
  out.c_star_tilde = (g.r / g.R) * out.c_star;
  const int L = g.n_in - 1;
  out.p_at_r = p[L] - prod * st.res_hi[L];
  return out;
}

inline RadialPressure solve_radial(const GrowthLaw& law, double mu, double nu, double r, double R,
                                   int n_rho) {
  if (!(r > 0.0 && R > r)) throw std::invalid_argument("solve_radial: need 0 < r < R");
  if (n_rho < 64) throw std::invalid_argument("solve_radial: need N_rho >= 64");
  return solve_radial(law, mu, nu, make_radial_grid(r, R, default_delta(r, R), n_rho));
}

struct ReferencePressure {
  RadialGrid grid;
  int n_omega = 0;
  double mu = 1.0, nu = 1.0;
  std::vector<double> p;   // n_rho x n_omega, row-major in rho
  std::vector<double> g0;  // G(p) inside r, zero outside
  std::vector<double> p_face_r;  // p at rho = r per omega node
  double c = 0.0, c_tilde = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;

  double at(int i, int j) const { return p[std::size_t(i) * n_omega + j]; }
  double source(int i, int j) const { return g0[std::size_t(i) * n_omega + j]; }
  double mode0(int i) const {
    double s = 0.0;
    for (int j = 0; j < n_omega; ++j) s += at(i, j);
    return s / n_omega;
  }
};

struct PressureOptions {
  int n_rho = 128;
  int n_omega = 64;
  double tol = 1e-10;
  int max_iter = 200;
};

namespace detail {

inline void row_derivative(const double* in, double* out, int n) {
  PeriodicField f(std::vector<double>(in, in + n));
  auto d = derivative(f);
  std::copy(d.samples().begin(), d.samples().end(), out);
}

// Geometric coefficients J, J*B of the pulled-back operator at faces and centres.
struct MapCoefficients {
  int nr = 0, nw = 0;
  std::vector<double> J_c, Btr_c, Btt_c;  // centres: J, J B_{theta r}, J B_{theta theta}
  std::vector<double> Brr_f, Brt_f;       // faces: J B_{rr}, J B_{r theta}

  MapCoefficients(const RadialGrid& g, const InterfacePair& pair, int n_omega) : nr(g.size()), nw(n_omega) {
    const PeriodicField hw(resample(pair.h, nw)), Hw(resample(pair.H, nw));
    const PeriodicField dh = derivative(hw), dH = derivative(Hw);
    J_c.resize(std::size_t(nr) * nw);
    Btr_c.resize(J_c.size());
    Btt_c.resize(J_c.size());
    Brr_f.assign(std::size_t(nr + 1) * nw, 1.0);
    Brt_f.assign(Brr_f.size(), 0.0);
    auto coeffs = [&](double rho, int j, double& J, double& Brr, double& Brt, double& Btt) {
      const DeviationValues d{hw[j], dh[j], Hw[j], dH[j]};
      const MapSample m = eval_map(pair.r, pair.R, pair.delta, rho, d);
      const Mat2 M = jacobian_inverse(m, rho);
      J = m.zeta * (m.zeta + m.rho_dzeta);
      Brr = J * (M[0][0] * M[0][0] + M[0][1] * M[0][1]);
      Brt = J * M[0][1] * M[1][1];
      Btt = J * M[1][1] * M[1][1];
    };
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nw; ++j) {
        double J, Brr, Brt, Btt;
        coeffs(g.centers[i], j, J, Brr, Brt, Btt);
        const std::size_t k = std::size_t(i) * nw + j;
        J_c[k] = J;
        Btr_c[k] = Brt;
        Btt_c[k] = Btt;
      }
    for (int f = 1; f <= nr; ++f)
      for (int j = 0; j < nw; ++j) {
        double J, Brr, Brt, Btt;
        coeffs(g.faces[f], j, J, Brr, Brt, Btt);
        Brr_f[std::size_t(f) * nw + j] = Brr;
        Brt_f[std::size_t(f) * nw + j] = Brt;
      }
  }
};

class ReferenceOperator {
 public:
  ReferenceOperator(const RadialGrid& g, const InterfacePair& pair, int n_omega, double mu, double nu)
      : g_(g), st_(g, mu, nu), mc_(g, pair, n_omega), nr_(g.size()), nw_(n_omega) {}

  const RadialGrid& grid() const { return g_; }
  const RadialStencil& stencil() const { return st_; }
  const MapCoefficients& coeffs() const { return mc_; }

  // Plain weighted face values, face 0 copies the first cell and face n is the Dirichlet wall.
  std::vector<double> face_values(const std::vector<double>& p) const {
    std::vector<double> pf(std::size_t(nr_ + 1) * nw_, 0.0);
    for (int j = 0; j < nw_; ++j) pf[j] = p[j];
    for (int f = 1; f < nr_; ++f)
      for (int j = 0; j < nw_; ++j)
        pf[std::size_t(f) * nw_ + j] = st_.w_lo[f] * p[std::size_t(f - 1) * nw_ + j] +
                                       (1.0 - st_.w_lo[f]) * p[std::size_t(f) * nw_ + j];
    return pf;
  }

  // A p: net outward flux per cell (per unit angle).
  std::vector<double> apply(const std::vector<double>& p) const {
    const std::vector<double> pf = face_values(p);
    std::vector<double> dpf(pf.size());
    for (int f = 0; f <= nr_; ++f) row_derivative(&pf[std::size_t(f) * nw_], &dpf[std::size_t(f) * nw_], nw_);
    std::vector<double> flux(std::size_t(nr_ + 1) * nw_, 0.0);
    for (int f = 1; f <= nr_; ++f)
      for (int j = 0; j < nw_; ++j) {
        const std::size_t k = std::size_t(f) * nw_ + j;
        const double pl = p[std::size_t(f - 1) * nw_ + j];
        const double pr = f < nr_ ? p[std::size_t(f) * nw_ + j] : 0.0;
        flux[k] = st_.T0[f] * mc_.Brr_f[k] * (pl - pr) - st_.a_eff[f] * mc_.Brt_f[k] * dpf[k];
      }
    std::vector<double> out(std::size_t(nr_) * nw_);
    std::vector<double> psi(nw_), dpsi(nw_), dp(nw_);
    for (int i = 0; i < nr_; ++i) {
      const double rho = g_.centers[i], w = g_.widths[i];
      row_derivative(&p[std::size_t(i) * nw_], dp.data(), nw_);
      for (int j = 0; j < nw_; ++j) {
        const std::size_t k = std::size_t(i) * nw_ + j;
        const double dr = (pf[std::size_t(i + 1) * nw_ + j] - pf[std::size_t(i) * nw_ + j]) / w;
        psi[j] = -st_.a[i] * (mc_.Btr_c[k] * dr + mc_.Btt_c[k] * dp[j] / rho);
      }
      row_derivative(psi.data(), dpsi.data(), nw_);
      for (int j = 0; j < nw_; ++j) {
        const std::size_t k = std::size_t(i) * nw_ + j;
        out[k] = flux[std::size_t(i + 1) * nw_ + j] - flux[std::size_t(i) * nw_ + j] + w * dpsi[j];
      }
    }
    return out;
  }

  // Face value at rho = r including the mobility-jump correction of the cross flux.
  std::vector<double> interface_values(const std::vector<double>& p) const {
    const int f = g_.n_in;
    const std::vector<double> pf = face_values(p);
    std::vector<double> dpf(nw_);
    row_derivative(&pf[std::size_t(f) * nw_], dpf.data(), nw_);
    std::vector<double> out(nw_);
    const double al = st_.a[f - 1], ar = st_.a[f];
    for (int j = 0; j < nw_; ++j) {
      const std::size_t k = std::size_t(f) * nw_ + j;
      const double cl = mc_.Brr_f[k] / st_.res_hi[f - 1], cr = mc_.Brr_f[k] / st_.res_lo[f];
      const double X = mc_.Brt_f[k] * dpf[j];
      out[j] = (cl * p[std::size_t(f - 1) * nw_ + j] + cr * p[std::size_t(f) * nw_ + j] + (ar - al) * X) / (cl + cr);
    }
    return out;
  }

 private:
  const RadialGrid& g_;
  RadialStencil st_;
  MapCoefficients mc_;
  int nr_, nw_;
};

// Matrix-free (A + diag(K)) for GMRES.
struct LinearizedOperator {
  const ReferenceOperator& op;
  const std::vector<double>& kdiag;

  Eigen::Index rows() const { return Eigen::Index(kdiag.size()); }
  Eigen::Index cols() const { return rows(); }
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    std::vector<double> v(x.data(), x.data() + x.size());
    std::vector<double> y = op.apply(v);
    Eigen::VectorXd out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) out[k] = y[std::size_t(k)] + kdiag[std::size_t(k)] * x[k];
    return out;
  }
};

// Per angular mode tridiagonal solve with angle-averaged coefficients.
struct ModePreconditioner {
  int nr, nw;
  const std::vector<std::vector<double>>& lo;
  const std::vector<std::vector<double>>& di;
  const std::vector<std::vector<double>>& up;

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    const int nk = nw / 2 + 1;
    std::vector<std::vector<cplx>> rhat(nk, std::vector<cplx>(nr));
    for (int i = 0; i < nr; ++i) {
      auto c = rfft(std::vector<double>(r.data() + std::ptrdiff_t(i) * nw, r.data() + std::ptrdiff_t(i + 1) * nw));
      for (int k = 0; k < nk; ++k) rhat[k][i] = c[k];
    }
    for (int k = 0; k < nk; ++k) thomas(lo[k], di[k], up[k], rhat[k]);
    Eigen::VectorXd out(r.size());
    for (int i = 0; i < nr; ++i) {
      std::vector<cplx> c(nk);
      for (int k = 0; k < nk; ++k) c[k] = rhat[k][i];
      const auto d = irfft(c, nw);
      for (int j = 0; j < nw; ++j) out[Eigen::Index(i) * nw + j] = d[j];
    }
    return out;
  }
};

}  // namespace detail

inline ReferencePressure solve_reference(const GrowthLaw& law, double mu, double nu, const InterfacePair& pair,
                                         const PressureOptions& opt) {
  if (opt.n_omega < 8 || opt.n_omega % 2) throw std::invalid_argument("solve_reference: N_omega must be even >= 8");
  const RadialGrid g = make_radial_grid(pair.r, pair.R, pair.delta, opt.n_rho);
  const int nr = g.size(), nw = opt.n_omega;
  const detail::ReferenceOperator op(g, pair, nw, mu, nu);
  const auto& mc = op.coeffs();
  const auto& st = op.stencil();

  const RadialPressure rad = solve_radial(law, mu, nu, g);
  std::vector<double> p(std::size_t(nr) * nw);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nw; ++j) p[std::size_t(i) * nw + j] = rad.p_star[i];

  // Mode-wise tridiagonal preconditioner built from angle-averaged coefficients.
  std::vector<double> Tbar(nr + 1, 0.0), att(nr, 0.0), kap(nr, 0.0);
  for (int f = 1; f <= nr; ++f) {
    double s = 0.0;
    for (int j = 0; j < nw; ++j) s += mc.Brr_f[std::size_t(f) * nw + j];
    Tbar[f] = st.T0[f] * s / nw;
  }
  for (int i = 0; i < nr; ++i) {
    double sj = 0.0, stt = 0.0;
    for (int j = 0; j < nw; ++j) {
      sj += mc.J_c[std::size_t(i) * nw + j];
      stt += mc.Btt_c[std::size_t(i) * nw + j];
    }
    att[i] = st.a[i] * stt / nw;
    if (i < g.n_in) kap[i] = std::max(0.0, -law.derivative(rad.p_star[i])) * sj / nw * g.volume(i);
  }
  const int nk = nw / 2 + 1;
  std::vector<std::vector<double>> lo(nk), di(nk), up(nk);
  for (int k = 0; k < nk; ++k) {
    lo[k].resize(nr);
    di[k].resize(nr);
    up[k].resize(nr);
    for (int i = 0; i < nr; ++i) {
      lo[k][i] = i > 0 ? -Tbar[i] : 0.0;
      up[k][i] = i + 1 < nr ? -Tbar[i + 1] : 0.0;
      di[k][i] = Tbar[i] + Tbar[i + 1] + g.widths[i] * double(k * k) * att[i] / g.centers[i] + kap[i];
    }
  }

  auto residual = [&](const std::vector<double>& q, double& norm) {
    std::vector<double> res = op.apply(q);
    norm = 0.0;
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nw; ++j) {
        const std::size_t k = std::size_t(i) * nw + j;
        const double src = i < g.n_in ? g.volume(i) * mc.J_c[k] * law(q[k]) : 0.0;
        res[k] = src - res[k];
        norm += res[k] * res[k] / g.volume(i);
      }
    norm = std::sqrt(norm * two_pi / nw);
    return res;
  };

  // Newton steps (A + K) dp = res with K = -vol J G'(p), solved by GMRES with the
  // mode-wise preconditioner.
  const std::size_t n_all = std::size_t(nr) * nw;
  std::vector<double> kdiag(n_all, 0.0);
  detail::LinearizedOperator lin{op, kdiag};
  detail::ModePreconditioner pre{nr, nw, lo, di, up};

  std::vector<double> hist;
  double norm = 0.0;
  std::vector<double> res = residual(p, norm);
  hist.push_back(norm);
  int it = 0;
  while (norm > opt.tol) {
    if (it >= opt.max_iter) {
      std::ostringstream os;
      os << "reference pressure did not converge in " << it << " iterations, residual " << norm;
      throw SolverError(os.str(), hist);
    }
    if (!std::isfinite(norm) || norm > 1e6 * (hist.front() + 1e-300)) {
      std::ostringstream os;
      os << "reference pressure iteration diverged at iteration " << it << ", residual " << norm;
      throw SolverError(os.str(), hist);
    }
    for (int i = 0; i < g.n_in; ++i)
      for (int j = 0; j < nw; ++j) {
        const std::size_t k = std::size_t(i) * nw + j;
        kdiag[k] = std::max(0.0, -law.derivative(p[k])) * g.volume(i) * mc.J_c[k];
      }
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(res.data(), Eigen::Index(n_all));
    Eigen::VectorXd x = pre.solve(b);
    Eigen::Index iters = 400;
    double tol = 1e-3 * opt.tol / (norm + 1e-300);
    tol = std::clamp(tol, 1e-14, 1e-2);
    Eigen::internal::gmres(lin, b, x, pre, iters, Eigen::Index(60), tol);
    for (std::size_t k = 0; k < n_all; ++k) p[k] += x[Eigen::Index(k)];
    res = residual(p, norm);
    hist.push_back(norm);
    ++it;
  }

  ReferencePressure out;
  out.grid = g;
  out.n_omega = nw;
  out.mu = mu;
  out.nu = nu;
  out.p = p;
  out.g0.assign(p.size(), 0.0);
  double prod = 0.0;
  for (int i = 0; i < g.n_in; ++i)
    for (int j = 0; j < nw; ++j) {
      const std::size_t k = std::size_t(i) * nw + j;
      out.g0[k] = law(p[k]);
      prod += out.g0[k] * g.volume(i);
    }
  prod *= two_pi / nw;
  out.c = -prod / (two_pi * g.r);
  out.c_tilde = (g.r / g.R) * out.c;
  out.p_face_r = op.interface_values(p);
  out.iterations = it;
  out.residual_history = hist;
  return out;
}

struct BoundaryGradients {
  PeriodicField inner_r, inner_theta;  // at rho = r from inside, on the omega grid
  PeriodicField outer_r, outer_theta;  // at rho = R
};

inline BoundaryGradients boundary_gradients(const ReferencePressure& p) {
  const auto& g = p.grid;
  const int nw = p.n_omega, L = g.n_in - 1, n = g.size();
  BoundaryGradients bg{PeriodicField(std::size_t(nw)), PeriodicField(std::size_t(nw)),
                       PeriodicField(std::size_t(nw)), PeriodicField(std::size_t(nw))};
  // quadratic through the last three cell centres inside r, differentiated at r
  const double x0 = g.centers[L - 2], x1 = g.centers[L - 1], x2 = g.centers[L], xe = g.r;
  const double c0 = ((xe - x1) + (xe - x2)) / ((x0 - x1) * (x0 - x2));
  const double c1 = ((xe - x0) + (xe - x2)) / ((x1 - x0) * (x1 - x2));
  const double c2 = ((xe - x0) + (xe - x1)) / ((x2 - x0) * (x2 - x1));
  // quadratic in ln(rho) through the last two cells and the wall value 0
  const double s0 = std::log(g.centers[n - 2]), s1 = std::log(g.centers[n - 1]), s2 = std::log(g.R);
  const double d0 = (s2 - s1) / ((s0 - s1) * (s0 - s2));
  const double d1 = (s2 - s0) / ((s1 - s0) * (s1 - s2));
  PeriodicField pr(p.p_face_r);
  const PeriodicField dpr = derivative(pr);
  for (int j = 0; j < nw; ++j) {
    bg.inner_r[j] = c0 * p.at(L - 2, j) + c1 * p.at(L - 1, j) + c2 * p.at(L, j);
    bg.inner_theta[j] = dpr[j] / g.r;
    bg.outer_r[j] = (d0 * p.at(n - 2, j) + d1 * p.at(n - 1, j)) / g.R;
    bg.outer_theta[j] = 0.0;
  }
  return bg;
}

}  // namespace contour
