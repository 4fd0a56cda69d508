#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "growth_potential.hpp"
#include "layer_ops.hpp"
#include "pressure.hpp"
#include "spectral.hpp"

namespace contour {

struct BoundaryDensities {
  PeriodicField jump_prime;   // [phi]'
  PeriodicField outer_prime;  // phi'
  int iterations = 0;
  double contraction = 0.0;  // last measured ratio of successive updates
  std::vector<double> update_history;
};

struct DensityOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double damping = 0.8;
};

inline double mobility_contrast(double mu, double nu) { return (mu - nu) / (mu + nu); }

// Per-mode closed form of [phi]' = 2 A c_* f' + A S phi', phi' = -2 c~_* F' + S [phi]'.
inline std::array<cplx, 2> linearized_densities(int k, double A, double c_star, double c_tilde_star, double r,
                                                double R, cplx f_k, cplx F_k) {
  if (k < 1) throw std::invalid_argument("linearized_densities: need k >= 1");
  const double s = std::pow(r / R, k);
  const cplx ik(0.0, double(k));
  const cplx a = 2.0 * A * c_star * ik * f_k, b = -2.0 * c_tilde_star * ik * F_k;
  const cplx jump = (a + A * s * b) / (1.0 - A * s * s);
  return {jump, b + s * jump};
}

namespace detail {

inline PeriodicField zero_mean(PeriodicField f) { return f += -f.mean(); }

inline PeriodicField linearized_field(const InterfacePair& pair, double A, double c, double ct, bool jump) {
  const auto fk = pair.f().coeffs(), Fk = pair.F().coeffs();
  const std::size_t n = pair.n();
  std::vector<cplx> out(n / 2 + 1, cplx(0.0));
  for (std::size_t k = 1; k < n / 2; ++k) {
    const auto d = linearized_densities(int(k), A, c, ct, pair.r, pair.R, fk[k], Fk[k]);
    out[k] = jump ? d[0] : d[1];
  }
  return PeriodicField::from_coeffs(out, n);
}

struct DensityMap {
  const InterfacePair& pair;
  const GradComponents& gi;
  const GradComponents& go;
  double A;
  PeriodicField T1, T2;

  DensityMap(const InterfacePair& p, const GradComponents& inner, const GradComponents& outer, double A_)
      : pair(p), gi(inner), go(outer), A(A_) {
    const PeriodicField f = p.f(), F = p.F();
    T1 = derivative(f) * gi.radial + f * gi.tangential;
    T2 = derivative(F) * go.radial + F * go.tangential;
  }

  // Right-hand sides of the two static equations at (J, P) = ([phi]', phi').
  std::array<PeriodicField, 2> operator()(const PeriodicField& J, const PeriodicField& P) const {
    const auto io = to_pairings(Curve::inner, pair, interaction_inner_from_outer(pair, P));
    const auto oi = to_pairings(Curve::outer, pair, interaction_outer_from_inner(pair, J));
    PeriodicField Jn = 2.0 * A * (T1 + singular_normal(Curve::inner, pair, J) + io.normal);
    PeriodicField Pn = -2.0 * (T2 + singular_normal(Curve::outer, pair, P) + oi.normal);
    return {Jn, Pn};
  }
};

}  // namespace detail

// Damped Picard iteration for ([phi]', phi') with mean-zero projection each sweep.
inline BoundaryDensities solve_densities(const InterfacePair& pair, const GradComponents& gi,
                                         const GradComponents& go, double A, const DensityOptions& opt = {}) {
  if (!(std::abs(A) < 1.0)) throw std::invalid_argument("solve_densities: need |A| < 1");
  const detail::DensityMap map(pair, gi, go, A);
  const double c = gi.radial.mean(), ct = go.radial.mean();
  BoundaryDensities d;
  d.jump_prime = detail::linearized_field(pair, A, c, ct, true);
  d.outer_prime = detail::linearized_field(pair, A, c, ct, false);
  int rising = 0;
  double prev = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    auto [Jn, Pn] = map(d.jump_prime, d.outer_prime);
    const PeriodicField dJ = detail::zero_mean(Jn) - d.jump_prime, dP = detail::zero_mean(Pn) - d.outer_prime;
    const double upd = std::max(dJ.sup_norm(), dP.sup_norm());
    d.jump_prime += opt.damping * dJ;
    d.outer_prime += opt.damping * dP;
    d.update_history.push_back(upd);
    d.iterations = it + 1;
    if (it > 0 && prev > 0.0) d.contraction = upd / prev;
    if (upd <= opt.tol) return d;
    rising = (it > 0 && upd > prev) ? rising + 1 : 0;
    prev = upd;
    if (rising >= 5) {
      std::ostringstream os;
      os << "density iteration is not contracting (factor " << d.contraction << " after " << d.iterations
         << " sweeps)";
      throw SolverError(os.str(), d.update_history);
    }
  }
  std::ostringstream os;
  os << "density iteration did not converge in " << opt.max_iter << " sweeps, last update " << prev;
  throw SolverError(os.str(), d.update_history);
}

struct StaticRemainders {
  PeriodicField jump, outer;  // R_[phi]', R_phi'
};

// Remainders built term by term from the gradient deviations and operator corrections.
inline StaticRemainders static_remainders(const InterfacePair& pair, const GradComponents& gi,
                                          const GradComponents& go, const BoundaryDensities& d, double A,
                                          double c_star, double c_tilde_star) {
  const PeriodicField f = pair.f(), F = pair.F();
  const double s = pair.r / pair.R;
  const auto io = to_pairings(Curve::inner, pair, interaction_inner_from_outer(pair, d.outer_prime));
  const auto oi = to_pairings(Curve::outer, pair, interaction_outer_from_inner(pair, d.jump_prime));
  StaticRemainders out;
  out.jump = 2.0 * A *
             (derivative(f) * (gi.radial - c_star) + f * gi.tangential +
              singular_normal(Curve::inner, pair, d.jump_prime) + io.normal -
              0.5 * poisson_smooth(d.outer_prime, s));
  out.outer = -2.0 * (derivative(F) * (go.radial - c_tilde_star) + F * go.tangential +
                      singular_normal(Curve::outer, pair, d.outer_prime) + oi.normal +
                      0.5 * poisson_smooth(d.jump_prime, s));
  return out;
}

}  // namespace contour
