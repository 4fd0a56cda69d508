#pragma once

#include <cmath>
#include <stdexcept>

namespace contour {

struct KernelPoint {
  double s;
  double xi;
};

struct PQ { double P, Q; };
struct KJ { double K, J; };
struct PQDerivs { double dP_ds, dP_dxi, dQ_ds, dQ_dxi; };

class SingularKernelPoint : public std::domain_error {
 public:
  SingularKernelPoint() : std::domain_error("kernel evaluated at (s, xi) = (1, 0)") {}
};

namespace detail {
// 1 + s^2 - 2 s cos(xi) in a cancellation-free form
inline double kernel_denominator(double s, double xi) {
  const double sh = std::sin(0.5 * xi);
  return (1.0 - s) * (1.0 - s) + 4.0 * s * sh * sh;
}
inline double checked_denominator(double s, double xi) {
  const double d = detail::kernel_denominator(s, xi);
  if (d <= 0.0) throw SingularKernelPoint();
  return d;
}
}  // namespace detail

inline PQ eval_poisson(KernelPoint pt) {
  const double d = detail::checked_denominator(pt.s, pt.xi);
  return {(1.0 - pt.s * pt.s) / d, 2.0 * pt.s * std::sin(pt.xi) / d};
}

inline KJ eval_kj(KernelPoint pt) {
  const auto [P, Q] = eval_poisson(pt);
  return {pt.s * Q, -pt.s * (1.0 + P)};
}

inline PQDerivs eval_poisson_derivs(KernelPoint pt) {
  const double s = pt.s, xi = pt.xi;
  const double d = detail::checked_denominator(s, xi);
  const double c = std::cos(xi), sn = std::sin(xi);
  const double dP_ds = 2.0 * c / d - 4.0 * s * sn * sn / (d * d);
  const double dQ_ds = 2.0 * (1.0 - s * s) * sn / (d * d);
  return {dP_ds, -s * dQ_ds, dQ_ds, s * dP_ds};
}

// dJ/ds = -(1+P) - s dP/ds
inline double eval_dJ_ds(KernelPoint pt) {
  const auto [P, Q] = eval_poisson(pt);
  return -(1.0 + P) - pt.s * eval_poisson_derivs(pt).dP_ds;
}

}  // namespace contour
