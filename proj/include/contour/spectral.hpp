#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace contour {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Half spectrum c_0..c_{N/2} of a real signal, scaled so c_0 is the mean.
inline std::vector<cplx> rfft(const std::vector<double>& x) {
  thread_local Eigen::FFT<double> fft;
  const std::size_t n = x.size();
  std::vector<cplx> full;
  fft.fwd(full, x);
  std::vector<cplx> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] = full[k] / double(n);
  return out;
}

// Inverse of rfft for a target length n (n even, c.size() == n/2+1).
inline std::vector<double> irfft(const std::vector<cplx>& c, std::size_t n) {
  thread_local Eigen::FFT<double> fft;
  std::vector<cplx> full(n);
  const std::size_t h = n / 2;
  for (std::size_t k = 0; k <= h && k < c.size(); ++k) full[k] = c[k] * double(n);
  full[h] = cplx(full[h].real(), 0.0);
  for (std::size_t k = 1; k < h; ++k) full[n - k] = std::conj(full[k]);
  std::vector<cplx> tmp;
  fft.inv(tmp, full);
  std::vector<double> out(n);
  // Eigen's inverse already divides by n.
  for (std::size_t j = 0; j < n; ++j) out[j] = tmp[j].real();
  return out;
}

class PeriodicField {
 public:
  PeriodicField() = default;
  explicit PeriodicField(std::size_t n, double value = 0.0) : v_(n, value) { check(); }
  explicit PeriodicField(std::vector<double> samples) : v_(std::move(samples)) { check(); }

  template <class Fn>
  static PeriodicField from_function(std::size_t n, Fn&& fn) {
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = fn(node(n, j));
    return PeriodicField(std::move(s));
  }
  static PeriodicField from_coeffs(const std::vector<cplx>& c, std::size_t n) {
    return PeriodicField(irfft(c, n));
  }

  static double node(std::size_t n, std::size_t j) { return two_pi * double(j) / double(n); }

  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t j) const { return v_[j]; }
  double& operator[](std::size_t j) { return v_[j]; }
  const std::vector<double>& samples() const { return v_; }
  std::vector<double>& samples() { return v_; }
  double theta(std::size_t j) const { return node(v_.size(), j); }

  std::vector<cplx> coeffs() const { return rfft(v_); }

  double mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / double(v_.size());
  }
  double sup_norm() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double max() const {
    double m = v_[0];
    for (double x : v_) m = std::max(m, x);
    return m;
  }
  double min() const {
    double m = v_[0];
    for (double x : v_) m = std::min(m, x);
    return m;
  }

  PeriodicField& operator+=(const PeriodicField& o) { for (std::size_t j = 0; j < size(); ++j) v_[j] += o.v_[j]; return *this; }
  PeriodicField& operator-=(const PeriodicField& o) { for (std::size_t j = 0; j < size(); ++j) v_[j] -= o.v_[j]; return *this; }
  PeriodicField& operator*=(const PeriodicField& o) { for (std::size_t j = 0; j < size(); ++j) v_[j] *= o.v_[j]; return *this; }
  PeriodicField& operator+=(double a) { for (double& x : v_) x += a; return *this; }
  PeriodicField& operator*=(double a) { for (double& x : v_) x *= a; return *this; }

  friend PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
  friend PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
  friend PeriodicField operator*(PeriodicField a, const PeriodicField& b) { return a *= b; }
  friend PeriodicField operator*(double s, PeriodicField a) { return a *= s; }
  friend PeriodicField operator*(PeriodicField a, double s) { return a *= s; }
  friend PeriodicField operator+(PeriodicField a, double s) { return a += s; }
  friend PeriodicField operator-(PeriodicField a, double s) { return a += -s; }
  friend PeriodicField operator-(PeriodicField a) { return a *= -1.0; }

 private:
  void check() const {
    if (v_.size() < 8 || v_.size() % 2 != 0)
      throw std::invalid_argument("PeriodicField: N must be even and >= 8");
  }
  std::vector<double> v_;
};

// Apply a Fourier multiplier m(k), k >= 0; the value for -k is the conjugate.
template <class Mult>
PeriodicField apply_multiplier(const PeriodicField& f, Mult&& m, bool zero_nyquist) {
  auto c = f.coeffs();
  const std::size_t h = f.size() / 2;
  for (std::size_t k = 0; k <= h; ++k) c[k] *= m(int(k));
  if (zero_nyquist) c[h] = 0.0;
  return PeriodicField::from_coeffs(c, f.size());
}

inline PeriodicField derivative(const PeriodicField& f) {
  return apply_multiplier(f, [](int k) { return cplx(0.0, double(k)); }, true);
}

inline PeriodicField hilbert(const PeriodicField& f) {
  return apply_multiplier(f, [](int k) { return k == 0 ? cplx(0.0) : cplx(0.0, -1.0); }, true);
}

inline PeriodicField frac_laplacian_half(const PeriodicField& f) {
  return apply_multiplier(f, [](int k) { return cplx(double(k)); }, false);
}

inline PeriodicField poisson_smooth(const PeriodicField& f, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("poisson_smooth: need 0 <= s < 1");
  return apply_multiplier(f, [s](int k) { return cplx(k == 0 ? 1.0 : std::pow(s, k)); }, false);
}

inline PeriodicField poisson_semigroup(const PeriodicField& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("poisson_semigroup: need t >= 0");
  return apply_multiplier(f, [t](int k) { return cplx(std::exp(-t * double(k))); }, false);
}

// 2/3-rule truncation: modes |k| > N/3 are dropped.
inline PeriodicField dealias(const PeriodicField& f) {
  const int kmax = int(f.size()) / 3;
  return apply_multiplier(f, [kmax](int k) { return cplx(k <= kmax ? 1.0 : 0.0); }, true);
}

inline PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b) {
  return dealias(a * b);
}

// Samples of f at theta_j + a for every node j.
inline PeriodicField shift(const PeriodicField& f, double a) {
  const std::size_t n = f.size();
  auto c = f.coeffs();
  for (std::size_t k = 0; k <= n / 2; ++k) c[k] *= std::polar(1.0, double(k) * a);
  // The Nyquist mode cannot be shifted exactly in a real representation.
  c[n / 2] = cplx(c[n / 2].real() * std::cos(double(n / 2) * a), 0.0);
  return PeriodicField::from_coeffs(c, n);
}

// Trigonometric interpolation onto m uniform nodes (m even).
inline std::vector<double> resample(const PeriodicField& f, std::size_t m) {
  auto c = f.coeffs();
  const std::size_t n = f.size();
  std::vector<cplx> d(m / 2 + 1, cplx(0.0));
  const std::size_t kmax = std::min(n / 2, m / 2);
  for (std::size_t k = 0; k <= kmax; ++k) d[k] = c[k];
  // Split the source Nyquist mode when upsampling so the result stays real and symmetric.
  if (m > n) d[n / 2] *= 0.5;
  if (m < n) d[m / 2] = cplx(d[m / 2].real(), 0.0);
  return irfft(d, m);
}

// Amplitude |f_k| of the cos/sin pair at wavenumber k (2|c_k| for 0 < k < N/2).
inline double mode_amplitude(const PeriodicField& f, int k) {
  auto c = f.coeffs();
  if (k == 0) return std::abs(c[0]);
  if (std::size_t(k) == f.size() / 2) return std::abs(c[k]);
  return 2.0 * std::abs(c[std::size_t(k)]);
}

inline double eval_at(const PeriodicField& f, double theta) {
  auto c = f.coeffs();
  const std::size_t h = f.size() / 2;
  double s = c[0].real();
  for (std::size_t k = 1; k < h; ++k) s += 2.0 * (c[k] * std::polar(1.0, double(k) * theta)).real();
  s += c[h].real() * std::cos(double(h) * theta);
  return s;
}

}  // namespace contour
