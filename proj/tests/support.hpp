#pragma once
// Shared generators and oracles for the test suites.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "realize/linalg.hpp"
#include "realize/realization.hpp"
#include "realize/wavelet.hpp"

namespace testing_support {

using realize::Complex;
using realize::Matrix;
using realize::Realization;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Complex complex() { return {normal(), normal()}; }
  double normal() { return std::normal_distribution<double>()(rng_); }

  Matrix matrix(std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = complex();
    return m;
  }

  /// Random d x d matrix rescaled so that its spectral radius is `radius`.
  Matrix contractive(std::size_t d, double radius) {
    Matrix a = matrix(d, d);
    const double rho = realize::spectral_radius(a);
    if (rho > 0) a *= radius / rho;
    return a;
  }

  /// Random realization with state dimension d, rho(A) in [0.1, 0.85].
  Realization realization(std::size_t d, std::size_t p, std::size_t q) {
    const Matrix a = contractive(d, uniform(0.1, 0.85));
    return Realization(a, matrix(d, q), matrix(p, d), matrix(p, q));
  }

  /// Point in the annulus 1.2 <= |z| <= 3, safely away from every pole of a contractive realization.
  Complex outer_point() { return std::polar(uniform(1.2, 3.0), uniform(-std::numbers::pi, std::numbers::pi)); }

  Complex circle_point() { return std::polar(1.0, uniform(-std::numbers::pi, std::numbers::pi)); }

  /// Random unitary n x n matrix.
  Matrix unitary(std::size_t n) { return realize::orthonormal_basis(matrix(n, n), 1e-12); }

  /// Random orthogonal projection of rank r in dimension n.
  Matrix projection(std::size_t n, std::size_t r) {
    const Matrix v = realize::orthonormal_basis(matrix(n, r), 1e-12);
    return v * v.adjoint();
  }

  /// Random Blaschke-Potapov product with `factors` factors and poles |a| <= 0.9.
  realize::RationalInner inner(std::size_t n, std::size_t factors) {
    std::vector<realize::InnerFactor> fs;
    for (std::size_t k = 0; k < factors; ++k) {
      const auto rank = static_cast<std::size_t>(integer(1, static_cast<int>(n)));
      fs.push_back({std::polar(uniform(0.0, 0.9), uniform(-std::numbers::pi, std::numbers::pi)), projection(n, rank)});
    }
    return realize::RationalInner(n, std::move(fs), unitary(n));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_diff(const Matrix& a, const Matrix& b) { return realize::max_abs(a - b); }

/// Fourier coefficients of |m(e^{i theta})|^2 from `samples` equally spaced points,
/// c_n = (1/S) sum_s |m(e^{i theta_s})|^2 e^{+i n theta_s}, which pairs with
/// c_n = sum_j conj(h_j) h_{j+n}.
inline Complex fft_coefficient(const std::vector<double>& power, int n) {
  const std::size_t s = power.size();
  Complex acc{};
  for (std::size_t k = 0; k < s; ++k)
    acc += power[k] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(n) * k / s);
  return acc / static_cast<double>(s);
}

inline std::vector<double> power_samples(const Realization& m, std::size_t samples) {
  std::vector<double> out(samples);
  for (std::size_t k = 0; k < samples; ++k)
    out[k] = std::norm(realize::eval_scalar(m, std::polar(1.0, 2.0 * std::numbers::pi * k / samples)));
  return out;
}

/// Haar symbol (1 + z^{-1}) / 2 evaluated directly.
inline Complex haar_poly(Complex z) { return (1.0 + 1.0 / z) / 2.0; }

/// Haar scaling function transform e^{-i pi w} sin(pi w) / (pi w).
inline Complex haar_father(double w) {
  if (w == 0.0) return 1.0;
  const double x = std::numbers::pi * w;
  return std::polar(1.0, -x) * (std::sin(x) / x);
}

}  // namespace testing_support
