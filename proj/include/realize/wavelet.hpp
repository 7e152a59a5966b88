#pragma once
//
// Rational wavelet filters M(z) = Q U(z^N) Delta(z) V with U a rational
// inner function built from Blaschke-Potapov factors, and the low-pass
// symbol m read off the first polyphase row.
//

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "realize/linalg.hpp"
#include "realize/realization.hpp"
#include "realize/ruelle.hpp"

namespace realize {

class ConventionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// unit_dc: m(1) = 1. paper_polyphase: m is the raw first polyphase row, m(1) = sqrt(N).
enum class Convention { unit_dc, paper_polyphase };

inline std::optional<Convention> parse_convention(std::string_view s) {
  if (s == "unit-dc") return Convention::unit_dc;
  if (s == "paper-polyphase") return Convention::paper_polyphase;
  return std::nullopt;
}

inline std::string to_string(Convention c) {
  return c == Convention::unit_dc ? "unit-dc" : "paper-polyphase";
}

/// Value of R1 that the low-pass symbol of a wavelet filter produces.
inline double r1_target(Convention c, int n) {
  return c == Convention::unit_dc ? 1.0 / n : 1.0;
}

/// V = (1/sqrt(N)) (eps^{-l j}), eps = e^{2 pi i / N}.
inline Matrix dft_matrix(std::size_t n) {
  if (n == 0) throw std::invalid_argument("dft_matrix: N must be positive");
  Matrix v(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      v(l, j) = std::polar(s, -2.0 * std::numbers::pi * static_cast<double>((l * j) % n) / n);
  return v;
}

/// diag(1, z^{-1}, ..., z^{-(N-1)}).
inline Matrix delta_eval(std::size_t n, Complex z) {
  if (z == Complex{}) throw std::invalid_argument("delta_eval: z must be nonzero");
  Matrix d(n, n);
  Complex p = 1.0;
  const Complex zi = 1.0 / z;
  for (std::size_t j = 0; j < n; ++j, p *= zi) d(j, j) = p;
  return d;
}

struct InnerFactor {
  Complex pole;
  Matrix projection;
};

inline constexpr double kMaxPoleRadius = 0.98;

/// U(z) = L E_1(z) E_2(z) ... with E_k(z) = I - P_k + b_k(z) P_k and
/// b_k(z) = g_k (1 - conj(a_k) z) / (z - a_k), g_k = (1 - a_k) / (1 - conj(a_k)),
/// so that every E_k(1) = I and U(1) = L.
class RationalInner {
 public:
  RationalInner(std::size_t n, std::vector<InnerFactor> factors, Matrix left_constant,
                double max_radius = kMaxPoleRadius)
      : n_(n), factors_(std::move(factors)), left_(std::move(left_constant)) {
    if (n_ == 0) throw std::invalid_argument("RationalInner: size must be positive");
    if (left_.rows() != n_ || left_.cols() != n_)
      throw DimensionError("RationalInner: left constant must be N x N");
    for (const auto& f : factors_) {
      if (!(std::abs(f.pole) < 1.0)) throw std::domain_error("RationalInner: pole must satisfy |a| < 1");
      if (!(std::abs(f.pole) < max_radius))
        throw std::domain_error("RationalInner: pole radius exceeds the configured limit");
      const Matrix& p = f.projection;
      if (p.rows() != n_ || p.cols() != n_) throw DimensionError("RationalInner: projection must be N x N");
      const double scale = std::max(1.0, frobenius_norm(p));
      if (frobenius_norm(p * p - p) > 1e-10 * scale || frobenius_norm(p.adjoint() - p) > 1e-10 * scale)
        throw std::invalid_argument("RationalInner: factor matrix is not an orthogonal projection");
    }
  }

  /// Identity: U == I.
  static RationalInner identity(std::size_t n) { return RationalInner(n, {}, Matrix::identity(n)); }

  std::size_t size() const noexcept { return n_; }
  const std::vector<InnerFactor>& factors() const noexcept { return factors_; }
  const Matrix& left_constant() const noexcept { return left_; }

 private:
  std::size_t n_;
  std::vector<InnerFactor> factors_;
  Matrix left_;
};

/// E(z) = I - P + b(z) P as a realization with rank(P) states:
/// A = a I, B = s V*, C = g s V, D = I - P - g conj(a) P, s = sqrt(1 - |a|^2),
/// where V is an orthonormal basis of range P.
inline Realization blaschke_potapov_factor(const InnerFactor& f) {
  const std::size_t n = f.projection.rows();
  const Matrix v = orthonormal_basis(f.projection, 1e-10);
  if (v.cols() == 0) return Realization::constant(Matrix::identity(n));
  const Complex a = f.pole;
  const Complex g = (1.0 - a) / (1.0 - std::conj(a));
  const double s = std::sqrt(1.0 - std::norm(a));
  const Matrix p = v * v.adjoint();
  return Realization(Matrix::identity(v.cols()) * a, v.adjoint() * s, v * (g * s),
                     Matrix::identity(n) - p - p * (g * std::conj(a)));
}

inline Realization assemble_inner(const RationalInner& u) {
  Realization r = Realization::constant(u.left_constant());
  for (const auto& f : u.factors()) r = product(r, blaschke_potapov_factor(f));
  return r;
}

namespace detail {

/// (1, z^{-1}, ..., z^{-(N-1)})^T: a lower shift register with N - 1 states.
inline Realization delay_column(std::size_t n) {
  if (n == 1) return Realization::constant(Matrix::identity(1));
  const std::size_t d = n - 1;
  Matrix a(d, d), b(d, 1), c(n, d), dd(n, 1);
  for (std::size_t i = 0; i + 1 < d; ++i) a(i + 1, i) = 1.0;
  b(0, 0) = 1.0;
  for (std::size_t j = 1; j < n; ++j) c(j, j - 1) = 1.0;
  dd(0, 0) = 1.0;
  return Realization(a, b, c, dd);
}

/// diag(1, z^{-1}, ..., z^{-(N-1)}) with N(N-1)/2 states, one shift chain per entry.
inline Realization delta_realization(std::size_t n) {
  const std::size_t d = n * (n - 1) / 2;
  Matrix a(d, d), b(d, n), c(n, d), dd(n, n);
  dd(0, 0) = 1.0;
  std::size_t base = 0;
  for (std::size_t j = 1; j < n; ++j) {
    // z^{-j}: j states, input enters the first, output leaves the last
    for (std::size_t i = 0; i + 1 < j; ++i) a(base + i + 1, base + i) = 1.0;
    b(base, j) = 1.0;
    c(j, base + j - 1) = 1.0;
    base += j;
  }
  return Realization(a, b, c, dd);
}

}  // namespace detail

class WaveletFilter {
 public:
  WaveletFilter(Realization u, Matrix q) : u_(std::move(u)), q_(std::move(q)), v_(dft_matrix(u_.output_dim())) {
    if (u_.output_dim() != u_.input_dim()) throw DimensionError("WaveletFilter: U must be square");
    if (q_.rows() != bands() || q_.cols() != bands()) throw DimensionError("WaveletFilter: Q must be N x N");
  }

  std::size_t bands() const noexcept { return u_.output_dim(); }
  const Realization& inner() const noexcept { return u_; }
  const Matrix& q() const noexcept { return q_; }
  const Matrix& dft() const noexcept { return v_; }

  Matrix eval(Complex z) const {
    return q_ * realize::eval(u_, ipow(z)) * delta_eval(bands(), z) * v_;
  }

  /// (m_0(z), ..., m_{N-1}(z)) = Q U(z^N) (1, z^{-1}, ..., z^{-(N-1)})^T.
  std::vector<Complex> polyphase_column(Complex z) const {
    if (z == Complex{}) throw std::invalid_argument("polyphase_column: z must be nonzero");
    const std::size_t n = bands();
    Matrix delays(n, 1);
    Complex p = 1.0;
    for (std::size_t j = 0; j < n; ++j, p /= z) delays(j, 0) = p;
    const Matrix col = q_ * realize::eval(u_, ipow(z)) * delays;
    std::vector<Complex> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = col(j, 0);
    return out;
  }

  /// Realization of the column (m_0, ..., m_{N-1})^T.
  Realization polyphase_realization() const {
    return product(product(Realization::constant(q_), compose_power(u_, bands())),
                   detail::delay_column(bands()));
  }

  /// Realization of M(z).
  Realization realization() const {
    return product(product(product(Realization::constant(q_), compose_power(u_, bands())),
                           detail::delta_realization(bands())),
                   Realization::constant(v_));
  }

 private:
  // z^N by repeated multiplication, exact for roots of unity up to rounding
  Complex ipow(Complex z) const {
    Complex p = 1.0;
    for (std::size_t j = 0; j < bands(); ++j) p *= z;
    return p;
  }

  Realization u_;
  Matrix q_;
  Matrix v_;
};

/// Q = (U(1) V)*, which forces M(1) = I.
inline WaveletFilter build_filter(const Realization& u) {
  if (u.output_dim() != u.input_dim() || u.output_dim() == 0)
    throw DimensionError("build_filter: U must be square");
  const Matrix u1 = eval(u, 1.0);
  const Matrix q = (u1 * dft_matrix(u.output_dim())).adjoint();
  return WaveletFilter(u, q);
}

inline WaveletFilter build_filter(const RationalInner& u, std::size_t n) {
  if (u.size() != n) throw DimensionError("build_filter: U must be N x N");
  return build_filter(assemble_inner(u));
}

/// max ||U(z)* U(z) - I||_F over `grid` equally spaced circle points.
inline double inner_unitarity_residual(const Realization& u, std::size_t grid = 64) {
  double res = 0.0;
  const Matrix id = Matrix::identity(u.input_dim());
  for (std::size_t k = 0; k < grid; ++k) {
    const Matrix v = eval(u, std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / grid));
    res = std::max(res, frobenius_norm(v.adjoint() * v - id));
  }
  return res;
}

inline double unitarity_residual(const WaveletFilter& wf, std::size_t grid = 64) {
  double res = 0.0;
  const Matrix id = Matrix::identity(wf.bands());
  for (std::size_t k = 0; k < grid; ++k) {
    const Matrix m = wf.eval(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / grid));
    res = std::max(res, frobenius_norm(m.adjoint() * m - id));
  }
  return res;
}

/// ||M(1) - I||_F.
inline double normalization_residual(const WaveletFilter& wf) {
  return frobenius_norm(wf.eval(1.0) - Matrix::identity(wf.bands()));
}

/// m = m_0, divided by sqrt(N) for unit-dc, as a minimal realization.
inline Realization lowpass_symbol(const WaveletFilter& wf, Convention convention) {
  const Realization col = wf.polyphase_realization();
  Realization row0(col.A(), col.B(), col.C().block(0, 0, 1, col.state_dim()), col.D().block(0, 0, 1, 1));
  if (convention == Convention::unit_dc) row0 = scaled(row0, 1.0 / std::sqrt(static_cast<double>(wf.bands())));
  return minimize(row0);
}

/// Daubechies-4 low-pass symbol, m(1) = 1.
inline Realization preset_daubechies4() {
  const double s3 = std::sqrt(3.0);
  const Complex taps[] = {(1.0 + s3) / 8.0, (3.0 + s3) / 8.0, (3.0 - s3) / 8.0, (1.0 - s3) / 8.0};
  return fir_realization(taps);
}

/// Haar low-pass symbol (1 + z^{-1}) / 2: (A, B, C, D) = (0, 1, 1/2, 1/2).
inline Realization preset_haar() {
  return Realization(Matrix::scalar(0.0), Matrix::scalar(1.0), Matrix::scalar(0.5), Matrix::scalar(0.5));
}

/// max over `grid` circle points of | |m(w)|^2 + |m(-w)|^2 - 1 |.
inline double qmf_residual(const Realization& m, std::size_t grid = 64) {
  double res = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const Complex w = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / grid);
    res = std::max(res, std::abs(std::norm(eval_scalar(m, w)) + std::norm(eval_scalar(m, -w)) - 1.0));
  }
  return res;
}

}  // namespace realize
