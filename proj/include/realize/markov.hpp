#pragma once
//
// Markov parameters h_k and the autocorrelation coefficients c_n of
// M(z)* M(z) on the unit circle, by the closed Gramian form and by direct
// convolution.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "realize/linalg.hpp"
#include "realize/realization.hpp"

namespace realize {

/// Two-sided sequence of equally shaped matrices stored on [first(), last()].
/// Indices outside the stored window read as zero.
class CoefficientSequence {
 public:
  CoefficientSequence(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  CoefficientSequence(int offset, std::vector<Matrix> values)
      : offset_(offset), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("CoefficientSequence: empty value list needs shape");
    rows_ = values_.front().rows();
    cols_ = values_.front().cols();
    for (const auto& v : values_)
      if (v.rows() != rows_ || v.cols() != cols_)
        throw DimensionError("CoefficientSequence: entries differ in shape");
  }

  static CoefficientSequence from_scalars(int offset, std::span<const Complex> values) {
    if (values.empty()) return CoefficientSequence(1, 1);
    std::vector<Matrix> m;
    m.reserve(values.size());
    for (const auto& v : values) m.push_back(Matrix::scalar(v));
    return CoefficientSequence(offset, std::move(m));
  }

  int first() const noexcept { return offset_; }
  int last() const noexcept { return offset_ + static_cast<int>(values_.size()) - 1; }
  std::size_t length() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_scalar() const noexcept { return rows_ == 1 && cols_ == 1; }

  bool in_window(int n) const noexcept { return !values_.empty() && n >= first() && n <= last(); }

  Matrix at(int n) const {
    if (!in_window(n)) return Matrix(rows_, cols_);
    return values_[static_cast<std::size_t>(n - offset_)];
  }

  Complex scalar_at(int n) const {
    if (!is_scalar()) throw DimensionError("CoefficientSequence::scalar_at: sequence is matrix-valued");
    return in_window(n) ? values_[static_cast<std::size_t>(n - offset_)](0, 0) : Complex{};
  }

  const std::vector<Matrix>& values() const noexcept { return values_; }

 private:
  int offset_ = 0;
  std::vector<Matrix> values_;
  std::size_t rows_ = 0, cols_ = 0;
};

/// h_0 = D, h_k = C A^{k-1} B for 1 <= k <= kmax.
inline CoefficientSequence markov_parameters(const Realization& r, std::size_t kmax) {
  std::vector<Matrix> h;
  h.reserve(kmax + 1);
  h.push_back(r.D());
  Matrix ak_b = r.B();  // A^{k-1} B
  for (std::size_t k = 1; k <= kmax; ++k) {
    h.push_back(r.state_dim() == 0 ? Matrix(r.output_dim(), r.input_dim()) : r.C() * ak_b);
    if (r.state_dim() > 0) ak_b = r.A() * ak_b;
  }
  return CoefficientSequence(0, std::move(h));
}

/// c_0 = D* D + B* G B, c_n = Y A^{n-1} B (n > 0), c_n = B* (A*)^{-n-1} Y* (n < 0),
/// over n in [-nmax, nmax]. The sequence is the one with c_n = sum_j h_j* h_{j+n}.
inline CoefficientSequence autocorrelation_closed(const Realization& r, std::size_t nmax) {
  const int span = static_cast<int>(nmax);
  std::vector<Matrix> c(2 * nmax + 1);
  if (r.state_dim() == 0) {
    for (auto& v : c) v = Matrix(r.input_dim(), r.input_dim());
    c[nmax] = r.D().adjoint() * r.D();
    return CoefficientSequence(-span, std::move(c));
  }
  const Matrix gram = observability_gramian(r);
  const Matrix y = y_vector(r, gram);
  c[nmax] = r.D().adjoint() * r.D() + r.B().adjoint() * gram * r.B();
  Matrix ak_b = r.B();
  for (std::size_t n = 1; n <= nmax; ++n) {
    const Matrix pos = y * ak_b;
    c[nmax + n] = pos;
    c[nmax - n] = pos.adjoint();
    ak_b = r.A() * ak_b;
  }
  return CoefficientSequence(-span, std::move(c));
}

/// Smallest k with ||A^k||_F <= 1e-14. The search is capped at the larger of
/// 10 d / (1 - rho(A)) and twice the k with rho^k = 1e-14; the first alone
/// stops near rho^k ~ 1e-5 once rho approaches 0.8.
inline std::size_t default_truncation(const Realization& r) {
  const std::size_t d = r.state_dim();
  if (d == 0) return 0;
  const double rho = spectral_radius(r.A());
  const double geometric = rho > 0.0 ? 2.0 * std::log(1e-14) / std::log(rho) : 0.0;
  const double cap_real = rho < 1.0 ? std::max(10.0 * static_cast<double>(d) / (1.0 - rho), geometric) : 1e4;
  const std::size_t cap = static_cast<std::size_t>(std::min(std::ceil(cap_real), 1e6));
  Matrix ak = r.A();
  for (std::size_t k = 1; k <= cap; ++k) {
    if (frobenius_norm(ak) <= 1e-14) return k;
    ak = ak * r.A();
  }
  return cap;
}

/// c_n ~= sum_j h_j* h_{j+n} over the first kcut + 1 nonzero terms, the direct convolution of the
/// Markov parameters. Independent of the Gramian route.
inline CoefficientSequence autocorrelation_convolution(const Realization& r, std::size_t nmax,
                                                       std::optional<std::size_t> kcut = {}) {
  const std::size_t cut = kcut.value_or(default_truncation(r));
  const CoefficientSequence h = markov_parameters(r, cut + nmax);
  const int span = static_cast<int>(nmax);
  std::vector<Matrix> c;
  c.reserve(2 * nmax + 1);
  for (int n = -span; n <= span; ++n) {
    Matrix acc(r.input_dim(), r.input_dim());
    // cut + 1 terms starting where both indices are nonnegative
    const int j0 = std::max(0, -n);
    for (int j = j0; j <= j0 + static_cast<int>(cut); ++j) acc += h.at(j).adjoint() * h.at(j + n);
    c.push_back(std::move(acc));
  }
  return CoefficientSequence(-span, std::move(c));
}

/// Coefficients (a_0, ..., a_{d-1}) of the monic characteristic polynomial
/// lambda^d + a_{d-1} lambda^{d-1} + ... + a_0, by Faddeev-LeVerrier.
inline std::vector<Complex> characteristic_coefficients(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("characteristic_coefficients: matrix not square");
  const std::size_t d = a.rows();
  std::vector<Complex> coeff(d + 1);
  coeff[d] = 1.0;
  Matrix m(d, d);
  for (std::size_t k = 1; k <= d; ++k) {
    m = a * m;
    for (std::size_t i = 0; i < d; ++i) m(i, i) += coeff[d - k + 1];
    coeff[d - k] = -trace(a * m) / static_cast<double>(k);
  }
  coeff.pop_back();
  return coeff;
}

/// The linear recursion a_0 c_p + ... + a_{d-1} c_{p+d-1} + c_{p+d} = 0 (p >= 1)
/// obeyed by the autocorrelation coefficients, via Cayley-Hamilton on A.
inline std::vector<Complex> ch_recursion(const Realization& r) {
  if (r.state_dim() == 0) throw std::invalid_argument("ch_recursion: state dimension must be positive");
  return characteristic_coefficients(r.A());
}

/// Norm of sum_i a_i c_{p+i} + c_{p+d}.
inline double ch_residual(const CoefficientSequence& c, std::span<const Complex> a, int p) {
  const int d = static_cast<int>(a.size());
  Matrix acc = c.at(p + d);
  for (int i = 0; i < d; ++i) acc += c.at(p + i) * a[static_cast<std::size_t>(i)];
  return frobenius_norm(acc);
}

struct DecayCheck {
  double constant = 0.0;  // smallest C with |c_k| <= C rate^|k| over the window
  double rate = 0.0;      // rho + 0.01
  bool ok = false;
};

/// Geometric decay of |c_k| (Frobenius norm for matrix entries) at rate
/// rho + 0.01 over the stored window. ok when the fitted constant is < 1e6.
inline DecayCheck decay_check(const CoefficientSequence& c, double rho) {
  DecayCheck out;
  out.rate = rho + 0.01;
  const double log_rate = std::log(out.rate);
  double log_c = -std::numeric_limits<double>::infinity();
  for (int k = c.first(); k <= c.last(); ++k) {
    const double mag = frobenius_norm(c.at(k));
    if (mag == 0.0) continue;
    log_c = std::max(log_c, std::log(mag) - std::abs(k) * log_rate);
  }
  out.constant = std::exp(log_c);
  out.ok = std::isfinite(out.constant) && out.constant < 1e6;
  return out;
}

/// Geometric rate of the envelope sup_{j >= k} |c_j| over k in [kmin, kmax],
/// by least squares on its logarithm. The envelope runs to the end of the
/// stored window, so the window should extend well past kmax.
inline double fitted_decay_rate(const CoefficientSequence& c, int kmin, int kmax) {
  if (kmax <= kmin) throw std::invalid_argument("fitted_decay_rate: empty fit range");
  std::vector<double> envelope;
  double tail = 0.0;
  for (int k = c.last(); k >= kmin; --k) {
    tail = std::max(tail, frobenius_norm(c.at(k)));
    if (k <= kmax) envelope.push_back(tail);
  }
  std::reverse(envelope.begin(), envelope.end());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(envelope.size());
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    if (envelope[i] == 0.0) return 0.0;
    const double x = kmin + static_cast<double>(i), y = std::log(envelope[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace realize
