#pragma once
//
// Small dense complex linear algebra. State dimensions handled by this
// library are modest (d <= ~64), so everything is row-major, dense and
// allocation-per-result.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace realize {

using Complex = std::complex<double>;

/// Relative tolerance used when the caller does not supply one. It is scaled
/// by the largest entry magnitude of the matrix being factored.
inline constexpr double kDefaultTol = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Complex fill = Complex{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<Complex>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw DimensionError("Matrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix scalar(Complex v) { return Matrix(1, 1, v); }

  static Matrix diagonal(std::span<const Complex> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("Matrix::block out of range");
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
    if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_)
      throw DimensionError("Matrix::set_block out of range");
    for (std::size_t i = 0; i < src.rows(); ++i)
      for (std::size_t j = 0; j < src.cols(); ++j) (*this)(r0 + i, c0 + j) = src(i, j);
  }

  Matrix col(std::size_t j) const { return block(0, j, rows_, 1); }
  Matrix row(std::size_t i) const { return block(i, 0, 1, cols_); }

  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(Complex s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& v) {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void require_same_shape(const Matrix& o, const char* what) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw DimensionError(std::string("Matrix::") + what + ": shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator-(Matrix a) { return a *= -1.0; }
inline Matrix operator*(Matrix a, Complex s) { return a *= s; }
inline Matrix operator*(Complex s, Matrix a) { return a *= s; }

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("mat_mul: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) { return mat_mul(a, b); }

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (const auto& v : a.data()) s += std::norm(v);
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

inline Complex trace(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("trace: matrix not square");
  Complex t{};
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

inline Matrix hstack(std::initializer_list<Matrix> parts) {
  std::size_t rows = parts.size() ? parts.begin()->rows() : 0, cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("hstack: row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t c = 0;
  for (const auto& p : parts) {
    out.set_block(0, c, p);
    c += p.cols();
  }
  return out;
}

inline Matrix vstack(std::initializer_list<Matrix> parts) {
  std::size_t cols = parts.size() ? parts.begin()->cols() : 0, rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("vstack: column count mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& p : parts) {
    out.set_block(r, 0, p);
    r += p.rows();
  }
  return out;
}

inline Matrix power(const Matrix& a, std::size_t k) {
  if (!a.is_square()) throw DimensionError("power: matrix not square");
  Matrix result = Matrix::identity(a.rows());
  Matrix base = a;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
///
/// A pivot whose magnitude is at or below tol * max|a_ij| is treated as zero
/// and raises SingularMatrixError.
inline Matrix solve(const Matrix& a, const Matrix& b, double tol = kDefaultTol) {
  if (!a.is_square()) throw DimensionError("solve: matrix not square");
  if (a.rows() != b.rows()) throw DimensionError("solve: right-hand side row mismatch");
  const std::size_t n = a.rows();
  Matrix lu = a;
  Matrix x = b;
  const double threshold = tol * max_abs(a);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        piv = i;
      }
    }
    if (best <= threshold || best == 0.0)
      throw SingularMatrixError("solve: pivot " + std::to_string(best) +
                                " below tolerance at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    const Complex inv = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu(i, k) * inv;
      if (f == Complex{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      Complex s = x(kk, j);
      for (std::size_t m = kk + 1; m < n; ++m) s -= lu(kk, m) * x(m, j);
      x(kk, j) = s / lu(kk, kk);
    }
  }
  return x;
}

inline Matrix inverse(const Matrix& a, double tol = kDefaultTol) {
  return solve(a, Matrix::identity(a.rows()), tol);
}

struct SpectralRadiusEstimate {
  double value = 0.0;   // Gelfand estimate ||A^k||_F^(1/k); never below the true radius
  double lower = 0.0;   // best power-iteration growth rate seen across restarts
  bool converged = false;
};

namespace detail {

// Geometric-mean growth rate of ||A^k x|| over the last half of `iters` steps.
inline double power_growth(const Matrix& a, std::mt19937_64& rng, std::size_t iters) {
  const std::size_t n = a.rows();
  std::normal_distribution<double> g;
  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) x(i, 0) = Complex(g(rng), g(rng));
  double nx = frobenius_norm(x);
  if (nx == 0.0) return 0.0;
  x *= 1.0 / nx;
  double log_growth = 0.0;
  std::size_t counted = 0;
  for (std::size_t it = 0; it < iters; ++it) {
    x = a * x;
    nx = frobenius_norm(x);
    if (nx == 0.0) return 0.0;
    x *= 1.0 / nx;
    if (it >= iters / 2) {
      log_growth += std::log(nx);
      ++counted;
    }
  }
  return std::exp(log_growth / static_cast<double>(counted));
}

}  // namespace detail

/// Estimates the spectral radius. This is an estimate, not an eigensolve:
/// repeated squaring gives ||A^(2^j)||_F^(2^-j), which decreases to rho(A)
/// from above, while power iteration with random restarts supplies a lower
/// reference. `converged` is false when the Gelfand sequence had not settled
/// to `tol` (relative) within the squaring cap; `value` is then the last
/// upper estimate.
inline SpectralRadiusEstimate spectral_radius_estimate(const Matrix& a, double tol = kDefaultTol,
                                                       std::uint64_t seed = 0x5eedULL) {
  if (!a.is_square()) throw DimensionError("spectral_radius: matrix not square");
  SpectralRadiusEstimate est;
  const double scale = max_abs(a);
  if (a.rows() == 0 || scale == 0.0) {
    est.converged = true;
    return est;
  }

  std::mt19937_64 rng(seed);
  for (int restart = 0; restart < 3; ++restart)
    est.lower = std::max(est.lower, detail::power_growth(a * (1.0 / scale), rng, 200) * scale);

  Matrix m = a * (1.0 / scale);
  double log_scale = std::log(scale);  // A^(2^j) = exp(log_scale) * m
  double previous = std::numeric_limits<double>::infinity();
  double exponent = 1.0;
  constexpr int kMaxSquarings = 60;
  for (int j = 0; j <= kMaxSquarings; ++j) {
    const double nm = frobenius_norm(m);
    if (nm == 0.0) {  // nilpotent to machine precision
      est.value = 0.0;
      est.lower = 0.0;
      est.converged = true;
      return est;
    }
    m *= 1.0 / nm;
    const double log_norm = log_scale + std::log(nm);
    est.value = std::exp(log_norm / exponent);
    const double ref = std::max(est.value, std::numeric_limits<double>::min());
    if (std::abs(previous - est.value) <= tol * ref ||
        std::abs(est.value - est.lower) <= tol * ref) {
      est.converged = true;
      return est;
    }
    previous = est.value;
    log_scale = 2.0 * log_norm;
    exponent *= 2.0;
    m = m * m;
  }
  return est;
}

inline double spectral_radius(const Matrix& a, double tol = kDefaultTol) {
  return spectral_radius_estimate(a, tol).value;
}

/// Largest singular value, as sqrt(rho(a* a)).
inline double operator_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  const Matrix h = a.rows() < a.cols() ? a * a.adjoint() : a.adjoint() * a;
  return std::sqrt(spectral_radius(h, 1e-14));
}

namespace detail {

// Modified Gram-Schmidt with column pivoting; stops once the largest
// remaining residual norm is at or below `threshold`.
inline Matrix gram_schmidt(const Matrix& cols, double threshold) {
  const std::size_t n = cols.rows();
  std::vector<Matrix> work;
  work.reserve(cols.cols());
  for (std::size_t j = 0; j < cols.cols(); ++j) work.push_back(cols.col(j));
  std::vector<Matrix> basis;
  while (!work.empty() && basis.size() < n) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < work.size(); ++j) {
      const double nj = frobenius_norm(work[j]);
      if (nj > best_norm) {
        best_norm = nj;
        best = j;
      }
    }
    if (best_norm <= threshold || best_norm == 0.0) break;
    Matrix q = work[best] * (1.0 / best_norm);
    work.erase(work.begin() + static_cast<std::ptrdiff_t>(best));
    // second pass against the accumulated basis keeps q orthogonal to roundoff
    for (const auto& b : basis) q -= b * (b.adjoint() * q)(0, 0);
    q *= 1.0 / frobenius_norm(q);
    for (auto& w : work) w -= q * (q.adjoint() * w)(0, 0);
    basis.push_back(std::move(q));
  }
  Matrix out(n, basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) out.set_block(0, j, basis[j]);
  return out;
}

}  // namespace detail

/// Orthonormal basis of the column span of `cols`. A candidate whose residual
/// norm is at or below `tol` times the largest column norm ends the sweep.
inline Matrix orthonormal_basis(const Matrix& cols, double tol) {
  double largest = 0.0;
  for (std::size_t j = 0; j < cols.cols(); ++j) largest = std::max(largest, frobenius_norm(cols.col(j)));
  return detail::gram_schmidt(cols, tol * largest);
}

/// Orthonormal basis of the smallest a-invariant subspace containing the
/// columns of b (the reachable subspace of the pair (a, b)).
inline Matrix reachable_basis(const Matrix& a, const Matrix& b, double tol) {
  if (!a.is_square() || a.rows() != b.rows()) throw DimensionError("reachable_basis: shape mismatch");
  const std::size_t n = a.rows();
  Matrix basis = orthonormal_basis(b, tol);
  if (basis.cols() == 0) return basis;
  // new directions are images of unit vectors, so they are judged against ||a||
  const double threshold = tol * std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  Matrix frontier = basis;
  while (frontier.cols() > 0 && basis.cols() < n) {
    Matrix cand = a * frontier;
    for (int pass = 0; pass < 2; ++pass) cand -= basis * (basis.adjoint() * cand);
    frontier = detail::gram_schmidt(cand, threshold);
    if (frontier.cols() == 0) break;
    basis = hstack({basis, frontier});
  }
  return basis;
}

/// Cholesky-style test for positive semidefiniteness. Pivots below
/// -tol * max|h_ij| fail; pivots of magnitude at most tol * max|h_ij| are
/// treated as zero and require the rest of their column to vanish to the
/// same tolerance.
inline bool is_positive_semidefinite(const Matrix& h, double tol = 1e-10) {
  if (!h.is_square()) throw DimensionError("is_positive_semidefinite: matrix not square");
  const std::size_t n = h.rows();
  const double scale = std::max(max_abs(h), std::numeric_limits<double>::min());
  const double thr = tol * scale;
  if (frobenius_norm(h - h.adjoint()) > thr * static_cast<double>(n + 1)) return false;
  Matrix w = h;
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = w(k, k).real();
    if (pivot < -thr) return false;
    if (pivot <= thr) {
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(w(i, k)) > std::sqrt(thr * scale)) return false;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = w(i, k) / pivot;
      for (std::size_t j = k + 1; j < n; ++j) w(i, j) -= f * std::conj(w(j, k));
    }
  }
  return true;
}

/// Principal square root of a Hermitian positive definite matrix by the
/// Denman-Beavers iteration.
inline Matrix hermitian_sqrt(const Matrix& h, double tol = 1e-14) {
  if (!h.is_square()) throw DimensionError("hermitian_sqrt: matrix not square");
  Matrix y = h;
  Matrix z = Matrix::identity(h.rows());
  for (int it = 0; it < 100; ++it) {
    const Matrix y_next = (y + inverse(z)) * 0.5;
    const Matrix z_next = (z + inverse(y)) * 0.5;
    const double change = frobenius_norm(y_next - y);
    y = y_next;
    z = z_next;
    if (change <= tol * std::max(1.0, frobenius_norm(y))) break;
  }
  // symmetrize away roundoff
  return (y + y.adjoint()) * 0.5;
}

}  // namespace realize
