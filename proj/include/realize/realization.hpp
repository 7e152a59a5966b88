#pragma once
//
// State-space realizations R(z) = D + C (zI - A)^{-1} B of rational
// matrix-valued functions analytic at infinity, and the algebra on them.
//

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "realize/linalg.hpp"

namespace realize {

class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotContractiveError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A quadruple (A, B, C, D) with A d x d, B d x q, C p x d, D p x q.
/// d = 0 is allowed and describes the constant function D.
class Realization {
 public:
  Realization(Matrix a, Matrix b, Matrix c, Matrix d)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    // a 0 x 0 state with empty B/C is normalized to the shapes D implies
    if (a_.rows() == 0 && a_.cols() == 0) {
      if (b_.empty()) b_ = Matrix(0, d_.cols());
      if (c_.empty()) c_ = Matrix(d_.rows(), 0);
    }
    if (!a_.is_square()) throw DimensionError("Realization: A must be square");
    if (b_.rows() != a_.rows()) throw DimensionError("Realization: B rows must equal state dimension");
    if (c_.cols() != a_.rows()) throw DimensionError("Realization: C cols must equal state dimension");
    if (c_.rows() != d_.rows()) throw DimensionError("Realization: C rows must equal D rows");
    if (b_.cols() != d_.cols()) throw DimensionError("Realization: B cols must equal D cols");
    if (!(a_.all_finite() && b_.all_finite() && c_.all_finite() && d_.all_finite()))
      throw std::invalid_argument("Realization: non-finite entry");
  }

  static Realization constant(Matrix d) {
    const std::size_t p = d.rows(), q = d.cols();
    return Realization(Matrix(0, 0), Matrix(0, q), Matrix(p, 0), std::move(d));
  }

  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  const Matrix& C() const noexcept { return c_; }
  const Matrix& D() const noexcept { return d_; }

  std::size_t state_dim() const noexcept { return a_.rows(); }
  std::size_t output_dim() const noexcept { return d_.rows(); }
  std::size_t input_dim() const noexcept { return d_.cols(); }
  bool is_scalar() const noexcept { return output_dim() == 1 && input_dim() == 1; }

 private:
  Matrix a_, b_, c_, d_;
};

/// D + C (zI - A)^{-1} B. Throws PoleError when zI - A is singular to `tol`.
inline Matrix eval(const Realization& r, Complex z, double tol = kDefaultTol) {
  if (r.state_dim() == 0) return r.D();
  Matrix shifted = -r.A();
  for (std::size_t i = 0; i < r.state_dim(); ++i) shifted(i, i) += z;
  try {
    return r.D() + r.C() * solve(shifted, r.B(), tol);
  } catch (const SingularMatrixError&) {
    throw PoleError("eval: z is a pole of the realization to tolerance");
  }
}

inline Complex eval_scalar(const Realization& r, Complex z, double tol = kDefaultTol) {
  if (!r.is_scalar()) throw DimensionError("eval_scalar: realization is not scalar-valued");
  return eval(r, z, tol)(0, 0);
}

/// (T A T^{-1}, T B, C T^{-1}, D). The transfer function is unchanged.
inline Realization similarity(const Realization& r, const Matrix& t, double tol = kDefaultTol) {
  if (t.rows() != r.state_dim() || !t.is_square())
    throw DimensionError("similarity: T must be d x d");
  Matrix t_inv;
  try {
    t_inv = inverse(t, tol);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("similarity: T is singular");
  }
  return Realization(t * r.A() * t_inv, t * r.B(), r.C() * t_inv, r.D());
}

/// Realization of R1(z) R2(z):
///
///   [ A1  B1 C2 | B1 D2 ]
///   [  0  A2    | B2    ]
///   [ C1  D1 C2 | D1 D2 ]
inline Realization product(const Realization& r1, const Realization& r2) {
  if (r1.input_dim() != r2.output_dim())
    throw DimensionError("product: inner dimensions differ (" + std::to_string(r1.input_dim()) +
                         " vs " + std::to_string(r2.output_dim()) + ")");
  const std::size_t n1 = r1.state_dim(), n2 = r2.state_dim();
  Matrix a(n1 + n2, n1 + n2);
  a.set_block(0, 0, r1.A());
  a.set_block(0, n1, r1.B() * r2.C());
  a.set_block(n1, n1, r2.A());
  Matrix b = vstack({r1.B() * r2.D(), r2.B()});
  Matrix c = hstack({r1.C(), r1.D() * r2.C()});
  return Realization(std::move(a), std::move(b), std::move(c), r1.D() * r2.D());
}

/// z -> s * R(z).
inline Realization scaled(const Realization& r, Complex s) {
  return Realization(r.A(), r.B(), r.C() * s, r.D() * s);
}

/// Realization of z -> R(z^n), with state dimension n * d. The state matrix
/// is the block cyclic shift with A in the lower-left corner, so that
/// [C 0 .. 0] (zI - S)^{-1} [0 .. 0 B]^T = C (z^n I - A)^{-1} B.
inline Realization compose_power(const Realization& r, std::size_t n) {
  if (n == 0) throw std::invalid_argument("compose_power: exponent must be positive");
  if (n == 1 || r.state_dim() == 0) return r;
  const std::size_t d = r.state_dim();
  Matrix s(n * d, n * d);
  for (std::size_t j = 0; j + 1 < n; ++j) s.set_block(j * d, (j + 1) * d, Matrix::identity(d));
  s.set_block((n - 1) * d, 0, r.A());
  Matrix b(n * d, r.input_dim());
  b.set_block((n - 1) * d, 0, r.B());
  Matrix c(r.output_dim(), n * d);
  c.set_block(0, 0, r.C());
  return Realization(std::move(s), std::move(b), std::move(c), r.D());
}

/// Scalar FIR filter sum_n taps[n] z^{-n} as a shift-register realization.
inline Realization fir_realization(std::span<const Complex> taps) {
  if (taps.empty()) return Realization::constant(Matrix::scalar(0.0));
  const std::size_t d = taps.size() - 1;
  Matrix a(d, d), b(d, 1), c(1, d);
  for (std::size_t i = 0; i + 1 < d; ++i) a(i + 1, i) = 1.0;
  if (d > 0) b(0, 0) = 1.0;
  for (std::size_t i = 0; i < d; ++i) c(0, i) = taps[i + 1];
  return Realization(std::move(a), std::move(b), std::move(c), Matrix::scalar(taps[0]));
}

/// Converts the alternative form D + z C (I - z A)^{-1} B into the standard
/// form. Requires A invertible:
///   A' = A^{-1}, B' = A^{-1} B, C' = -C A^{-1}, D' = D - C A^{-1} B.
inline Realization from_alternative_form(const Matrix& a, const Matrix& b, const Matrix& c,
                                         const Matrix& d, double tol = kDefaultTol) {
  if (a.rows() == 0) return Realization(a, b, c, d);
  Matrix a_inv;
  try {
    a_inv = inverse(a, tol);
  } catch (const SingularMatrixError&) {
    throw std::invalid_argument(
        "from_alternative_form: state matrix is singular, no realization analytic at infinity");
  }
  const Matrix a_inv_b = a_inv * b;
  return Realization(a_inv, a_inv_b, -(c * a_inv), d - c * a_inv_b);
}

/// Realization of R_1(z_1) R_2(z_2) ... R_u(z_u), each factor in its own
/// variable. `blocks()` records the state dimension of each factor, which
/// fixes the block-diagonal Lambda(z) = diag(z_1 I, ..., z_u I).
class MultiVarRealization {
 public:
  MultiVarRealization(std::vector<std::size_t> blocks, Realization r)
      : blocks_(std::move(blocks)), r_(std::move(r)) {
    const std::size_t total = std::accumulate(blocks_.begin(), blocks_.end(), std::size_t{0});
    if (total != r_.state_dim())
      throw DimensionError("MultiVarRealization: block sizes do not sum to the state dimension");
    std::size_t row0 = 0;
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      std::size_t col0 = 0;
      for (std::size_t bj = 0; bj < bi; ++bj) {
        if (max_abs(r_.A().block(row0, col0, blocks_[bi], blocks_[bj])) != 0.0)
          throw std::invalid_argument("MultiVarRealization: A is not block upper triangular");
        col0 += blocks_[bj];
      }
      row0 += blocks_[bi];
    }
  }

  const std::vector<std::size_t>& blocks() const noexcept { return blocks_; }
  std::size_t variables() const noexcept { return blocks_.size(); }
  const Realization& realization() const noexcept { return r_; }

 private:
  std::vector<std::size_t> blocks_;
  Realization r_;
};

/// Block entries:
///   A_jk = B_j D_{j+1} ... D_{k-1} C_k  (j < k),   A_jj = A_j
///   B_j  = B_j D_{j+1} ... D_u
///   C_j  = D_1 ... D_{j-1} C_j
///   D    = D_1 ... D_u
inline MultiVarRealization multivar_product(std::span<const Realization> factors) {
  if (factors.empty()) throw std::invalid_argument("multivar_product: no factors");
  const std::size_t u = factors.size();
  for (std::size_t j = 0; j + 1 < u; ++j)
    if (factors[j].input_dim() != factors[j + 1].output_dim())
      throw DimensionError("multivar_product: factor " + std::to_string(j) +
                           " does not chain with factor " + std::to_string(j + 1));

  std::vector<std::size_t> blocks(u), offsets(u + 1, 0);
  for (std::size_t j = 0; j < u; ++j) {
    blocks[j] = factors[j].state_dim();
    offsets[j + 1] = offsets[j] + blocks[j];
  }
  const std::size_t total = offsets[u];
  const std::size_t p = factors.front().output_dim(), q = factors.back().input_dim();

  // tail[j] = D_j ... D_u, head[j] = D_1 ... D_{j-1}
  std::vector<Matrix> tail(u + 1), head(u + 1);
  tail[u] = Matrix::identity(q);
  for (std::size_t j = u; j-- > 0;) tail[j] = factors[j].D() * tail[j + 1];
  head[0] = Matrix::identity(p);
  for (std::size_t j = 0; j < u; ++j) head[j + 1] = head[j] * factors[j].D();

  Matrix a(total, total), b(total, q), c(p, total);
  for (std::size_t j = 0; j < u; ++j) {
    a.set_block(offsets[j], offsets[j], factors[j].A());
    Matrix link = factors[j].B();  // B_j D_{j+1} ... D_{k-1}
    for (std::size_t k = j + 1; k < u; ++k) {
      a.set_block(offsets[j], offsets[k], link * factors[k].C());
      link = link * factors[k].D();
    }
    b.set_block(offsets[j], 0, factors[j].B() * tail[j + 1]);
    c.set_block(0, offsets[j], head[j] * factors[j].C());
  }
  return MultiVarRealization(std::move(blocks),
                             Realization(std::move(a), std::move(b), std::move(c), tail[0]));
}

/// D + C (Lambda(z) - A)^{-1} B with Lambda(z) = diag(z_1 I_{n_1}, ..., z_u I_{n_u}).
inline Matrix eval_multivar(const MultiVarRealization& m, std::span<const Complex> zs,
                            double tol = kDefaultTol) {
  if (zs.size() != m.variables())
    throw DimensionError("eval_multivar: expected " + std::to_string(m.variables()) +
                         " variable values, got " + std::to_string(zs.size()));
  const Realization& r = m.realization();
  if (r.state_dim() == 0) return r.D();
  Matrix shifted = -r.A();
  std::size_t row = 0;
  for (std::size_t j = 0; j < zs.size(); ++j)
    for (std::size_t i = 0; i < m.blocks()[j]; ++i, ++row) shifted(row, row) += zs[j];
  try {
    return r.D() + r.C() * solve(shifted, r.B(), tol);
  } catch (const SingularMatrixError&) {
    throw PoleError("eval_multivar: Lambda(z) - A is singular to tolerance");
  }
}

/// Inverse of the block upper-triangular operator [[a, -c], [0, b]]:
///   [[a^{-1}, a^{-1} c b^{-1}], [0, b^{-1}]].
inline Matrix block_upper_inverse(const Matrix& a, const Matrix& b, const Matrix& c,
                                  double tol = kDefaultTol) {
  if (!a.is_square() || !b.is_square() || c.rows() != a.rows() || c.cols() != b.rows())
    throw DimensionError("block_upper_inverse: incompatible blocks");
  const Matrix a_inv = inverse(a, tol), b_inv = inverse(b, tol);
  Matrix out(a.rows() + b.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a_inv);
  out.set_block(0, a.cols(), a_inv * c * b_inv);
  out.set_block(a.rows(), a.cols(), b_inv);
  return out;
}

/// Two-stage Kalman reduction: restrict to the reachable subspace of (A, B),
/// then quotient out the unobservable subspace of (C, A). Rank decisions use
/// the threshold tol relative to the largest pivot.
inline Realization minimize(const Realization& r, double tol = 1e-10) {
  if (r.state_dim() == 0) return r;
  const Matrix reach = reachable_basis(r.A(), r.B(), tol);
  const Matrix a1 = reach.adjoint() * r.A() * reach;
  const Matrix b1 = reach.adjoint() * r.B();
  const Matrix c1 = r.C() * reach;
  if (a1.rows() == 0) return Realization::constant(r.D());
  // (ker O)^perp is the reachable subspace of (A*, C*)
  const Matrix obs = reachable_basis(a1.adjoint(), c1.adjoint(), tol);
  if (obs.cols() == 0) return Realization::constant(r.D());
  return Realization(obs.adjoint() * a1 * obs, obs.adjoint() * b1, c1 * obs, r.D());
}

inline constexpr double kContractiveMargin = 1e-9;

inline void require_contractive(const Matrix& a, const char* who) {
  if (a.rows() == 0) return;
  const double rho = spectral_radius(a);
  if (rho >= 1.0 - kContractiveMargin)
    throw NotContractiveError(std::string(who) + ": Stein equation not contractive (spectral radius " +
                              std::to_string(rho) + ")");
}

/// Observability Gramian, the solution of G - A* G A = C* C, by doubling:
/// G <- G + (A^{2^j})* G A^{2^j}, A^{2^j} <- (A^{2^j})^2, until the increment
/// drops below tol relative to G.
inline Matrix observability_gramian(const Realization& r, double tol = 1e-15) {
  require_contractive(r.A(), "observability_gramian");
  Matrix gram = r.C().adjoint() * r.C();
  Matrix step = r.A();
  for (int it = 0; it < 64; ++it) {
    const Matrix inc = step.adjoint() * gram * step;
    gram += inc;
    const double g = frobenius_norm(gram);
    if (frobenius_norm(inc) <= tol * g || g == 0.0) break;
    step = step * step;
  }
  return (gram + gram.adjoint()) * 0.5;
}

/// Y = D* C + B* G A.
inline Matrix y_vector(const Realization& r, const Matrix& gram) {
  if (gram.rows() != r.state_dim() || !gram.is_square())
    throw DimensionError("y_vector: Gramian must be d x d");
  return r.D().adjoint() * r.C() + r.B().adjoint() * gram * r.A();
}

/// Similarity by T = G^{1/2}, after which the observability Gramian is I.
/// Requires (C, A) observable.
inline Realization normalize_gramian(const Realization& r) {
  if (r.state_dim() == 0) return r;
  const Matrix gram = observability_gramian(r);
  return similarity(r, hermitian_sqrt(gram));
}

}  // namespace realize
