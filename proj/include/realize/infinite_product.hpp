#pragma once
//
// Block-Toeplitz symbols, finite products of M(z_k) with tail bounds, the
// father-wavelet cascade phi^(w) = prod_k m(e^{2 pi i w / N^k}) and the L2
// telescoping integrals of its partial products.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "realize/linalg.hpp"
#include "realize/realization.hpp"
#include "realize/ruelle.hpp"
#include "realize/wavelet.hpp"

namespace realize {

namespace detail {

inline void require_stable_feedthrough(const Realization& r, const char* who) {
  if (r.output_dim() != r.input_dim())
    throw DimensionError(std::string(who) + ": D must be square");
  if (spectral_radius(r.D()) >= 1.0 - kContractiveMargin)
    throw std::domain_error(std::string(who) + ": requires rho(D) < 1");
}

inline Complex circle_point(std::size_t k, std::size_t grid) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid));
}

}  // namespace detail

/// phi(z) = A + z B (I - z D)^{-1} C.
inline Matrix toeplitz_symbol_eval(const Realization& r, Complex z) {
  if (r.output_dim() != r.input_dim()) throw DimensionError("toeplitz_symbol_eval: D must be square");
  if (r.state_dim() == 0) return Matrix(0, 0);
  const Matrix lhs = Matrix::identity(r.output_dim()) - r.D() * z;
  try {
    return r.A() + r.B() * solve(lhs, r.C()) * z;
  } catch (const SingularMatrixError&) {
    throw PoleError("toeplitz_symbol_eval: I - zD is singular");
  }
}

/// max over `grid` circle points of the operator norm of phi(z).
inline double toeplitz_norm_estimate(const Realization& r, std::size_t grid) {
  detail::require_stable_feedthrough(r, "toeplitz_norm_estimate");
  if (r.state_dim() == 0 || grid == 0) return 0.0;
  double best = 0.0;
  for (std::size_t k = 0; k < grid; ++k)
    best = std::max(best, operator_norm(toeplitz_symbol_eval(r, detail::circle_point(k, grid))));
  return best;
}

/// n-block finite section. Block (i, j) of `state` is A on the diagonal and
/// B D^{j-i-1} C above it; `input` stacks B D^{n-1}, ..., B D, B from the top;
/// `output` is [C, DC, ..., D^{n-1} C]; `feedthrough` is D^n. Block j carries
/// the variable of the j-th factor, so
///   M(z_1) ... M(z_n) = D^n + output (Lambda(z) - state)^{-1} input.
struct ToeplitzSection {
  std::size_t blocks = 0;
  std::size_t block_dim = 0;
  Matrix state;
  Matrix input;
  Matrix output;
  Matrix feedthrough;
};

inline ToeplitzSection toeplitz_section(const Realization& r, std::size_t n) {
  detail::require_stable_feedthrough(r, "toeplitz_section");
  if (n == 0) throw std::invalid_argument("toeplitz_section: needs at least one block");
  const std::size_t d = r.state_dim(), p = r.output_dim();
  std::vector<Matrix> d_pow{Matrix::identity(p)};
  for (std::size_t k = 1; k <= n; ++k) d_pow.push_back(d_pow.back() * r.D());

  ToeplitzSection s;
  s.blocks = n;
  s.block_dim = d;
  s.state = Matrix(n * d, n * d);
  s.input = Matrix(n * d, p);
  s.output = Matrix(p, n * d);
  s.feedthrough = d_pow[n];
  if (d == 0) return s;
  for (std::size_t i = 0; i < n; ++i) {
    s.state.set_block(i * d, i * d, r.A());
    for (std::size_t j = i + 1; j < n; ++j) s.state.set_block(i * d, j * d, r.B() * d_pow[j - i - 1] * r.C());
    s.input.set_block(i * d, 0, r.B() * d_pow[n - 1 - i]);
    s.output.set_block(0, i * d, d_pow[i] * r.C());
  }
  return s;
}

inline Matrix eval_section(const ToeplitzSection& s, std::span<const Complex> zs, double tol = kDefaultTol) {
  if (zs.size() != s.blocks) throw DimensionError("eval_section: one point per block required");
  if (s.block_dim == 0) return s.feedthrough;
  Matrix lhs = -s.state;
  for (std::size_t i = 0; i < s.blocks; ++i)
    for (std::size_t k = 0; k < s.block_dim; ++k) lhs(i * s.block_dim + k, i * s.block_dim + k) += zs[i];
  try {
    return s.feedthrough + s.output * solve(lhs, s.input, tol);
  } catch (const SingularMatrixError&) {
    throw PoleError("eval_section: a point is a pole");
  }
}

/// ||C (zI - A)^{-1} (I - A)^{-1} B||, the constant with M(z) - M(1) = (1 - z) G(z).
inline double difference_quotient_norm(const Realization& r, Complex z) {
  if (r.state_dim() == 0) return 0.0;
  const Matrix id = Matrix::identity(r.state_dim());
  const Matrix inner = solve(id - r.A(), r.B());
  return operator_norm(r.C() * solve(id * z - r.A(), inner));
}

struct ProductResult {
  Matrix value;
  double constant = 0.0;   // K with ||M(z_k) - I|| <= K |1 - z_k|
  std::size_t cut = 0;     // factors after this index change the product by at most ~tail_bound
  double tail_bound = 0.0; // K sum_{k > cut} |1 - z_k|
};

/// Left-to-right product M(z_1) M(z_2) ... over the supplied points. K is the
/// larger of the maximum of ||G|| on a circle of radius
/// delta = min(1/2, (1 - rho(A))/2) around 1 (which bounds G inside by the
/// maximum principle) and ||G(z_k)|| at every supplied point.
inline ProductResult product_along_points(const Realization& r, std::span<const Complex> zs, double tol) {
  if (r.output_dim() != r.input_dim()) throw DimensionError("product_along_points: M must be square");
  const Matrix id = Matrix::identity(r.output_dim());
  try {
    if (frobenius_norm(eval(r, 1.0) - id) > 1e-10)
      throw ConventionError("product_along_points: requires M(1) = I");
  } catch (const PoleError&) {
    throw ConventionError("product_along_points: M has a pole at 1");
  }

  ProductResult out;
  out.value = id;
  for (const Complex& z : zs) out.value = out.value * eval(r, z);

  if (r.state_dim() > 0) {
    const double rho = spectral_radius(r.A());
    if (rho < 1.0) {
      const double delta = std::min(0.5, (1.0 - rho) / 2.0);
      constexpr std::size_t kRing = 64;
      for (std::size_t k = 0; k < kRing; ++k)
        out.constant = std::max(out.constant,
                                difference_quotient_norm(r, 1.0 + delta * detail::circle_point(k, kRing)));
    }
    for (const Complex& z : zs)
      if (z != Complex(1.0)) out.constant = std::max(out.constant, difference_quotient_norm(r, z));
  }

  std::vector<double> tail(zs.size() + 1, 0.0);  // tail[c] = sum_{k >= c} |1 - z_k|, 0-based
  for (std::size_t k = zs.size(); k-- > 0;) tail[k] = tail[k + 1] + std::abs(1.0 - zs[k]);
  out.cut = zs.size();
  for (std::size_t c = 0; c <= zs.size(); ++c) {
    if (out.constant * tail[c] <= tol) {
      out.cut = c;
      break;
    }
  }
  out.tail_bound = out.constant * tail[out.cut];
  return out;
}

/// K1 = max over `grid` circle points of |C (e^{it} I - A)^{-1} (I - A)^{-1} B|.
inline double cascade_constant(const Realization& m, std::size_t grid = 1024) {
  double k1 = 0.0;
  for (std::size_t k = 0; k < grid; ++k)
    k1 = std::max(k1, difference_quotient_norm(m, detail::circle_point(k, grid)));
  return k1;
}

/// Number of factors K with expm1(K1 * 2 pi |w| N^{-K} / (N - 1)) <= tol,
/// which bounds the relative change from every omitted factor together.
inline std::size_t cascade_depth(double k1, int n, double w, double tol) {
  const double lead = k1 * 2.0 * std::numbers::pi * std::abs(w) / (n - 1);
  std::size_t k = 1;
  double scale = 1.0 / n;
  while (std::expm1(lead * scale) > tol && k < 4096) {
    scale /= n;
    ++k;
  }
  return k;
}

namespace detail {

inline void require_unit_dc(const Realization& m, const char* who) {
  if (!m.is_scalar()) throw DimensionError(std::string(who) + ": symbol must be scalar-valued");
  if (std::abs(eval_scalar(m, 1.0) - 1.0) > 1e-10)
    throw ConventionError(std::string(who) + ": requires m(1) = 1 (unit-dc convention)");
}

}  // namespace detail

class Cascade {
 public:
  Cascade(Realization m, int n) : m_(std::move(m)), n_(n) {
    if (n_ < 2) throw std::invalid_argument("Cascade: N must be >= 2");
    detail::require_unit_dc(m_, "Cascade");
    k1_ = cascade_constant(m_);
  }

  double constant() const noexcept { return k1_; }

  /// prod_{k=1}^{K} m(e^{2 pi i w / N^k}), K from cascade_depth.
  Complex operator()(double w, double tol) const {
    const std::size_t depth = cascade_depth(k1_, n_, w, tol);
    Complex acc = 1.0;
    double theta = 2.0 * std::numbers::pi * w;
    for (std::size_t k = 1; k <= depth; ++k) {
      theta /= n_;
      acc *= eval_scalar(m_, std::polar(1.0, theta));
    }
    return acc;
  }

 private:
  Realization m_;
  int n_;
  double k1_ = 0.0;
};

inline Complex father_hat(const Realization& m, int n, double w, double tol) { return Cascade(m, n)(w, tol); }

/// int |f_k(w)|^2 dw over [-N^k/2, N^k/2] with f_k(w) = prod_{l=0}^{k} m(e^{2 pi i w / N^l}),
/// by composite Simpson with `quad_points` subintervals per unit length.
inline double partial_product_l2(const Realization& m, int n, std::size_t k, std::size_t quad_points = 64) {
  if (!m.is_scalar()) throw DimensionError("partial_product_l2: symbol must be scalar-valued");
  if (n < 2) throw std::invalid_argument("partial_product_l2: N must be >= 2");
  if (quad_points < 2 || quad_points % 2 != 0)
    throw std::invalid_argument("partial_product_l2: quad_points must be even and >= 2");
  double length = 1.0;
  for (std::size_t l = 0; l < k; ++l) length *= n;
  const std::size_t intervals = static_cast<std::size_t>(length) * quad_points;
  const double h = 1.0 / static_cast<double>(quad_points);
  const double w0 = -length / 2.0;

  auto integrand = [&](double w) {
    double v = 1.0;
    double theta = 2.0 * std::numbers::pi * w;
    for (std::size_t l = 0; l <= k; ++l, theta /= n) v *= std::norm(eval_scalar(m, std::polar(1.0, theta)));
    return v;
  };

  double s = integrand(w0) + integrand(w0 + intervals * h);
  for (std::size_t i = 1; i < intervals; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * integrand(w0 + i * h);
  return s * h / 3.0;
}

struct L2Certificate {
  std::vector<double> integrals;  // int |f_k|^2 for k = 0..kmax
  double liminf = 0.0;            // min over the computed k
  double bound = 0.0;             // N * liminf, bounds int |phi^|^2 by Fatou
  double r1_max = 0.0;            // max of R1 on 32 circle points
  bool finite = false;            // integrals do not grow with k
};

/// The partial products g_k = 1_{[-N^k/2, N^k/2]} prod_{l=1}^{k} m(e^{2 pi i w / N^l})
/// converge pointwise to phi^ and int |g_k|^2 = N int |f_{k-1}|^2, so Fatou gives
/// int |phi^|^2 <= N liminf int |f_k|^2.
inline L2Certificate l2_norm_estimate(const Realization& m, int n, std::size_t kmax,
                                      std::size_t quad_points = 64) {
  if (!m.is_scalar()) throw DimensionError("l2_norm_estimate: symbol must be scalar-valued");
  L2Certificate cert;
  cert.r1_max = r1_max(m, n, 32);
  if (cert.r1_max > 1.0 + 1e-9)
    throw std::domain_error("l2_norm_estimate: R1 exceeds 1 (max " + std::to_string(cert.r1_max) + ")");
  for (std::size_t k = 0; k <= kmax; ++k) cert.integrals.push_back(partial_product_l2(m, n, k, quad_points));
  cert.liminf = *std::min_element(cert.integrals.begin(), cert.integrals.end());
  cert.bound = n * cert.liminf;
  cert.finite = std::isfinite(cert.bound);
  for (std::size_t k = 1; k < cert.integrals.size(); ++k)
    if (cert.integrals[k] > cert.integrals[k - 1] * (1.0 + 1e-6) + 1e-12) cert.finite = false;
  return cert;
}

}  // namespace realize
