#pragma once
//
// The Ruelle (transfer) operator of a scalar symbol m:
//   (Rf)(z) = (1/N) sum_{w^N = z} |m(w)|^2 f(w),
// both pointwise on the circle and as the slanted matrix
//   r_{l,k} = (1/N) c_{N l - k}
// built from the autocorrelation coefficients of m.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "realize/linalg.hpp"
#include "realize/markov.hpp"
#include "realize/realization.hpp"

namespace realize {

/// Index bounds of a finite section: rows l in [row_min, row_max], columns
/// k in [col_min, col_max].
struct Window {
  int row_min = 0, row_max = 0;
  int col_min = 0, col_max = 0;

  bool contains(int l, int k) const noexcept {
    return l >= row_min && l <= row_max && k >= col_min && k <= col_max;
  }
};

struct SlantedEntry {
  int row;
  int col;
  Complex value;
};

class SlantedOperator {
 public:
  SlantedOperator(int scale, CoefficientSequence coefficients, Window window)
      : scale_(scale), c_(std::move(coefficients)), window_(window) {
    if (scale_ < 2) throw std::invalid_argument("SlantedOperator: scaling N must be >= 2");
    if (!c_.is_scalar()) throw DimensionError("SlantedOperator: coefficients must be scalar");
    if (window_.row_min > window_.row_max || window_.col_min > window_.col_max)
      throw std::invalid_argument("SlantedOperator: empty window");
    const double inv_n = 1.0 / scale_;
    for (int l = window_.row_min; l <= window_.row_max; ++l) {
      const auto [lo, hi] = row_span(l);
      for (int k = lo; k <= hi; ++k) {
        const Complex v = c_.scalar_at(scale_ * l - k) * inv_n;
        if (v != Complex{}) entries_.push_back({l, k, v});
      }
    }
  }

  int scale() const noexcept { return scale_; }
  const Window& window() const noexcept { return window_; }
  const CoefficientSequence& coefficients() const noexcept { return c_; }

  /// Nonzero entries in row-major order.
  std::span<const SlantedEntry> entries() const noexcept { return entries_; }

  /// (1/N) c_{N l - k} inside the window, zero elsewhere.
  Complex entry(int l, int k) const {
    if (!window_.contains(l, k)) return {};
    return c_.scalar_at(scale_ * l - k) / static_cast<double>(scale_);
  }

  /// Columns of row l that can be nonzero, clipped to the window. Empty when lo > hi.
  std::pair<int, int> row_span(int l) const noexcept {
    if (c_.empty()) return {1, 0};
    const int lo = std::max(window_.col_min, scale_ * l - c_.last());
    const int hi = std::min(window_.col_max, scale_ * l - c_.first());
    return {lo, hi};
  }

 private:
  int scale_;
  CoefficientSequence c_;
  Window window_;
  std::vector<SlantedEntry> entries_;
};

inline SlantedOperator slanted_matrix(const CoefficientSequence& c, int n, Window window) {
  return SlantedOperator(n, c, window);
}

/// Finite sequence f_n on [offset, offset + values.size()) tagged with the
/// exponential weight r of the space it is measured in.
struct WeightedSequence {
  int offset = 0;
  std::vector<Complex> values;
  double weight = 0.0;

  int first() const noexcept { return offset; }
  int last() const noexcept { return offset + static_cast<int>(values.size()) - 1; }
  Complex at(int n) const noexcept {
    return (n < first() || n > last()) ? Complex{} : values[static_cast<std::size_t>(n - offset)];
  }
};

struct ApplyResult {
  WeightedSequence value;
  bool truncated = false;  // f had nonzero entries outside the column window
};

/// (Rf)_l = (1/N) sum_k c_{N l - k} f_k over the row window. Rows may be split
/// across `threads` workers; each row is summed in ascending k regardless, so
/// the result does not depend on the thread count.
inline ApplyResult apply(const SlantedOperator& op, const WeightedSequence& f, unsigned threads = 1) {
  const Window& w = op.window();
  ApplyResult out;
  for (int n = f.first(); n <= f.last(); ++n)
    if ((n < w.col_min || n > w.col_max) && f.at(n) != Complex{}) out.truncated = true;

  const int rows = w.row_max - w.row_min + 1;
  out.value.offset = w.row_min;
  out.value.weight = f.weight;
  out.value.values.assign(static_cast<std::size_t>(rows), Complex{});
  const double inv_n = 1.0 / op.scale();
  const CoefficientSequence& c = op.coefficients();

  auto work = [&](int row_begin, int row_end) {
    for (int l = row_begin; l < row_end; ++l) {
      const auto [lo, hi] = op.row_span(l);
      Complex acc{};
      for (int k = std::max(lo, f.first()); k <= std::min(hi, f.last()); ++k)
        acc += c.scalar_at(op.scale() * l - k) * f.at(k);
      out.value.values[static_cast<std::size_t>(l - w.row_min)] = acc * inv_n;
    }
  };

  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(rows)));
  if (threads == 1) {
    work(w.row_min, w.row_max + 1);
    return out;
  }
  std::vector<std::thread> pool;
  const int chunk = (rows + static_cast<int>(threads) - 1) / static_cast<int>(threads);
  for (int begin = w.row_min; begin <= w.row_max; begin += chunk)
    pool.emplace_back(work, begin, std::min(begin + chunk, w.row_max + 1));
  for (auto& t : pool) t.join();
  return out;
}

/// ||f||_{r,1} = sum e^{r|n|} |f_n| for p = 1, and
/// ||f||_{r,2} = (sum e^{r|n|} |f_n|^2)^{1/2} for p = 2, over the stored window.
inline double weighted_norm(const WeightedSequence& f, double r, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("weighted_norm: p must be 1 or 2");
  double s = 0.0;
  for (int n = f.first(); n <= f.last(); ++n) {
    const double mag = std::abs(f.at(n));
    s += std::exp(r * std::abs(n)) * (p == 1 ? mag : mag * mag);
  }
  return p == 1 ? s : std::sqrt(s);
}

/// Number of coefficients on each side needed so that (rho + 0.01)^n < 1e-12.
inline std::size_t default_coefficient_span(double rho) {
  const double rate = rho + 0.01;
  if (rate >= 1.0) throw NotContractiveError("default_coefficient_span: spectral radius too close to 1");
  return static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(rate)));
}

/// Pointwise transfer operator of a scalar symbol m with no poles on the
/// circle. Construction rejects m unless rho(A) < 1, which places every pole
/// strictly inside the disk.
class RuelleOperator {
 public:
  RuelleOperator(Realization m, int n) : m_(std::move(m)), n_(n) {
    if (n_ < 2) throw std::invalid_argument("RuelleOperator: scaling N must be >= 2");
    if (!m_.is_scalar()) throw DimensionError("RuelleOperator: symbol must be scalar-valued");
    if (m_.state_dim() > 0 && spectral_radius(m_.A()) >= 1.0 - kContractiveMargin)
      throw PoleError("RuelleOperator: symbol may have poles on the unit circle");
  }

  const Realization& symbol() const noexcept { return m_; }
  int scale() const noexcept { return n_; }

  /// The N roots of w^N = z, w_p = |z|^{1/N} e^{i(theta + 2 pi p)/N},
  /// theta = arg z in (-pi, pi].
  std::vector<Complex> roots(Complex z) const {
    const double theta = std::arg(z);
    const double radius = std::pow(std::abs(z), 1.0 / n_);
    std::vector<Complex> w(static_cast<std::size_t>(n_));
    for (int p = 0; p < n_; ++p)
      w[static_cast<std::size_t>(p)] = std::polar(radius, (theta + 2.0 * std::numbers::pi * p) / n_);
    return w;
  }

  template <class F>
  Complex apply(F&& f, Complex z) const {
    if (std::abs(std::abs(z) - 1.0) > 1e-12)
      throw std::invalid_argument("RuelleOperator::apply: z must lie on the unit circle");
    Complex acc{};
    for (const Complex& w : roots(z)) acc += std::norm(eval_scalar(m_, w)) * f(w);
    return acc / static_cast<double>(n_);
  }

  /// (R1)(z).
  double apply_to_one(Complex z) const {
    return apply([](Complex) { return Complex(1.0); }, z).real();
  }

 private:
  Realization m_;
  int n_;
};

template <class F>
Complex apply_pointwise(const Realization& m, int n, F&& f, Complex z) {
  return RuelleOperator(m, n).apply(std::forward<F>(f), z);
}

/// Largest |(R1)(z) - target| over `points` equally spaced circle points.
inline double r1_deviation(const Realization& m, int n, double target, std::size_t points = 32) {
  const RuelleOperator op(m, n);
  double dev = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / points);
    dev = std::max(dev, std::abs(op.apply_to_one(z) - target));
  }
  return dev;
}

/// max (R1)(z) over `points` equally spaced circle points.
inline double r1_max(const Realization& m, int n, std::size_t points = 32) {
  const RuelleOperator op(m, n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < points; ++j) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / points);
    best = std::max(best, op.apply_to_one(z));
  }
  return best;
}

/// (1/N) sum_{w^N = 1} |m(w)|^2.
inline double trace_spectral(const Realization& m, int n) {
  const RuelleOperator op(m, n);
  double acc = 0.0;
  for (const Complex& w : op.roots(1.0)) acc += std::norm(eval_scalar(m, w));
  return acc / n;
}

/// (1/N) (D D* + B* G B + Y (I - A)^{-1} B + B* (I - A*)^{-1} Y*) for scalar m.
/// The two last terms are conjugate, so the value is real.
inline double trace_realization(const Realization& r, int n) {
  if (!r.is_scalar()) throw DimensionError("trace_realization: only scalar-valued symbols are supported");
  if (n < 1) throw std::invalid_argument("trace_realization: N must be positive");
  const double dd = std::norm(r.D()(0, 0));
  if (r.state_dim() == 0) return dd / n;
  const Matrix gram = observability_gramian(r);
  const Matrix y = y_vector(r, gram);
  const Matrix i_minus_a = Matrix::identity(r.state_dim()) - r.A();
  const Complex cross = (y * solve(i_minus_a, r.B()))(0, 0);
  const Complex center = (r.B().adjoint() * gram * r.B())(0, 0);
  return (dd + center.real() + 2.0 * cross.real()) / n;
}

/// Trace of the slanted matrix, (1/N) sum_k c_{(N-1) k}, over the stored window.
inline double trace_coefficients(const CoefficientSequence& c, int n) {
  if (!c.is_scalar()) throw DimensionError("trace_coefficients: coefficients must be scalar");
  if (n < 2) throw std::invalid_argument("trace_coefficients: N must be >= 2");
  const int stride = n - 1;
  Complex acc{};
  for (int k = c.first() / stride - 1; k <= c.last() / stride + 1; ++k) acc += c.scalar_at(stride * k);
  return acc.real() / n;
}

struct ContinuityReport {
  double decay_constant = 0.0;  // C with |c_k| <= C e^{-alpha |k|}
  double bound = 0.0;           // operator bound E_beta -> E_beta' in the weighted l1 norms
  double max_ratio = 0.0;       // largest ||Rf||_{beta',1} seen with ||f||_{beta,1} = 1
  std::size_t trials = 0;
  bool ok = false;
};

/// Samples random f with ||f||_{beta,1} = 1 supported on [-support, support]
/// and checks ||Rf||_{beta',1} against
///   (C/N) sum_l e^{-(N alpha - beta') |l|},
/// which follows from |c_{Nl-k}| <= C e^{-alpha|Nl-k|}, |Nl - k| >= N|l| - |k|
/// and alpha < beta.
inline ContinuityReport continuity_certificate(const CoefficientSequence& c, double alpha, double beta,
                                               double beta_prime, int n, std::size_t trials,
                                               int support = 16, std::uint64_t seed = 0x5eedULL) {
  if (!(alpha < beta)) throw std::invalid_argument("continuity_certificate: requires alpha < beta");
  if (!(beta_prime < n * alpha))
    throw std::invalid_argument("continuity_certificate: requires beta' < N alpha");
  if (!c.is_scalar()) throw DimensionError("continuity_certificate: coefficients must be scalar");

  ContinuityReport rep;
  rep.trials = trials;
  for (int k = c.first(); k <= c.last(); ++k)
    rep.decay_constant = std::max(rep.decay_constant, std::abs(c.scalar_at(k)) * std::exp(alpha * std::abs(k)));
  const double q = std::exp(-(n * alpha - beta_prime));
  rep.bound = rep.decay_constant / n * (1.0 + q) / (1.0 - q);

  // every row that can touch [-support, support]
  const Window window{static_cast<int>(std::floor(static_cast<double>(-support + c.first()) / n)),
                      static_cast<int>(std::ceil(static_cast<double>(support + c.last()) / n)), -support,
                      support};
  const SlantedOperator op(n, c, window);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    WeightedSequence f{-support, std::vector<Complex>(static_cast<std::size_t>(2 * support + 1)), beta};
    // mix spread-out and concentrated samples
    const double concentration = 4.0 * u(rng);
    for (int k = -support; k <= support; ++k)
      f.values[static_cast<std::size_t>(k + support)] =
          Complex(g(rng), g(rng)) * std::exp(-(beta + concentration) * std::abs(k));
    const double norm = weighted_norm(f, beta, 1);
    if (norm == 0.0) continue;
    for (auto& v : f.values) v /= norm;
    const double ratio = weighted_norm(apply(op, f).value, beta_prime, 1);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  rep.ok = rep.max_ratio <= rep.bound * (1.0 + 1e-12);
  return rep;
}

}  // namespace realize
