#include <gtest/gtest.h>

#include "realize/markov.hpp"
#include "realize/wavelet.hpp"
#include "support.hpp"

using namespace realize;
using testing_support::Gen;
using testing_support::max_diff;

namespace {

Realization haar() { return preset_haar(); }

Realization half_diagonal() { return Realization(Matrix{{0.5}}, Matrix{{1}}, Matrix{{1}}, Matrix{{0}}); }

}  // namespace

TEST(MarkovParameters, Haar) {
  const CoefficientSequence h = markov_parameters(haar(), 3);
  EXPECT_EQ(h.scalar_at(0), Complex(0.5));
  EXPECT_EQ(h.scalar_at(1), Complex(0.5));
  EXPECT_EQ(h.scalar_at(2), Complex(0.0));
  EXPECT_EQ(h.scalar_at(3), Complex(0.0));
}

TEST(MarkovParameters, NilpotentStateGivesFiniteSequence) {
  // 3x3 shift, nilpotent of index 3
  const Complex taps[] = {1.0, 2.0, -1.0, 0.5};
  const CoefficientSequence h = markov_parameters(fir_realization(taps), 8);
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(h.scalar_at(k), taps[k]);
  for (int k = 4; k <= 8; ++k) EXPECT_EQ(h.scalar_at(k), Complex(0.0));
}

TEST(MarkovParameters, ConstantRealization) {
  const Matrix d{{1, 2}, {3, 4}};
  const CoefficientSequence h = markov_parameters(Realization::constant(d), 4);
  EXPECT_EQ(h.at(0), d);
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(h.at(k), Matrix(2, 2));
}

TEST(AutocorrelationClosed, HaarGolden) {
  const CoefficientSequence c = autocorrelation_closed(haar(), 3);
  EXPECT_NEAR(std::abs(c.scalar_at(-1) - 0.25), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.scalar_at(0) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.scalar_at(1) - 0.25), 0.0, 1e-14);
  for (int n : {-3, -2, 2, 3}) EXPECT_LE(std::abs(c.scalar_at(n)), 1e-14);
}

TEST(AutocorrelationClosed, ZeroFeedthroughUsesGramian) {
  Gen g(30);
  const Realization r(g.contractive(3, 0.6), g.matrix(3, 1), g.matrix(1, 3), Matrix(1, 1));
  const Matrix gam = observability_gramian(r);
  const CoefficientSequence c = autocorrelation_closed(r, 5);
  for (std::size_t n = 1; n <= 5; ++n) {
    const Matrix expected = r.B().adjoint() * gam * power(r.A(), n) * r.B();
    EXPECT_LE(max_diff(c.at(static_cast<int>(n)), expected), 1e-12);
  }
}

TEST(AutocorrelationClosed, NormalizedGramianGivesPlainPowers) {
  Gen g(31);
  const Realization r =
      normalize_gramian(Realization(g.contractive(3, 0.6), g.matrix(3, 1), g.matrix(1, 3), Matrix(1, 1)));
  const CoefficientSequence c = autocorrelation_closed(r, 5);
  for (std::size_t n = 1; n <= 5; ++n) {
    const Matrix expected = r.B().adjoint() * power(r.A(), n) * r.B();
    EXPECT_LE(max_diff(c.at(static_cast<int>(n)), expected), 1e-10);
  }
}

TEST(AutocorrelationClosed, NonContractiveRejected) {
  const Realization r(Matrix{{1.5}}, Matrix{{1}}, Matrix{{1}}, Matrix{{0}});
  EXPECT_THROW(autocorrelation_closed(r, 2), NotContractiveError);
}

TEST(AutocorrelationClosed, ConstantFunction) {
  const CoefficientSequence c = autocorrelation_closed(Realization::constant(Matrix::scalar(Complex(0, 3))), 2);
  EXPECT_NEAR(c.scalar_at(0).real(), 9.0, 1e-15);
  EXPECT_EQ(c.scalar_at(1), Complex{});
}

TEST(AutocorrelationConvolution, HaarExact) {
  const CoefficientSequence a = autocorrelation_convolution(haar(), 3, 4);
  const CoefficientSequence b = autocorrelation_closed(haar(), 3);
  for (int n = -3; n <= 3; ++n) EXPECT_NEAR(std::abs(a.scalar_at(n) - b.scalar_at(n)), 0.0, 1e-15);
}

TEST(AutocorrelationConvolution, ZeroFunction) {
  const Realization zero(Matrix{{0.5}}, Matrix{{1}}, Matrix{{0}}, Matrix{{0}});
  const CoefficientSequence c = autocorrelation_convolution(zero, 4);
  for (int n = -4; n <= 4; ++n) EXPECT_EQ(c.scalar_at(n), Complex{});
}

TEST(AutocorrelationProperty, ClosedFormMatchesConvolution) {
  Gen g(32);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = static_cast<std::size_t>(g.integer(1, 4));
    const std::size_t p = static_cast<std::size_t>(g.integer(1, 2)), q = static_cast<std::size_t>(g.integer(1, 2));
    const Realization r = g.realization(d, p, q);
    const CoefficientSequence a = autocorrelation_closed(r, 10);
    const CoefficientSequence b = autocorrelation_convolution(r, 10);
    for (int n = -10; n <= 10; ++n)
      EXPECT_LE(max_diff(a.at(n), b.at(n)), 1e-10 * std::max(1.0, frobenius_norm(a.at(0)))) << "n=" << n;
  }
}

TEST(AutocorrelationProperty, HermitianSymmetry) {
  Gen g(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Realization r = g.realization(3, 2, 2);
    const CoefficientSequence c = autocorrelation_closed(r, 6);
    for (int n = 1; n <= 6; ++n) EXPECT_LE(max_diff(c.at(-n), c.at(n).adjoint()), 1e-14);
  }
}

TEST(AutocorrelationProperty, FourierOracle) {
  Gen g(34);
  for (int trial = 0; trial < 20; ++trial) {
    const Realization r = g.realization(static_cast<std::size_t>(g.integer(1, 4)), 1, 1);
    const CoefficientSequence c = autocorrelation_closed(r, 10);
    const std::vector<double> samples = testing_support::power_samples(r, 512);
    const double scale = std::max(1.0, std::abs(c.scalar_at(0)));
    for (int n = -10; n <= 10; ++n)
      EXPECT_LE(std::abs(testing_support::fft_coefficient(samples, n) - c.scalar_at(n)), 1e-8 * scale);
  }
}

TEST(AutocorrelationProperty, ToeplitzMatrixIsPositiveSemidefinite) {
  Gen g(35);
  for (int trial = 0; trial < 20; ++trial) {
    const Realization r = g.realization(3, 1, 1);
    const CoefficientSequence c = autocorrelation_closed(r, 8);
    for (std::size_t k = 1; k <= 8; ++k) {
      Matrix t(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) t(i, j) = c.scalar_at(static_cast<int>(i) - static_cast<int>(j));
      EXPECT_TRUE(is_positive_semidefinite(t, 1e-10)) << "K=" << k;
    }
  }
}

TEST(AutocorrelationProperty, FirstCoefficientsFromControllabilityMatrix) {
  Gen g(36);
  const Realization r = g.realization(3, 1, 1);
  const CoefficientSequence c = autocorrelation_closed(r, 3);
  const Matrix y = y_vector(r, observability_gramian(r));
  const Matrix ctrl = hstack({r.B(), r.A() * r.B(), r.A() * r.A() * r.B()});
  const Matrix row = y * ctrl;
  for (int n = 1; n <= 3; ++n) EXPECT_LE(std::abs(row(0, static_cast<std::size_t>(n - 1)) - c.scalar_at(n)), 1e-13);
}

TEST(ChRecursion, HaarCharacteristicPolynomial) {
  const std::vector<Complex> a = ch_recursion(haar());
  ASSERT_EQ(a.size(), 1U);
  EXPECT_EQ(a[0], Complex(0.0));
  const CoefficientSequence c = autocorrelation_closed(haar(), 10);
  for (int p = 1; p <= 6; ++p) EXPECT_LE(ch_residual(c, a, p), 1e-15);
}

TEST(ChRecursion, HalfDiagonalGeometric) {
  const std::vector<Complex> a = ch_recursion(half_diagonal());
  ASSERT_EQ(a.size(), 1U);
  EXPECT_NEAR(std::abs(a[0] + 0.5), 0.0, 1e-15);
  const CoefficientSequence c = autocorrelation_closed(half_diagonal(), 10);
  for (int p = 1; p <= 6; ++p) EXPECT_NEAR(std::abs(c.scalar_at(p + 1) - 0.5 * c.scalar_at(p)), 0.0, 1e-14);
}

TEST(ChRecursion, RandomResidual) {
  Gen g(37);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = static_cast<std::size_t>(g.integer(1, 4));
    const Realization r = g.realization(d, 1, 1);
    const CoefficientSequence c = autocorrelation_closed(r, 12);
    const std::vector<Complex> a = ch_recursion(r);
    for (int p = 1; p <= 6; ++p) EXPECT_LE(ch_residual(c, a, p), 1e-10 * std::abs(c.scalar_at(0)));
  }
}

TEST(ChRecursion, RequiresStates) { EXPECT_THROW(ch_recursion(Realization::constant(Matrix::scalar(1))), std::invalid_argument); }

TEST(CharacteristicCoefficients, KnownMatrix) {
  // (x - 1)(x - 2)(x + 3) = x^3 - 7x + 6
  const Complex diag[] = {1.0, 2.0, -3.0};
  const std::vector<Complex> a = characteristic_coefficients(Matrix::diagonal(diag));
  EXPECT_NEAR(std::abs(a[0] - 6.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(a[1] + 7.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(a[2]), 0.0, 1e-13);
}

TEST(DecayCheck, HaarFiniteSupport) {
  const DecayCheck d = decay_check(autocorrelation_closed(haar(), 10), 0.0);
  EXPECT_TRUE(d.ok);
  // |c_1| = 1/4 against rate 0.01 dominates |c_0| = 1/2
  EXPECT_NEAR(d.constant, 25.0, 1e-10);
  EXPECT_DOUBLE_EQ(d.rate, 0.01);
}

TEST(DecayCheck, HalfDiagonalDecaysGeometrically) {
  const CoefficientSequence c = autocorrelation_closed(half_diagonal(), 30);
  for (int k = 1; k <= 30; ++k)
    EXPECT_NEAR(std::abs(c.scalar_at(k)), (4.0 / 3.0) * std::pow(0.5, k), 1e-14);
  EXPECT_TRUE(decay_check(c, 0.5).ok);
}

TEST(DecayCheck, NonDecayingSequenceFails) {
  const std::vector<Complex> ones(81, 1.0);
  const CoefficientSequence c = CoefficientSequence::from_scalars(-40, ones);
  EXPECT_FALSE(decay_check(c, 0.5).ok);
}

TEST(DecayProperty, FittedRateWithinSpectralRadius) {
  Gen g(38);
  for (int trial = 0; trial < 20; ++trial) {
    const Realization r = g.realization(static_cast<std::size_t>(g.integer(1, 4)), 1, 1);
    const double rho = spectral_radius(r.A());
    const CoefficientSequence c = autocorrelation_closed(r, 40);
    EXPECT_LE(fitted_decay_rate(c, 2, 12), rho + 0.05);
    EXPECT_TRUE(decay_check(c, rho).ok);
  }
}

TEST(CoefficientSequence, OutsideWindowReadsZero) {
  const Complex v[] = {1.0, 2.0};
  const CoefficientSequence c = CoefficientSequence::from_scalars(3, v);
  EXPECT_EQ(c.scalar_at(2), Complex{});
  EXPECT_EQ(c.scalar_at(4), Complex(2.0));
  EXPECT_EQ(c.scalar_at(5), Complex{});
}
