#include <gtest/gtest.h>

#include "realize/infinite_product.hpp"
#include "support.hpp"

using namespace realize;
using testing_support::Gen;
using testing_support::haar_father;
using testing_support::max_diff;

namespace {

Realization haar() { return preset_haar(); }

std::vector<Complex> dyadic_points(std::size_t n) {
  std::vector<Complex> zs;
  for (std::size_t k = 1; k <= n; ++k) zs.push_back(std::polar(1.0, std::numbers::pi / std::pow(2.0, static_cast<double>(k))));
  return zs;
}

/// Random square realization with M(1) = I: M(z) = I + (1 - z) G(z) shape is
/// obtained by subtracting the value at one from the feedthrough.
Realization normalized_square(Gen& g, std::size_t d, std::size_t p) {
  const Realization r = g.realization(d, p, p);
  const Matrix at_one = eval(r, 1.0);
  return Realization(r.A(), r.B(), r.C(), r.D() - at_one + Matrix::identity(p));
}

}  // namespace

TEST(ToeplitzSymbol, HaarClosedForm) {
  Gen g(80);
  for (int i = 0; i < 20; ++i) {
    const Complex z = g.circle_point();
    EXPECT_LE(std::abs(toeplitz_symbol_eval(haar(), z)(0, 0) - z / (2.0 - z)), 1e-15);
  }
  EXPECT_NEAR(std::abs(toeplitz_symbol_eval(haar(), 1.0)(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(ToeplitzSymbol, OriginGivesStateMatrix) {
  Gen g(81);
  const Realization r = g.realization(3, 2, 2);
  EXPECT_EQ(toeplitz_symbol_eval(r, 0.0), r.A());
}

TEST(ToeplitzSymbol, ZeroFeedthroughIsOneTerm) {
  Gen g(82);
  const Realization r(g.contractive(3, 0.5), g.matrix(3, 2), g.matrix(2, 3), Matrix(2, 2));
  const Complex z = g.circle_point();
  EXPECT_LE(max_diff(toeplitz_symbol_eval(r, z), r.A() + r.B() * r.C() * z), 1e-14);
}

TEST(ToeplitzSymbol, SingularResolventReported) {
  const Realization r(Matrix{{0}}, Matrix{{1}}, Matrix{{1}}, Matrix{{1}});
  EXPECT_THROW(toeplitz_symbol_eval(r, 1.0), PoleError);
}

TEST(ToeplitzNorm, HaarIsOne) { EXPECT_NEAR(toeplitz_norm_estimate(haar(), 256), 1.0, 1e-12); }

TEST(ToeplitzNorm, ZeroSymbol) {
  const Realization r(Matrix(2, 2), Matrix(2, 1), Matrix(1, 2), Matrix{{0.3}});
  EXPECT_EQ(toeplitz_norm_estimate(r, 64), 0.0);
}

TEST(ToeplitzNorm, GridRefinementIsStable) {
  EXPECT_LE(std::abs(toeplitz_norm_estimate(haar(), 64) - toeplitz_norm_estimate(haar(), 256)), 1e-3);
}

TEST(ToeplitzNorm, UnstableFeedthroughRejected) {
  const Realization r(Matrix{{0}}, Matrix{{1}}, Matrix{{1}}, Matrix{{1.0}});
  EXPECT_THROW(toeplitz_norm_estimate(r, 64), std::domain_error);
  EXPECT_THROW(toeplitz_section(r, 2), std::domain_error);
}

TEST(ToeplitzSection, SingleBlock) {
  Gen g(83);
  const Realization r(g.contractive(2, 0.5), g.matrix(2, 2), g.matrix(2, 2), g.contractive(2, 0.5));
  const ToeplitzSection s = toeplitz_section(r, 1);
  EXPECT_EQ(s.state, r.A());
  EXPECT_EQ(s.input, r.B());
  EXPECT_EQ(s.output, r.C());
  EXPECT_EQ(s.feedthrough, r.D());
}

TEST(ToeplitzSection, HaarTwoBlocks) {
  const ToeplitzSection s = toeplitz_section(haar(), 2);
  EXPECT_LE(max_diff(s.state, Matrix{{0, 0.5}, {0, 0}}), 0.0);
  EXPECT_LE(max_diff(s.input, Matrix{{0.5}, {1}}), 0.0);
  EXPECT_LE(max_diff(s.output, Matrix{{0.5, 0.25}}), 0.0);
  EXPECT_LE(max_diff(s.feedthrough, Matrix{{0.25}}), 0.0);
}

TEST(ToeplitzSection, BlockStructure) {
  Gen g(84);
  const Realization r(g.contractive(2, 0.5), g.matrix(2, 2), g.matrix(2, 2), g.contractive(2, 0.6));
  const ToeplitzSection s = toeplitz_section(r, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const Matrix block = s.state.block(2 * i, 2 * j, 2, 2);
      if (i == j) EXPECT_EQ(block, r.A());
      else if (j < i) EXPECT_EQ(block, Matrix(2, 2));
      else EXPECT_LE(max_diff(block, r.B() * power(r.D(), j - i - 1) * r.C()), 1e-14);
    }
}

TEST(ToeplitzSection, NormDominatedBySymbolNorm) {
  const double symbol = toeplitz_norm_estimate(haar(), 256);
  for (std::size_t n = 1; n <= 32; ++n)
    EXPECT_LE(operator_norm(toeplitz_section(haar(), n).state), symbol + 1e-6) << "n=" << n;
}

TEST(ToeplitzSectionProperty, NormDominationForRandomSymbols) {
  Gen g(85);
  for (int trial = 0; trial < 10; ++trial) {
    const Realization r(g.contractive(2, 0.5), g.matrix(2, 1), g.matrix(1, 2), Matrix::scalar(g.uniform(-0.8, 0.8)));
    const double symbol = toeplitz_norm_estimate(r, 1024);
    for (std::size_t n : {1U, 4U, 12U})
      EXPECT_LE(operator_norm(toeplitz_section(r, n).state), symbol * (1.0 + 1e-3) + 1e-6);
  }
}

TEST(ToeplitzSectionProperty, EqualsDirectProduct) {
  Gen g(86);
  for (int trial = 0; trial < 10; ++trial) {
    const Realization r(g.contractive(2, 0.5), g.matrix(2, 2), g.matrix(2, 2), g.contractive(2, 0.7));
    for (std::size_t n = 1; n <= 8; ++n) {
      const ToeplitzSection s = toeplitz_section(r, n);
      std::vector<Complex> zs;
      Matrix direct = Matrix::identity(2);
      for (std::size_t k = 0; k < n; ++k) {
        zs.push_back(1.0 + 0.3 * g.circle_point());
        direct = direct * eval(r, zs.back());
      }
      EXPECT_LE(max_diff(eval_section(s, zs), direct), 1e-9 * std::max(1.0, max_abs(direct)));
      const std::vector<Realization> copies(n, r);
      EXPECT_LE(max_diff(eval_section(s, zs), eval_multivar(multivar_product(copies), zs)), 1e-9 * std::max(1.0, max_abs(direct)));
    }
  }
}

TEST(ToeplitzSection, HaarAlongDyadicPoints) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const std::vector<Complex> zs = dyadic_points(n);
    Complex direct = 1.0;
    for (const Complex& z : zs) direct *= testing_support::haar_poly(z);
    EXPECT_LE(std::abs(eval_section(toeplitz_section(haar(), n), zs)(0, 0) - direct), 1e-9);
  }
}

TEST(ProductAlongPoints, AllOnesGiveIdentity) {
  Gen g(87);
  const Realization r = normalized_square(g, 3, 2);
  const std::vector<Complex> zs(10, 1.0);
  const ProductResult p = product_along_points(r, zs, 1e-12);
  EXPECT_LE(max_diff(p.value, Matrix::identity(2)), 1e-10);
  EXPECT_EQ(p.tail_bound, 0.0);
}

TEST(ProductAlongPoints, HaarSinglePoint) {
  const Complex zs[] = {2.0};
  EXPECT_NEAR(std::abs(product_along_points(haar(), zs, 1e-12).value(0, 0) - 0.75), 0.0, 1e-15);
}

TEST(ProductAlongPoints, HaarDyadicMatchesCascade) {
  const std::vector<Complex> zs = dyadic_points(40);
  const ProductResult p = product_along_points(haar(), zs, 1e-9);
  EXPECT_LE(std::abs(p.value(0, 0)), 1.0);
  EXPECT_LE(std::abs(p.value(0, 0) - father_hat(haar(), 2, 0.5, 1e-13)), 1e-9);
  EXPECT_LE(p.tail_bound, 1e-9);
  EXPECT_LT(p.cut, zs.size());
}

TEST(ProductAlongPoints, RequiresIdentityAtOne) {
  Gen g(88);
  const Complex zs[] = {1.1};
  EXPECT_THROW(product_along_points(g.realization(2, 2, 2), zs, 1e-9), ConventionError);
}

TEST(ProductAlongPoints, PoleReported) {
  const Complex zs[] = {0.0};
  EXPECT_THROW(product_along_points(haar(), zs, 1e-9), PoleError);
}

TEST(ProductAlongPointsProperty, ConstantBoundsEveryFactor) {
  Gen g(89);
  for (int trial = 0; trial < 10; ++trial) {
    const Realization r = normalized_square(g, static_cast<std::size_t>(g.integer(1, 3)), 2);
    std::vector<Complex> zs;
    for (int k = 1; k <= 30; ++k) zs.push_back(std::polar(1.0, g.uniform(-1, 1) / (k * k)));
    const ProductResult p = product_along_points(r, zs, 1e-6);
    for (const Complex& z : zs)
      EXPECT_LE(operator_norm(eval(r, z) - Matrix::identity(2)), p.constant * std::abs(1.0 - z) * (1 + 1e-9) + 1e-14);
    // the factors past the cut move the product by a relative amount of order tail_bound
    Matrix head = Matrix::identity(2);
    for (std::size_t k = 0; k < p.cut; ++k) head = head * eval(r, zs[k]);
    const double rel = operator_norm(p.value - head) / std::max(operator_norm(head), 1e-300);
    EXPECT_LE(rel, std::expm1(p.tail_bound) * operator_norm(head) * operator_norm(inverse(head)) + 1e-12);
  }
}

TEST(FatherHat, OriginIsOne) { EXPECT_EQ(father_hat(haar(), 2, 0.0, 1e-12), Complex(1.0)); }

TEST(FatherHat, HaarAtOneHalf) {
  const Complex v = father_hat(haar(), 2, 0.5, 1e-13);
  EXPECT_LE(std::abs(v - Complex(0, -2.0 / std::numbers::pi)), 1e-12);
  EXPECT_NEAR(std::abs(v), 0.63662, 1e-5);
}

TEST(FatherHat, HaarVanishesAtIntegers) {
  for (double w : {1.0, -2.0, 3.0}) EXPECT_LE(std::abs(father_hat(haar(), 2, w, 1e-12)), 1e-12);
}

TEST(FatherHat, RequiresUnitDc) {
  const Realization raw = scaled(haar(), std::sqrt(2.0));
  EXPECT_THROW(father_hat(raw, 2, 0.3, 1e-10), ConventionError);
}

TEST(FatherHat, HaarCascadeConstant) { EXPECT_NEAR(cascade_constant(haar()), 0.5, 1e-12); }

TEST(FatherHatProperty, HaarClosedForm) {
  Gen g(90);
  const Cascade cascade(haar(), 2);
  for (int i = 0; i < 50; ++i) {
    const double w = g.uniform(-4, 4);
    EXPECT_LE(std::abs(cascade(w, 1e-12) - haar_father(w)), 1e-8) << "w=" << w;
  }
}

TEST(FatherHatProperty, TruncationIsWithinTolerance) {
  const Realization d4 = preset_daubechies4();
  for (const Realization& m : {haar(), d4})
    for (double w : {0.1, 0.5, 0.9, 2.3})
      for (double tol : {1e-4, 1e-8}) EXPECT_LE(std::abs(father_hat(m, 2, w, tol) - father_hat(m, 2, w, tol / 10)), tol);
}

TEST(FatherHatProperty, ThreeBandHaarAnalogue) {
  // m(z) = (1 + z^{-1} + z^{-2}) / 3 has phi^(w) = e^{-i pi w} sin(pi w) / (pi w) as well
  const Complex taps[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const Realization m = fir_realization(taps);
  for (double w : {0.2, 0.7, 1.5, -2.6}) EXPECT_LE(std::abs(father_hat(m, 3, w, 1e-12) - haar_father(w)), 1e-9);
}

TEST(PartialProductL2, HaarFirstIntegralIsZerothCoefficient) {
  EXPECT_NEAR(partial_product_l2(haar(), 2, 0, 64), 0.5, 1e-12);
}

TEST(PartialProductL2, HaarTelescopes) {
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_NEAR(partial_product_l2(haar(), 2, k, 64), 0.5, 1e-6);
}

TEST(PartialProductL2, PaperPolyphaseIntegralsGrowByN) {
  // |m|^2 carries an extra factor N per factor, and the window grows by N per step
  const Realization raw = lowpass_symbol(build_filter(RationalInner::identity(2), 2), Convention::paper_polyphase);
  double prev = partial_product_l2(raw, 2, 0, 64);
  EXPECT_NEAR(prev, 1.0, 1e-10);
  for (std::size_t k = 1; k <= 3; ++k) {
    const double cur = partial_product_l2(raw, 2, k, 64);
    EXPECT_NEAR(cur / prev, 2.0, 1e-6);
    prev = cur;
  }
}

TEST(PartialProductL2Property, UnitDcFiltersTelescope) {
  Gen g(91);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 3));
    const Realization m = lowpass_symbol(build_filter(g.inner(n, 1), n), Convention::unit_dc);
    // poles up to 0.9 need a fine grid for 1e-6 quadrature accuracy
    const double i0 = partial_product_l2(m, static_cast<int>(n), 0, 1024);
    EXPECT_NEAR(i0, autocorrelation_closed(m, 0).scalar_at(0).real(), 1e-6);
    for (std::size_t k = 1; k <= 2; ++k) EXPECT_NEAR(partial_product_l2(m, static_cast<int>(n), k, 1024), i0, 1e-6);
  }
}

TEST(PartialProductL2, OddQuadratureRejected) {
  EXPECT_THROW(partial_product_l2(haar(), 2, 1, 63), std::invalid_argument);
}

TEST(L2NormEstimate, HaarCertificate) {
  const L2Certificate cert = l2_norm_estimate(haar(), 2, 4);
  ASSERT_EQ(cert.integrals.size(), 5U);
  for (double v : cert.integrals) EXPECT_NEAR(v, 0.5, 1e-6);
  EXPECT_NEAR(cert.liminf, 0.5, 1e-6);
  EXPECT_NEAR(cert.bound, 1.0, 1e-6);
  EXPECT_TRUE(cert.finite);
  EXPECT_NEAR(cert.r1_max, 0.5, 1e-12);
  // oracle: int_{-L}^{L} sinc^2 by Simpson approaches 1 from below
  const double length = 64.0;
  const std::size_t steps = 64 * 2 * 64;
  const double h = 2 * length / steps;
  double s = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double w = -length + i * h;
    const double f = std::norm(haar_father(w));
    s += (i == 0 || i == steps ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
  }
  s *= h / 3.0;
  EXPECT_NEAR(s, 1.0, 2.0 / (std::numbers::pi * std::numbers::pi * length));
  EXPECT_LE(s, cert.bound + 1e-6);
}

TEST(L2NormEstimate, Daubechies4IsFinite) {
  const L2Certificate cert = l2_norm_estimate(preset_daubechies4(), 2, 4);
  EXPECT_TRUE(cert.finite);
  EXPECT_LE(cert.r1_max, 1.0);
  EXPECT_NEAR(cert.r1_max, 0.5, 1e-12);
  EXPECT_NEAR(cert.bound, 1.0, 1e-6);
}

TEST(L2NormEstimate, ConstantSymbolIsFlaggedNonL2) {
  const Realization one = Realization::constant(Matrix::scalar(1.0));
  const L2Certificate cert = l2_norm_estimate(one, 2, 4);
  EXPECT_FALSE(cert.finite);
  for (std::size_t k = 0; k < cert.integrals.size(); ++k) EXPECT_NEAR(cert.integrals[k], std::pow(2.0, k), 1e-9);
}

TEST(L2NormEstimate, TransferBoundAboveOneRefused) {
  EXPECT_THROW(l2_norm_estimate(scaled(haar(), 2.0), 2, 2), std::domain_error);
}
