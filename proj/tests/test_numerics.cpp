// Tests for the numerical floor: special-function series, deterministic
// trapezoidal quadrature, the complex Jacobi eigensolver, and spectrum
// entropies. Expected values were frozen from high-precision independent
// computations.

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <cvqkd/numerics.hpp>

using namespace cvqkd;

// ---------------------------------------------------------------------------
// gen_exp
// ---------------------------------------------------------------------------

TEST(GenExp, ReducesToExpCoshSinh) {
  EXPECT_NEAR(gen_exp(1, 0, 2.0), 7.3890560989306502, 1e-13);
  for (double x : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(gen_exp(2, 0, x), std::cosh(x), 1e-15 * std::cosh(x));
    EXPECT_NEAR(gen_exp(2, 1, x), std::sinh(x), 1e-15 * std::cosh(x));
  }
}

TEST(GenExp, FourfoldBranchValue) {
  EXPECT_NEAR(gen_exp(4, 1, 1.0), 1.008336089225849, 1e-12);
}

TEST(GenExp, ZeroArgument) {
  EXPECT_EQ(gen_exp(3, 0, 0.0), 1.0);
  EXPECT_EQ(gen_exp(3, 1, 0.0), 0.0);
  EXPECT_EQ(gen_exp(3, 2, 0.0), 0.0);
}

TEST(GenExp, DomainErrors) {
  EXPECT_THROW(gen_exp(2, 0, -0.5), std::domain_error);
  EXPECT_THROW(gen_exp(2, 2, 1.0), std::domain_error);
  EXPECT_THROW(gen_exp(0, 0, 1.0), std::domain_error);
}

// The d branches of the series partition the exponential series.
TEST(GenExp, BranchesPartitionExp) {
  for (unsigned d = 1; d <= 16; ++d) {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0}) {
      double sum = 0.0;
      for (unsigned k = 0; k < d; ++k) sum += gen_exp(d, k, x);
      EXPECT_NEAR(sum, std::exp(x), 1e-12 * std::exp(x))
          << "d=" << d << " x=" << x;
    }
  }
}

// ---------------------------------------------------------------------------
// bessel_i
// ---------------------------------------------------------------------------

TEST(BesselI, KnownValues) {
  EXPECT_EQ(bessel_i(0, 0.0), 1.0);
  EXPECT_EQ(bessel_i(1, 0.0), 0.0);
  EXPECT_EQ(bessel_i(5, 0.0), 0.0);
  EXPECT_NEAR(bessel_i(0, 1.0), 1.2660658777520083, 1e-14);
  EXPECT_NEAR(bessel_i(3, 2.5), 0.47437040877803559, 1e-14);
}

TEST(BesselI, DomainError) {
  EXPECT_THROW(bessel_i(0, -1.0), std::domain_error);
}

// Generating identity: e^{x cos t} = I_0(x) + 2 sum_n I_n(x) cos(n t).
TEST(BesselI, GeneratingIdentity) {
  auto angular_sum = [](double x, double t) {
    double sum = bessel_i(0, x);
    for (unsigned n = 1; n < 400; ++n) {
      const double in = bessel_i(n, x);
      sum += 2.0 * in * std::cos(n * t);
      if (in == 0.0) break;  // all later orders underflow too
    }
    return sum;
  };
  // At t = 0 every term is positive, so the sum is perfectly conditioned
  // and a tight relative tolerance is meaningful for any x.
  for (double x : {0.1, 1.0, 5.0, 15.0, 30.0})
    EXPECT_NEAR(angular_sum(x, 0.0) / std::exp(x), 1.0, 1e-10) << "x=" << x;
  // Away from t = 0 the series alternates; for moderate x the cancellation
  // stays harmless and the identity holds to an absolute 1e-10.
  for (double x : {0.1, 1.0, 5.0}) {
    for (double t = 0.0; t <= pi + 1e-12; t += pi / 7.0) {
      EXPECT_NEAR(angular_sum(x, t), std::exp(x * std::cos(t)), 1e-10)
          << "x=" << x << " t=" << t;
    }
  }
  // For large x the alternating sum cancels down from terms of size ~e^x,
  // so the achievable accuracy is set by that scale, not by the result.
  for (double x : {15.0, 30.0}) {
    for (double t = 0.0; t <= pi + 1e-12; t += pi / 7.0) {
      EXPECT_NEAR(angular_sum(x, t), std::exp(x * std::cos(t)),
                  2e-14 * std::exp(x))
          << "x=" << x << " t=" << t;
    }
  }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

TEST(IntegrateLine, ConstantIsExact) {
  const double v = integrate_line([](double) { return 1.0; }, 0.0, 2.0, 0.1);
  EXPECT_EQ(v, 2.0);
}

TEST(IntegrateLine, LinearIsExact) {
  const double v = integrate_line([](double x) { return x; }, 0.0, 1.0, 0.05);
  EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(IntegrateLine, GaussianMass) {
  const double v = integrate_line(
      [](double x) { return std::exp(-x * x) / std::sqrt(pi); }, -8.0, 8.0,
      0.01);
  EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(IntegrateLine, HalvingTheStepImproves) {
  auto f = [](double x) { return std::exp(-0.37 * x * x + 0.2 * x); };
  const double exact =
      std::sqrt(pi / 0.37) * std::exp(0.04 / (4.0 * 0.37));
  const double coarse = integrate_line(f, -12.0, 12.0, 0.2);
  const double fine = integrate_line(f, -12.0, 12.0, 0.1);
  EXPECT_LE(std::abs(fine - exact), std::abs(coarse - exact) + 1e-15);
}

TEST(IntegratePolar, DiskArea) {
  const QuadratureSpec spec{0.01, 0.0, 0.04};
  const double v =
      integrate_polar([](double, double) { return 1.0; }, 2.0, 0.0, 2.0 * pi, spec);
  EXPECT_NEAR(v, pi * 4.0, 1e-4 * pi * 4.0);
}

TEST(IntegratePolar, SectorTimesSymmetryEqualsFull) {
  const QuadratureSpec spec{0.01, 0.0, 0.004};
  auto f = [](double r, double phi) {
    return std::exp(-r * r) * (1.0 + 0.3 * std::cos(4.0 * phi));
  };
  const double full = integrate_polar(f, 6.0, 0.0, 2.0 * pi, spec);
  const double sector = integrate_polar(f, 6.0, 0.0, 0.5 * pi, spec);
  EXPECT_NEAR(4.0 * sector, full, 1e-8);
}

TEST(QuadratureSpec, Validation) {
  EXPECT_NO_THROW(validate(QuadratureSpec{0.01, 0.0, 0.04}, true));
  EXPECT_THROW(validate(QuadratureSpec{0.0, 1.0, 0.04}, false),
               std::invalid_argument);
  EXPECT_THROW(validate(QuadratureSpec{2.0, 1.0, 0.04}, false),
               std::invalid_argument);
  EXPECT_THROW(validate(QuadratureSpec{0.01, 1.0, 0.0}, true),
               std::invalid_argument);
  EXPECT_NO_THROW(validate(QuadratureSpec{0.01, 1.0, 0.0}, false));
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver
// ---------------------------------------------------------------------------

TEST(HermitianEigenvalues, Identity) {
  HermitianMatrix m(3);
  for (std::size_t i = 0; i < 3; ++i) m(i, i) = 1.0;
  const HermitianSpectrum ev = hermitian_eigenvalues(m);
  ASSERT_EQ(ev.size(), 3u);
  for (double v : ev) EXPECT_NEAR(v, 1.0, 1e-14);
}

// 2x2 binary-outcome density matrix with error weight e = 0.1 and overlap
// magnitude e^{-1/2}: eigenvalues (1 +- sqrt(1 - 4 e (1-e)(1 - e^{-1})))/2.
TEST(HermitianEigenvalues, BinaryDensityMatrix) {
  const double e = 0.1;
  const double w = std::exp(-0.5);
  HermitianMatrix m(2);
  m(0, 0) = 1.0 - e;
  m(1, 1) = e;
  m(0, 1) = std::sqrt(e * (1.0 - e)) * w;
  m(1, 0) = m(0, 1);
  const HermitianSpectrum ev = hermitian_eigenvalues(m);
  EXPECT_NEAR(ev[0], 0.93944186157605628, 1e-12);
  EXPECT_NEAR(ev[1], 0.06055813842394372, 1e-12);
}

namespace {

HermitianMatrix test_matrix_3x3() {
  HermitianMatrix m(3);
  m(0, 0) = 1.3;
  m(1, 1) = -0.2;
  m(2, 2) = 0.7;
  m(0, 1) = Complex{0.4, 0.3};
  m(1, 0) = std::conj(m.a[1]);
  m(0, 2) = Complex{-0.1, 0.6};
  m(2, 0) = std::conj(m.a[2]);
  m(1, 2) = Complex{0.25, -0.45};
  m(2, 1) = std::conj(m.a[5]);
  return m;
}

// Power sum of the matrix spectrum via explicit matrix powers.
double trace_power(const HermitianMatrix& m, int p) {
  const std::size_t n = m.dim;
  std::vector<Complex> acc(m.a), tmp(n * n);
  for (int step = 1; step < p; ++step) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Complex s{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) s += acc[i * n + k] * m.a[k * n + j];
        tmp[i * n + j] = s;
      }
    acc.swap(tmp);
  }
  Complex tr{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) tr += acc[i * n + i];
  return tr.real();
}

}  // namespace

// Three eigenvalues are pinned by the first three spectral power sums.
TEST(HermitianEigenvalues, ComplexThreeByThreeMatchesPowerSums) {
  const HermitianMatrix m = test_matrix_3x3();
  const HermitianSpectrum ev = hermitian_eigenvalues(m);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_GE(ev[0], ev[1]);
  EXPECT_GE(ev[1], ev[2]);
  for (int p = 1; p <= 3; ++p) {
    double s = 0.0;
    for (double v : ev) s += std::pow(v, p);
    EXPECT_NEAR(s, trace_power(m, p), 1e-10) << "power " << p;
  }
}

TEST(HermitianEigenvalues, SumMatchesTrace) {
  const HermitianMatrix m = test_matrix_3x3();
  const HermitianSpectrum ev = hermitian_eigenvalues(m);
  double sum = 0.0, tr = 0.0;
  for (double v : ev) sum += v;
  for (std::size_t i = 0; i < m.dim; ++i) tr += m(i, i).real();
  EXPECT_NEAR(sum, tr, 1e-10 * static_cast<double>(m.dim));
}

TEST(HermitianEigenvalues, DiagonalUnitaryInvariance) {
  const HermitianMatrix m = test_matrix_3x3();
  const double phases[3] = {0.3, -1.1, 2.4};
  HermitianMatrix rotated(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      rotated(i, j) =
          std::polar(1.0, phases[j] - phases[i]) * m(i, j);
  const HermitianSpectrum a = hermitian_eigenvalues(m);
  const HermitianSpectrum b = hermitian_eigenvalues(rotated);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
}

TEST(HermitianEigenvalues, RejectsNonHermitian) {
  HermitianMatrix m(2);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(0, 1) = Complex{0.0, 0.5};
  m(1, 0) = Complex{0.0, 0.5};  // should be the conjugate
  EXPECT_THROW(hermitian_eigenvalues(m), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

TEST(EntropyOfSpectrum, PureAndUniform) {
  EXPECT_EQ(entropy_of_spectrum({1.0, 0.0}, 2), 0.0);
  EXPECT_NEAR(entropy_of_spectrum({0.5, 0.5}, 2), 1.0, 1e-15);
  EXPECT_NEAR(entropy_of_spectrum({0.25, 0.25, 0.25, 0.25}, 4), 1.0, 1e-15);
}

TEST(EntropyOfSpectrum, ClampsRoundingDust) {
  const double h = entropy_of_spectrum({1.00000000005, -5e-11}, 2);
  EXPECT_NEAR(h, 0.0, 1e-9);
}

TEST(EntropyOfSpectrum, Rejections) {
  EXPECT_THROW(entropy_of_spectrum({1.000002, 0.0}, 2),
               std::invalid_argument);  // sum off by 2e-6
  EXPECT_THROW(entropy_of_spectrum({1.000000001, -1e-9}, 2),
               std::invalid_argument);  // eigenvalue below -1e-10
  EXPECT_THROW(entropy_of_spectrum({0.5, 0.5}, 1), std::invalid_argument);
}

TEST(EntropyOfSpectrum, BaseConversion) {
  const double h2 = entropy_of_spectrum({0.7, 0.3}, 2);
  const double h4 = entropy_of_spectrum({0.7, 0.3}, 4);
  EXPECT_NEAR(h2, 2.0 * h4, 1e-14);
}
