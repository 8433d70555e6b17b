#include <doctest.h>

#include <random>

#include "qnb/errors.hpp"
#include "qnb/qalgebra.hpp"

using namespace qnb;

namespace {

ComplexMat random_mat(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMat a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a(i, j) = Complex(n(rng), n(rng));
  }
  return a;
}

ComplexMat random_gram(std::mt19937_64& rng, int dim, int rank) {
  const ComplexMat a = random_mat(rng, dim, rank);
  return a * a.adjoint();
}

}  // namespace

TEST_CASE("spectral density: vacuum and scaled identity") {
  const SpectralDensityMat v = SpectralDensityMat::identity(2);
  CHECK(v.dim() == 2);
  CHECK(v(0, 0) == Complex(1.0, 0.0));
  CHECK(v(0, 1) == Complex(0.0, 0.0));
  CHECK(v.min_eigenvalue() == doctest::Approx(1.0));
  CHECK(SpectralDensityMat::scaled_identity(4, 3.5).min_eigenvalue() == doctest::Approx(3.5));
}

TEST_CASE("spectral density: rejects non-Hermitian, indefinite and malformed input") {
  ComplexMat m = ComplexMat::Identity(2, 2);
  m(0, 1) = Complex(0.0, 0.5);
  CHECK_THROWS_AS(SpectralDensityMat{m}, PsdViolation);

  ComplexMat ind(2, 2);
  ind << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(SpectralDensityMat{ind}, PsdViolation);

  CHECK_THROWS_AS(SpectralDensityMat{ComplexMat::Zero(2, 3)}, ContractError);
  CHECK_THROWS_AS(SpectralDensityMat{ComplexMat(0, 0)}, ContractError);

  ComplexMat nan = ComplexMat::Identity(2, 2);
  nan(1, 1) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(SpectralDensityMat{nan}, PsdViolation);
}

TEST_CASE("spectral density: rounding-level asymmetry is symmetrized") {
  ComplexMat m = ComplexMat::Identity(2, 2);
  m(0, 1) = Complex(0.3, 1e-15);
  m(1, 0) = Complex(0.3, 0.0);
  const SpectralDensityMat s(m);
  CHECK(s(0, 1) == std::conj(s(1, 0)));
}

TEST_CASE("property: random Gram matrices are accepted as Hermitian PSD") {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> dim_d(1, 6);
  // Vacuum-normalized spectra: tolerances have an absolute floor at unit scale.
  std::uniform_real_distribution<double> scale_d(-3.0, 6.0);
  for (int k = 0; k < 1000; ++k) {
    const int dim = dim_d(rng);
    const int rank = std::uniform_int_distribution<int>(1, dim)(rng);
    const double scale = std::pow(10.0, scale_d(rng));
    const ComplexMat g = scale * random_gram(rng, dim, rank);
    const SpectralDensityMat s(g);
    REQUIRE((s.matrix() - s.matrix().adjoint()).norm() == 0.0);
    REQUIRE(s.min_eigenvalue() >= -1e-10 * scale * dim);

    // Any congruence of a PSD matrix stays PSD.
    const ComplexMat t = random_mat(rng, 2, dim);
    const SpectralDensityMat out = propagate_psd(t, s);
    REQUIRE(out.min_eigenvalue() >= -1e-9 * out.matrix().norm());

    // Shifting below the smallest eigenvalue, or breaking Hermiticity, is rejected.
    const double shift = s.min_eigenvalue() + 1e-3 * g.norm();
    CHECK_THROWS_AS(SpectralDensityMat(g - shift * ComplexMat::Identity(dim, dim)), PsdViolation);
    if (dim > 1) {
      ComplexMat skew = g;
      skew(0, 1) += Complex(0.0, 1e-3 * g.norm());
      CHECK_THROWS_AS(SpectralDensityMat{skew}, PsdViolation);
    }
  }
}

TEST_CASE("homodyne vector: unit norm and orthogonal complement") {
  for (double phi : {0.0, 0.3, 1.5707963267948966, 2.5, -1.0}) {
    const HomodyneVector h(phi);
    CHECK(h.components().norm() == doctest::Approx(1.0));
    CHECK(h.components().dot(h.orthogonal()) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(h.phi() == phi);
  }
  CHECK_THROWS_AS(HomodyneVector(std::numeric_limits<double>::infinity()), ParameterError);
}

TEST_CASE("propagate_psd and homodyne projection") {
  ComplexMat t(2, 2);
  t << Complex(1, 0), Complex(0, 0), Complex(-2, 0), Complex(1, 0);
  const SpectralDensityMat out = propagate_psd(t, SpectralDensityMat::identity(2));
  CHECK(out(0, 0).real() == doctest::Approx(1.0));
  CHECK(out(1, 1).real() == doctest::Approx(5.0));
  CHECK(out(0, 1).real() == doctest::Approx(-2.0));
  CHECK_THROWS_AS(propagate_psd(t, SpectralDensityMat::identity(3)), ContractError);

  NoiseBudget b(Vec2c(Complex(0, 0), Complex(0, 2)));
  b.add("n", t, SpectralDensityMat::identity(2));
  const HomodyneVector phase(1.5707963267948966);
  CHECK(homodyne_noise_power(b, phase) == doctest::Approx(5.0));
  CHECK(homodyne_signal_power(b, phase) == doctest::Approx(4.0));
  CHECK(homodyne_noise_power(b, HomodyneVector(0.0)) == doctest::Approx(1.0));
}

TEST_CASE("noise budget: labels are unique and shapes are checked") {
  NoiseBudget b;
  b.add("a", ComplexMat::Identity(2, 2), SpectralDensityMat::identity(2));
  CHECK(b.has("a"));
  CHECK_FALSE(b.has("b"));
  CHECK_THROWS_AS(b.add("a", ComplexMat::Identity(2, 2), SpectralDensityMat::identity(2)), ContractError);
  CHECK_THROWS_AS(b.add("c", ComplexMat::Identity(3, 3), SpectralDensityMat::identity(3)), ContractError);
  CHECK_THROWS_AS(b.add("d", ComplexMat::Identity(2, 2), SpectralDensityMat::identity(3)), ContractError);
  CHECK_THROWS_AS(b.add_divergent("a", ComplexMat::Identity(2, 2)), ContractError);
  CHECK_THROWS_AS(b.at("zzz"), ContractError);
}

TEST_CASE("property: noise powers add over independent contributions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 6.283);
  for (int k = 0; k < 100; ++k) {
    const ComplexMat t1 = random_mat(rng, 2, 2);
    const ComplexMat t2 = random_mat(rng, 2, 2);
    const SpectralDensityMat s1(random_gram(rng, 2, 2));
    const SpectralDensityMat s2(random_gram(rng, 2, 1));
    const HomodyneVector h(u(rng));
    NoiseBudget a, b, both;
    a.add("x", t1, s1);
    b.add("y", t2, s2);
    both.add("x", t1, s1);
    both.add("y", t2, s2);
    CHECK(homodyne_noise_power(both, h) ==
          doctest::Approx(homodyne_noise_power(a, h) + homodyne_noise_power(b, h)).epsilon(1e-12));
  }
}

TEST_CASE("property: a global phase on every transfer leaves the homodyne power unchanged") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const ComplexMat t = random_mat(rng, 2, 2);
    const SpectralDensityMat s(random_gram(rng, 2, 2));
    const Complex phase = std::polar(1.0, 0.1 * k);
    NoiseBudget a, b;
    a.add("x", t, s);
    b.add("x", phase * t, s);
    const HomodyneVector h(0.05 * k);
    CHECK(homodyne_noise_power(a, h) == doctest::Approx(homodyne_noise_power(b, h)).epsilon(1e-12));
  }
}

TEST_CASE("divergent contributions must cancel in the projection") {
  NoiseBudget b;
  b.add("finite", ComplexMat::Identity(2, 2), SpectralDensityMat::identity(2));
  ComplexMat d(2, 1);
  d << Complex(1.0, 0.0), Complex(0.0, 0.0);  // amplitude quadrature only
  b.add_divergent("wild", d);
  CHECK(homodyne_noise_power(b, HomodyneVector(1.5707963267948966)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(homodyne_noise_power(b, HomodyneVector(0.0)), DivergentNoise);
}
