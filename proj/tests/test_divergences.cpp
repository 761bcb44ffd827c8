#include "bridgelab/divergences.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

namespace bridgelab {
namespace {

DiscreteMeasure measure(std::initializer_list<double> w) {
  Vector v(static_cast<Index>(w.size()));
  Index i = 0;
  for (double x : w) v(i++) = x;
  return DiscreteMeasure(v);
}

TEST(Divergences, MeasureNormalizes) {
  DiscreteMeasure m = measure({1.0, 3.0});
  EXPECT_NEAR(m(0), 0.25, 1e-15);
  EXPECT_NEAR(m.weights().sum(), 1.0, 1e-12);
  EXPECT_THROW(measure({1.0, -1.0}), DomainError);
  EXPECT_THROW(measure({0.0, 0.0}), DomainError);
}

TEST(Divergences, CatalogExamples) {
  DiscreteMeasure a = measure({1.0, 0.0}), b = measure({0.0, 1.0});
  EXPECT_EQ(phi_entropy(phi::tv(), a, a), 0.0);
  EXPECT_NEAR(phi_entropy(phi::tv(), a, b), 1.0, 1e-15);
  EXPECT_NEAR(tv_distance(a, b), 1.0, 1e-15);
  double kl = phi_entropy(phi::kl(), measure({0.5, 0.5}), measure({0.25, 0.75}));
  EXPECT_NEAR(kl, 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(kl, 0.143841, 1e-6);
  EXPECT_TRUE(std::isinf(phi_entropy(phi::kl(), a, b)));
  EXPECT_EQ(phi_entropy(phi::kl(), b, measure({0.5, 0.5})), std::log(2.0));
  EXPECT_THROW(phi_entropy(phi::kl(), a, measure({1.0, 1.0, 1.0})), DomainError);
}

TEST(Divergences, CatalogAxioms) {
  CounterRng rng(21);
  for (const auto& f : phi::catalog()) {
    EXPECT_EQ(f.evaluate(1.0, 1.0), 0.0) << f.name;
    for (int trial = 0; trial < 200; ++trial) {
      double u = rng.uniform(0.01, 3.0), v = rng.uniform(0.01, 3.0), a = rng.uniform(0.1, 10.0);
      EXPECT_NEAR(f.evaluate(a * u, a * v), a * f.evaluate(u, v), 1e-12 * (1 + a * std::abs(f.evaluate(u, v))))
          << f.name;
      double u2 = rng.uniform(0.01, 3.0), v2 = rng.uniform(0.01, 3.0), t = rng.uniform();
      double mid = f.evaluate(t * u + (1 - t) * u2, t * v + (1 - t) * v2);
      EXPECT_LE(mid, t * f.evaluate(u, v) + (1 - t) * f.evaluate(u2, v2) + 1e-12) << f.name;
    }
  }
}

TEST(Divergences, DominatingMeasureInvariance) {
  // Φ-entropy with respect to a reference γ: Σ γ Φ(μ1/γ, μ2/γ) equals the counting-measure value.
  CounterRng rng(5);
  for (const auto& f : phi::catalog()) {
    Vector a = oracle::random_probability(rng, 6, 0.1), b = oracle::random_probability(rng, 6, 0.1);
    Vector g = oracle::random_probability(rng, 6, 0.1) * 3.0;
    double ref = 0.0;
    for (Index i = 0; i < 6; ++i) ref += g(i) * f.evaluate(a(i) / g(i), b(i) / g(i));
    EXPECT_NEAR(ref, phi_entropy(f, DiscreteMeasure(a), DiscreteMeasure(b)), 1e-13) << f.name;
  }
}

TEST(Divergences, DataProcessing) {
  CounterRng rng(99);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cat = phi::catalog();
    const auto& f = cat[trial % cat.size()];
    Index n = 2 + trial % 5, m = 2 + (trial / 5) % 5;
    Matrix k = oracle::random_kernel(rng, n, m, 0.05);
    DiscreteMeasure a(oracle::random_probability(rng, n, 0.01)), b(oracle::random_probability(rng, n, 0.01));
    double before = phi_entropy(f, a, b), after = phi_entropy(f, a * k, b * k);
    EXPECT_LE(after, before + 1e-13) << f.name;
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Divergences, RelativeEntropyLogMatchesDirect) {
  CounterRng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Vector a = oracle::random_probability(rng, 7, 0.01), b = oracle::random_probability(rng, 7, 0.01);
    EXPECT_NEAR(relative_entropy_log(a.array().log(), b.array().log()), oracle::kl_direct(a, b), 1e-14);
  }
  Vector la(2), lb(2);
  la << 0.0, -std::numeric_limits<double>::infinity();
  lb << -std::numeric_limits<double>::infinity(), 0.0;
  EXPECT_TRUE(std::isinf(relative_entropy_log(la, lb)));
  EXPECT_EQ(relative_entropy_log(la, la), 0.0);
}

TEST(Divergences, WeightedTv) {
  DiscreteMeasure a = measure({1.0, 0.0}), b = measure({0.0, 1.0});
  Vector g(2);
  g << 3.0, 5.0;
  EXPECT_NEAR(weighted_tv(a, b, g), 8.0, 1e-15);
  EXPECT_EQ(weighted_tv(a, a, g), 0.0);
  CounterRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteMeasure p(oracle::random_probability(rng, 5)), q(oracle::random_probability(rng, 5));
    EXPECT_NEAR(weighted_tv(p, q, Vector::Ones(5)), 2.0 * phi_entropy(phi::tv(), p, q), 1e-15);
  }
  g(1) = 0.0;
  EXPECT_THROW(weighted_tv(a, b, g), DomainError);
}

TEST(Divergences, GaussianKlExamples) {
  Gaussian p(Vector::Zero(1), Matrix::Identity(1, 1));
  EXPECT_EQ(gaussian_kl(p, p), 0.0);
  EXPECT_NEAR(gaussian_kl(p, Gaussian(Vector::Ones(1), Matrix::Identity(1, 1))), 0.5, 1e-15);
  Gaussian wide(Vector::Zero(1), 2.0 * Matrix::Identity(1, 1));
  EXPECT_NEAR(gaussian_kl(wide, p), (1.0 - std::log(2.0)) / 2.0, 1e-15);
  EXPECT_NEAR(gaussian_kl(wide, p), 0.153426, 1e-6);
  EXPECT_NEAR(burg_divergence(wide.cov(), p.cov()), 1.0 - std::log(2.0), 1e-15);
  EXPECT_THROW(gaussian_kl(p, Gaussian(Vector::Zero(2), Matrix::Identity(2, 2))), DomainError);
}

TEST(Divergences, GaussianKlMatchesCholeskyOracle) {
  CounterRng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Index d = 1 + trial % 6;
    Vector m1 = oracle::random_matrix(rng, d, 1), m2 = oracle::random_matrix(rng, d, 1);
    Matrix s1 = oracle::random_spd(rng, d), s2 = oracle::random_spd(rng, d);
    double want = oracle::gaussian_kl_cholesky(m1, s1, m2, s2);
    EXPECT_NEAR(gaussian_kl(Gaussian(m1, s1), Gaussian(m2, s2)), want, 1e-11 * (1 + want));
  }
}

TEST(Divergences, GaussianW2) {
  Gaussian p(Vector::Zero(1), 4.0 * Matrix::Identity(1, 1)), q(Vector::Zero(1), Matrix::Identity(1, 1));
  EXPECT_NEAR(gaussian_w2(p, q), 1.0, 1e-14);
  EXPECT_NEAR(gaussian_w2(p, p), 0.0, 1e-7);
  CounterRng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Index d = 1 + trial % 4;
    Matrix s1 = oracle::random_spd(rng, d), s2 = oracle::random_spd(rng, d), s3 = oracle::random_spd(rng, d);
    Vector m1 = oracle::random_matrix(rng, d, 1), m2 = oracle::random_matrix(rng, d, 1),
           m3 = oracle::random_matrix(rng, d, 1);
    Gaussian a(m1, s1), b(m2, s2), c(m3, s3);
    EXPECT_NEAR(gaussian_w2(Gaussian(m1, s1), Gaussian(m2, s1)), (m1 - m2).norm(), 1e-7);
    EXPECT_NEAR(gaussian_w2(a, b), gaussian_w2(b, a), 1e-10);
    EXPECT_LE(gaussian_w2(a, c), gaussian_w2(a, b) + gaussian_w2(b, c) + 1e-10);
    // optimal map T = s1^{-1/2}(s1^{1/2} s2 s1^{1/2})^{1/2} s1^{-1/2}: cost tr s1 + tr s2 − 2 tr(T s1)
    Matrix r1 = principal_sqrt(s1), ir1 = inverse_sqrt(s1);
    Matrix t = ir1 * principal_sqrt(Matrix(r1 * s2 * r1)) * ir1;
    double want = (m1 - m2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * (t * s1).trace();
    EXPECT_NEAR(gaussian_w2(a, b) * gaussian_w2(a, b), want, 1e-10);
  }
}

TEST(Divergences, DiscretizedScalarKlSmoke) {
  // Riemann sums of two scalar Gaussian densities on a fine grid.
  const double m1 = 0.3, s1 = 1.4, m2 = -0.2, s2 = 0.9;
  const int n = 4001;
  Vector a(n), b(n);
  for (int i = 0; i < n; ++i) {
    double x = -12.0 + 24.0 * i / (n - 1);
    a(i) = std::exp(-0.5 * (x - m1) * (x - m1) / s1);
    b(i) = std::exp(-0.5 * (x - m2) * (x - m2) / s2);
  }
  double grid = phi_entropy(phi::kl(), DiscreteMeasure(a), DiscreteMeasure(b));
  double exact = gaussian_kl(Gaussian(Vector::Constant(1, m1), Matrix::Constant(1, 1, s1)),
                             Gaussian(Vector::Constant(1, m2), Matrix::Constant(1, 1, s2)));
  EXPECT_NEAR(grid, exact, 1e-6);
}

}  // namespace
}  // namespace bridgelab
