#include "cdoqae/dist.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cdoqae/error.hpp"

namespace {

using namespace cdoqae;
using namespace cdoqae::dist;

// Reference values below were computed with 30-digit arithmetic (mpmath).

TEST(Gaussian, PdfValues) {
  const GaussianSpec std_normal;
  EXPECT_NEAR(gaussian_pdf(0.0, std_normal), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(gaussian_pdf(1.0, std_normal), 0.24197072451914337, 1e-15);
  for (double x : {0.3, 1.7, 4.2}) EXPECT_DOUBLE_EQ(gaussian_pdf(x, std_normal), gaussian_pdf(-x, std_normal));
}

TEST(Gaussian, CdfAndQuantile) {
  const GaussianSpec std_normal;
  EXPECT_DOUBLE_EQ(gaussian_cdf(0.0, std_normal), 0.5);
  EXPECT_NEAR(gaussian_quantile(0.5, std_normal), 0.0, 1e-15);
  EXPECT_NEAR(gaussian_quantile(0.3, std_normal), -0.524400512708040784, 1e-13);
}

TEST(Gaussian, QuantileInvertsCdf) {
  const GaussianSpec spec{0.4, 2.5};
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    EXPECT_NEAR(gaussian_quantile(gaussian_cdf(x, spec), spec), x, 1e-8) << "x=" << x;
  }
}

TEST(Gaussian, QuantileRejectsLevelsOutsideUnitInterval) {
  const GaussianSpec spec;
  for (double p : {0.0, 1.0, -0.1, 1.5}) {
    try {
      gaussian_quantile(p, spec);
      FAIL() << "no throw for p=" << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
    }
  }
}

TEST(Gaussian, RejectsNonPositiveVariance) {
  EXPECT_THROW((GaussianSpec{0.0, 0.0}.validate()), Error);
  EXPECT_THROW((GaussianSpec{0.0, -1.0}.validate()), Error);
}

TEST(Bessel, FrozenValues) {
  EXPECT_NEAR(bessel_k1(1.0), 0.601907230197234575, 1e-14);
  EXPECT_NEAR(bessel_k1(5.0), 0.00404461344545216421, 1e-16);
  EXPECT_NEAR(bessel_k1(0.1), 9.85384478087060557, 1e-12);
}

TEST(Bessel, SmallArgumentLimit) {
  EXPECT_NEAR(1e-4 * bessel_k1(1e-4), 1.0, 1e-3);
  EXPECT_LT(bessel_k1(5.0), bessel_k1(1.0));
}

TEST(Bessel, RejectsNonPositive) {
  EXPECT_THROW(bessel_k1(0.0), Error);
  EXPECT_THROW(bessel_k1(-1.0), Error);
}

TEST(Nig, SpecValidation) {
  EXPECT_NO_THROW(reference_nig().validate());
  EXPECT_THROW((NigSpec{-1.6771, 0.75, -0.6, 1.2}.validate()), Error);
  EXPECT_THROW((NigSpec{1.0, 1.0, 0.0, 1.0}.validate()), Error);
  EXPECT_THROW((NigSpec{1.0, 0.5, 0.0, 0.0}.validate()), Error);
}

TEST(Nig, PdfFrozenValues) {
  const NigSpec s = reference_nig();
  EXPECT_NEAR(nig_pdf(0.0, s), 0.458521056887606665, 1e-13);
  EXPECT_NEAR(nig_pdf(-1.0, s), 0.271005849129316564, 1e-13);
  EXPECT_NEAR(nig_pdf(2.0, s), 0.0479564514289724790, 1e-13);
}

TEST(Nig, PdfNormalizes) {
  const NigSpec s = reference_nig();
  double mass = 0.0;
  const double h = 1e-3;
  for (double x = -30.0; x < 30.0; x += h) mass += h * 0.5 * (nig_pdf(x, s) + nig_pdf(x + h, s));
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(Nig, SymmetricSpecHasSymmetricPdf) {
  const NigSpec s{2.0, 0.0, 0.0, 1.3};
  for (double x : {0.2, 1.0, 3.5}) EXPECT_NEAR(nig_pdf(x, s), nig_pdf(-x, s), 1e-15);
  EXPECT_NEAR(nig_quantile(0.5, s), 0.0, 1e-6);
}

TEST(Nig, CdfFrozenValues) {
  const NigSpec s = reference_nig();
  EXPECT_NEAR(nig_cdf(0.7, s), 0.803245860606602369, 1e-10);
  EXPECT_NEAR(nig_cdf(0.0, s), 0.557364281065897189, 1e-10);
  EXPECT_NEAR(nig_cdf(-1.0, s), 0.123447447304382804, 1e-10);
  EXPECT_NEAR(nig_cdf(1e6, s), 1.0, 1e-6);
  EXPECT_EQ(nig_cdf(-1e6, s), 0.0);
}

TEST(Nig, QuantileFrozenValues) {
  const NigSpec s = reference_nig();
  EXPECT_NEAR(nig_quantile(0.1, s), -1.09379902482487416, 1e-8);
  EXPECT_NEAR(nig_quantile(0.3, s), -0.530053439673281254, 1e-8);
}

TEST(Nig, QuantileInvertsCdf) {
  const NigSpec s = reference_nig();
  EXPECT_NEAR(nig_quantile(nig_cdf(0.7, s), s), 0.7, 1e-5);
  for (double x = -5.0; x <= 5.0; x += 0.5) {
    EXPECT_NEAR(nig_quantile(nig_cdf(x, s), s), x, 1e-5) << "x=" << x;
  }
}

TEST(Nig, ReferenceMomentsByQuadrature) {
  const NigSpec s = reference_nig();
  const Moments m = moments_by_quadrature([&](double x) { return nig_pdf(x, s); }, -60.0, 60.0);
  EXPECT_NEAR(m.mean, 0.0, 1e-3);
  EXPECT_NEAR(m.variance, 1.0, 1e-3);
  EXPECT_NEAR(m.skewness, 1.0, 5e-3);
  EXPECT_NEAR(m.kurtosis, 6.0, 2e-2);
  EXPECT_NEAR(m.mean, -2.19201320443449e-5, 1e-8);
  EXPECT_NEAR(m.variance, 0.999948853826040, 1e-8);
}

TEST(Nig, ClosedFormMomentsMatchQuadrature) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> alpha_dist(1.0, 3.0);
  std::uniform_real_distribution<double> frac(-0.7, 0.7);
  std::uniform_real_distribution<double> mu_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> delta_dist(0.5, 2.0);
  for (int trial = 0; trial < 3; ++trial) {
    const double alpha = alpha_dist(gen);
    const NigSpec s{alpha, frac(gen) * alpha, mu_dist(gen), delta_dist(gen)};
    const Moments closed = nig_moments(s);
    const double sd = std::sqrt(closed.variance);
    const Moments quad = moments_by_quadrature([&](double x) { return nig_pdf(x, s); },
                                               closed.mean - 60.0 * sd, closed.mean + 60.0 * sd);
    EXPECT_NEAR(quad.mean, closed.mean, 1e-3);
    EXPECT_NEAR(quad.variance, closed.variance, 1e-3);
    EXPECT_NEAR(quad.skewness, closed.skewness, 1e-3);
    EXPECT_NEAR(quad.kurtosis, closed.kurtosis, 1e-3);
  }
}

TEST(Nig, MatchesNormalVarianceMixture) {
  // X = mu + beta Y + sqrt(Y) N with Y inverse Gaussian (mean delta/gamma, shape delta^2).
  const NigSpec s = reference_nig();
  const double ig_mean = s.delta / s.gamma();
  const double ig_shape = s.delta * s.delta;
  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const int bins = 20;
  const double lo = -3.0;
  const double hi = 3.0;
  const double width = (hi - lo) / bins;
  std::vector<int> counts(bins, 0);
  const int samples = 400000;
  for (int i = 0; i < samples; ++i) {
    const double v = normal(gen);
    const double w = ig_mean * v * v;
    const double y0 = ig_mean + ig_mean * (w - std::sqrt(w * (4.0 * ig_shape + w))) / (2.0 * ig_shape);
    const double y = (uniform(gen) <= ig_mean / (ig_mean + y0)) ? y0 : ig_mean * ig_mean / y0;
    const double x = s.mu + s.beta * y + std::sqrt(y) * normal(gen);
    if (x >= lo && x < hi) ++counts[static_cast<int>((x - lo) / width)];
  }
  for (int b = 0; b < bins; ++b) {
    const double a = lo + b * width;
    const double expected = nig_cdf(a + width, s) - nig_cdf(a, s);
    const double observed = double(counts[b]) / samples;
    const double se = std::sqrt(expected * (1.0 - expected) / samples);
    EXPECT_NEAR(observed, expected, 5.0 * se + 1e-6) << "bin " << b;
  }
}

TEST(FactorDistributionTest, DispatchesOnSpec) {
  const FactorDistribution g = GaussianSpec{};
  const FactorDistribution n = reference_nig();
  EXPECT_TRUE(g.is_gaussian());
  EXPECT_FALSE(n.is_gaussian());
  EXPECT_EQ(g.name(), "gaussian");
  EXPECT_EQ(n.name(), "nig");
  EXPECT_DOUBLE_EQ(g.pdf(0.4), gaussian_pdf(0.4, GaussianSpec{}));
  EXPECT_DOUBLE_EQ(n.cdf(0.4), nig_cdf(0.4, reference_nig()));
  EXPECT_NEAR(n.stddev(), 1.0, 1e-4);
}

TEST(Discretize, SixteenPointsOnRange) {
  const FactorDistribution g = GaussianSpec{};
  const DiscreteDistribution d = discretize(g, 4);
  ASSERT_EQ(d.size(), 16u);
  EXPECT_DOUBLE_EQ(d.grid.front(), -3.0);
  EXPECT_DOUBLE_EQ(d.grid.back(), 3.0);
  EXPECT_NEAR(d.spacing(), 0.4, 1e-15);
  EXPECT_NEAR(std::accumulate(d.probs.begin(), d.probs.end(), 0.0), 1.0, 1e-12);
}

TEST(Discretize, GaussianIsSymmetricWithCentralMaxima) {
  const FactorDistribution g = GaussianSpec{};
  const DiscreteDistribution d = discretize(g, 4);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(d.probs[i], d.probs[15 - i], 1e-15);
  const auto mode = std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin();
  EXPECT_TRUE(mode == 7 || mode == 8);
  EXPECT_NEAR(d.probs[7], d.probs[8], 1e-15);
}

TEST(Discretize, NigModeLiesLeftOfCenter) {
  const NigSpec s = reference_nig();
  const DiscreteDistribution d = discretize([&](double x) { return nig_pdf(x, s); }, 4, -3.0, 3.0);
  const auto mode = std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin();
  EXPECT_EQ(mode, 7);
  EXPECT_LT(d.grid[mode], 0.0);
}

TEST(Discretize, ProbabilitiesAlwaysSumToOne) {
  const FactorDistribution n = reference_nig();
  for (std::size_t n_z = 1; n_z <= 10; ++n_z) {
    const DiscreteDistribution d = discretize([&](double x) { return n.pdf(x); }, n_z, -2.0, 4.0);
    ASSERT_EQ(d.size(), std::size_t{1} << n_z);
    EXPECT_NEAR(std::accumulate(d.probs.begin(), d.probs.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Discretize, RejectsBadArguments) {
  auto pdf = [](double x) { return gaussian_pdf(x, GaussianSpec{}); };
  EXPECT_THROW(discretize(pdf, 0, -3.0, 3.0), Error);
  EXPECT_THROW(discretize(pdf, 21, -3.0, 3.0), Error);
  EXPECT_THROW(discretize(pdf, 4, 3.0, -3.0), Error);
  EXPECT_THROW(discretize([](double) { return 0.0; }, 4, -3.0, 3.0), Error);
}

}  // namespace
