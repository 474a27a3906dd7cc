#pragma once

// Distributions of the systematic risk factor Z: Gaussian and Normal Inverse
// Gaussian (NIG), plus grid discretization onto 2^n_z points.

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace cdoqae::dist {

struct GaussianSpec {
  double mean = 0.0;
  double variance = 1.0;

  void validate() const;
  double stddev() const;
};

/// NIG(alpha, beta, mu, delta): alpha steepness, beta symmetry, mu location,
/// delta scale. Requires 0 <= |beta| < alpha and delta > 0.
struct NigSpec {
  double alpha = 1.0;
  double beta = 0.0;
  double mu = 0.0;
  double delta = 1.0;

  void validate() const;
  double gamma() const;  // sqrt(alpha^2 - beta^2)
};

/// The reference NIG law with mean 0, variance 1, skewness 1, kurtosis 6.
NigSpec reference_nig();

/// Kurtosis is the full (non-excess) fourth standardized moment.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

double gaussian_pdf(double x, const GaussianSpec& spec);
double gaussian_cdf(double x, const GaussianSpec& spec);
/// Throws for p outside (0, 1).
double gaussian_quantile(double p, const GaussianSpec& spec);

/// Modified Bessel function of the second kind, order one. Throws for x <= 0.
double bessel_k1(double x);

double nig_pdf(double x, const NigSpec& spec);
/// Adaptive quadrature of nig_pdf from mu - 40 delta.
double nig_cdf(double x, const NigSpec& spec);
/// Bracketed root find (TOMS 748) on nig_cdf over [mu - 40 delta, mu + 40 delta]
/// to 1e-10 width.
double nig_quantile(double p, const NigSpec& spec);
Moments nig_moments(const NigSpec& spec);

/// Moments of a density by adaptive quadrature over [low, high].
Moments moments_by_quadrature(const std::function<double(double)>& pdf, double low,
                              double high);

/// Gaussian or NIG law with a uniform pdf/cdf/quantile interface. Value type.
class FactorDistribution {
 public:
  FactorDistribution(GaussianSpec spec);  // NOLINT: implicit on purpose
  FactorDistribution(NigSpec spec);       // NOLINT

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  Moments moments() const;
  double mean() const { return moments().mean; }
  double stddev() const;

  bool is_gaussian() const { return std::holds_alternative<GaussianSpec>(spec_); }
  const std::variant<GaussianSpec, NigSpec>& spec() const { return spec_; }
  std::string name() const;

 private:
  std::variant<GaussianSpec, NigSpec> spec_;
};

struct DiscreteDistribution {
  std::vector<double> grid;   // ascending, uniform spacing, grid.front() == low
  std::vector<double> probs;  // sums to 1
  double low = 0.0;
  double high = 0.0;
  std::size_t n_z = 0;

  std::size_t size() const { return grid.size(); }
  /// (high - low) / (2^n_z - 1); zero for a single-point grid.
  double spacing() const;
};

/// Uniform grid of 2^n_z points on [low, high] with
/// probs[i] = pdf(grid[i]) / sum_j pdf(grid[j]).
DiscreteDistribution discretize(const std::function<double(double)>& pdf, std::size_t n_z,
                                double low, double high);

/// Grid over mean +/- 3 standard deviations of `law`.
DiscreteDistribution discretize(const FactorDistribution& law, std::size_t n_z);

}  // namespace cdoqae::dist
