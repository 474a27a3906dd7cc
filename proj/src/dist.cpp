#include "cdoqae/dist.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "cdoqae/error.hpp"

namespace cdoqae::dist {
namespace {

using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr unsigned kMaxDepth = 15;
constexpr double kQuadratureTolerance = 1e-11;
constexpr double kTailWidths = 40.0;
constexpr double kRootWidth = 1e-10;

template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return Quadrature::integrate(f, a, b, kMaxDepth, kQuadratureTolerance);
}

void check_probability(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::kOutOfRange,
          "quantile level must lie in (0, 1), got " + std::to_string(p));
}

}  // namespace

void GaussianSpec::validate() const {
  require(std::isfinite(mean), ErrorCode::kInvalidArgument, "gaussian mean must be finite");
  require(std::isfinite(variance) && variance > 0.0, ErrorCode::kInvalidArgument,
          "gaussian variance must be positive");
}

double GaussianSpec::stddev() const { return std::sqrt(variance); }

void NigSpec::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(mu) &&
              std::isfinite(delta),
          ErrorCode::kInvalidArgument, "NIG parameters must be finite");
  require(std::abs(beta) < alpha, ErrorCode::kInvalidArgument,
          "NIG requires 0 <= |beta| < alpha");
  require(delta > 0.0, ErrorCode::kInvalidArgument, "NIG requires delta > 0");
}

double NigSpec::gamma() const { return std::sqrt(alpha * alpha - beta * beta); }

NigSpec reference_nig() { return NigSpec{1.6771, 0.75, -0.6, 1.2}; }

double gaussian_pdf(double x, const GaussianSpec& spec) {
  const double s = spec.stddev();
  const double u = (x - spec.mean) / s;
  return std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
}

double gaussian_cdf(double x, const GaussianSpec& spec) {
  const double u = (x - spec.mean) / spec.stddev();
  return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

double gaussian_quantile(double p, const GaussianSpec& spec) {
  check_probability(p);
  return spec.mean - std::numbers::sqrt2 * spec.stddev() * boost::math::erfc_inv(2.0 * p);
}

double bessel_k1(double x) {
  require(x > 0.0, ErrorCode::kOutOfRange, "K1 is defined for x > 0 only");
  return boost::math::cyl_bessel_k(1, x);
}

double nig_pdf(double x, const NigSpec& spec) {
  const double q = std::sqrt(1.0 + std::pow((x - spec.mu) / spec.delta, 2));
  const double arg = spec.delta * spec.alpha * q;
  // K1 underflows long before exp(beta x) could overflow on any grid we use.
  if (arg > 700.0) return 0.0;
  const double log_a =
      std::log(spec.alpha / std::numbers::pi) + spec.delta * spec.gamma() - spec.beta * spec.mu;
  return std::exp(log_a + spec.beta * x) * boost::math::cyl_bessel_k(1, arg) / q;
}

double nig_cdf(double x, const NigSpec& spec) {
  if (std::isnan(x)) fail(ErrorCode::kInvalidArgument, "nig_cdf of NaN");
  const double left = spec.mu - kTailWidths * spec.delta;
  const double right = spec.mu + kTailWidths * spec.delta;
  if (x <= left) return 0.0;
  const double upper = std::min(x, right);
  auto f = [&spec](double t) { return nig_pdf(t, spec); };
  double total = integrate(f, left, std::min(upper, spec.mu));
  if (upper > spec.mu) total += integrate(f, spec.mu, upper);
  return std::clamp(total, 0.0, 1.0);
}

double nig_quantile(double p, const NigSpec& spec) {
  check_probability(p);
  const double lo = spec.mu - kTailWidths * spec.delta;
  const double hi = spec.mu + kTailWidths * spec.delta;
  auto excess = [&](double x) { return nig_cdf(x, spec) - p; };
  const double f_lo = -p;
  const double f_hi = excess(hi);
  require(f_hi > 0.0, ErrorCode::kNumerical, "quantile level not bracketed by the search range");

  std::uintmax_t iterations = 200;
  auto width_ok = [](double a, double b) { return std::abs(b - a) <= kRootWidth; };
  const auto [a, b] =
      boost::math::tools::toms748_solve(excess, lo, hi, f_lo, f_hi, width_ok, iterations);
  require(width_ok(a, b), ErrorCode::kNumerical, "NIG quantile did not converge");
  return 0.5 * (a + b);
}

Moments nig_moments(const NigSpec& spec) {
  spec.validate();
  const double g = spec.gamma();
  const double dg = spec.delta * g;
  Moments m;
  m.mean = spec.mu + spec.delta * spec.beta / g;
  m.variance = spec.delta * spec.alpha * spec.alpha / (g * g * g);
  m.skewness = 3.0 * spec.beta / (spec.alpha * std::sqrt(dg));
  m.kurtosis = 3.0 + 3.0 * (1.0 + 4.0 * spec.beta * spec.beta / (spec.alpha * spec.alpha)) / dg;
  return m;
}

Moments moments_by_quadrature(const std::function<double(double)>& pdf, double low,
                              double high) {
  require(low < high, ErrorCode::kInvalidArgument, "quadrature range must be non-empty");
  const double mass = integrate(pdf, low, high);
  require(mass > 0.0, ErrorCode::kNumerical, "density integrates to zero");
  const double mean = integrate([&](double x) { return x * pdf(x); }, low, high) / mass;
  auto central = [&](int k) {
    return integrate([&](double x) { return std::pow(x - mean, k) * pdf(x); }, low, high) / mass;
  };
  Moments m;
  m.mean = mean;
  m.variance = central(2);
  m.skewness = central(3) / std::pow(m.variance, 1.5);
  m.kurtosis = central(4) / (m.variance * m.variance);
  return m;
}

// --- FactorDistribution ------------------------------------------------------

FactorDistribution::FactorDistribution(GaussianSpec spec) : spec_(spec) { spec.validate(); }
FactorDistribution::FactorDistribution(NigSpec spec) : spec_(spec) { spec.validate(); }

double FactorDistribution::pdf(double x) const {
  return std::visit(
      [x](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GaussianSpec>) {
          return gaussian_pdf(x, s);
        } else {
          return nig_pdf(x, s);
        }
      },
      spec_);
}

double FactorDistribution::cdf(double x) const {
  return std::visit(
      [x](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GaussianSpec>) {
          return gaussian_cdf(x, s);
        } else {
          return nig_cdf(x, s);
        }
      },
      spec_);
}

double FactorDistribution::quantile(double p) const {
  return std::visit(
      [p](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GaussianSpec>) {
          return gaussian_quantile(p, s);
        } else {
          return nig_quantile(p, s);
        }
      },
      spec_);
}

Moments FactorDistribution::moments() const {
  if (const auto* g = std::get_if<GaussianSpec>(&spec_)) {
    return Moments{g->mean, g->variance, 0.0, 3.0};
  }
  return nig_moments(std::get<NigSpec>(spec_));
}

double FactorDistribution::stddev() const { return std::sqrt(moments().variance); }

std::string FactorDistribution::name() const { return is_gaussian() ? "gaussian" : "nig"; }

// --- discretization ----------------------------------------------------------

double DiscreteDistribution::spacing() const {
  return grid.size() > 1 ? (high - low) / static_cast<double>(grid.size() - 1) : 0.0;
}

DiscreteDistribution discretize(const std::function<double(double)>& pdf, std::size_t n_z,
                                double low, double high) {
  require(n_z >= 1 && n_z <= 20, ErrorCode::kOutOfRange, "n_z must lie in [1, 20]");
  require(std::isfinite(low) && std::isfinite(high) && low < high, ErrorCode::kInvalidArgument,
          "discretization range requires low < high");
  const std::size_t count = std::size_t{1} << n_z;
  const double h = (high - low) / static_cast<double>(count - 1);

  DiscreteDistribution d;
  d.low = low;
  d.high = high;
  d.n_z = n_z;
  d.grid.resize(count);
  d.probs.resize(count);
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    d.grid[i] = (i + 1 == count) ? high : low + h * static_cast<double>(i);
    const double v = pdf(d.grid[i]);
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kNumerical,
            "density must be finite and non-negative on the grid");
    d.probs[i] = v;
    total += v;
  }
  require(total > 0.0, ErrorCode::kNumerical, "density vanishes on every grid point");
  for (double& p : d.probs) p /= total;
  return d;
}

DiscreteDistribution discretize(const FactorDistribution& law, std::size_t n_z) {
  const Moments m = law.moments();
  const double s = std::sqrt(m.variance);
  return discretize([&law](double x) { return law.pdf(x); }, n_z, m.mean - 3.0 * s,
                    m.mean + 3.0 * s);
}

}  // namespace cdoqae::dist
