#include "cdoqae/copula.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdoqae/error.hpp"

namespace cdoqae::copula {

void Asset::validate() const {
  require(std::isfinite(loss_given_default) && loss_given_default >= 0.0,
          ErrorCode::kInvalidArgument, "loss_given_default must be >= 0");
  require(default_prob > 0.0 && default_prob < 1.0, ErrorCode::kInvalidArgument,
          "default probability must lie in (0, 1)");
  require(correlation >= 0.0 && correlation < 1.0, ErrorCode::kInvalidArgument,
          "correlation must lie in [0, 1)");
}

double default_threshold(const Asset& asset, const dist::FactorDistribution& law) {
  asset.validate();
  return law.quantile(asset.default_prob);
}

double conditional_default_prob(const Asset& asset, double threshold, double z,
                                const dist::FactorDistribution& law) {
  const double g = asset.correlation;
  const double arg = (threshold - std::sqrt(g) * z) / std::sqrt(1.0 - g);
  return std::clamp(law.cdf(arg), 0.0, 1.0);
}

double conditional_default_prob(const Asset& asset, double z, const dist::FactorDistribution& law) {
  return conditional_default_prob(asset, default_threshold(asset, law), z, law);
}

RotationCoeffs linearization_coeffs(const Asset& asset, const dist::FactorDistribution& law) {
  const double g = asset.correlation;
  const double psi = default_threshold(asset, law) / std::sqrt(1.0 - g);
  const double f_psi = law.pdf(psi);
  const double cdf_psi = law.cdf(psi);
  require(cdf_psi > 1e-12 && cdf_psi < 1.0 - 1e-12, ErrorCode::kNumerical,
          "F(psi) too close to 0 or 1 for the linearization");

  // d/dz arcsin(sqrt(F(psi - sqrt(g) z / sqrt(1-g)))) at z = 0, amplitude level.
  const double amplitude_slope = -std::sqrt(g) / (2.0 * std::sqrt(1.0 - g)) * f_psi /
                                 (std::sqrt(1.0 - cdf_psi) * std::sqrt(cdf_psi));
  return RotationCoeffs{2.0 * amplitude_slope, 2.0 * std::asin(std::sqrt(cdf_psi))};
}

double loaded_default_prob(const RotationCoeffs& coeffs, double z) {
  const double s = std::sin(0.5 * (coeffs.offset + coeffs.slope * z));
  return s * s;
}

AffineAngles affine_grid_angles(const RotationCoeffs& coeffs, const dist::DiscreteDistribution& grid) {
  AffineAngles out;
  out.base_angle = coeffs.offset + coeffs.slope * grid.low;
  const double h = grid.spacing();
  out.per_qubit_angles.resize(grid.n_z);
  for (std::size_t j = 0; j < grid.n_z; ++j) {
    out.per_qubit_angles[j] = coeffs.slope * h * std::ldexp(1.0, static_cast<int>(j));
  }
  return out;
}

ConditionalDefaults::ConditionalDefaults(std::vector<Asset> assets, dist::FactorDistribution law)
    : assets_(std::move(assets)), law_(std::move(law)) {
  thresholds_.reserve(assets_.size());
  for (const Asset& a : assets_) thresholds_.push_back(default_threshold(a, law_));
}

double ConditionalDefaults::probability(std::size_t i, double z) const {
  return conditional_default_prob(assets_.at(i), thresholds_[i], z, law_);
}

}  // namespace cdoqae::copula
