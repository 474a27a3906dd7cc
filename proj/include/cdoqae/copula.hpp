#pragma once

// One-factor copula: default probabilities conditional on the systematic
// factor z, and their linearization into rotation angles.

#include <cstddef>
#include <vector>

#include "cdoqae/dist.hpp"

namespace cdoqae::copula {

struct Asset {
  double loss_given_default = 0.0;  // monetary units, >= 0
  double default_prob = 0.0;        // unconditional, in (0, 1)
  double correlation = 0.0;         // sensitivity to z, in [0, 1)

  void validate() const;
};

/// Rotation coefficients in gate convention: the loaded probability is
/// sin^2((offset + slope * z) / 2).
struct RotationCoeffs {
  double slope = 0.0;
  double offset = 0.0;
};

/// Base angle plus one angle per z-register qubit, so that grid index
/// i = sum_j b_j 2^j maps to base_angle + sum_j b_j per_qubit_angles[j].
struct AffineAngles {
  double base_angle = 0.0;
  std::vector<double> per_qubit_angles;
};

/// F^{-1}(p0): the latent-variable default threshold.
double default_threshold(const Asset& asset, const dist::FactorDistribution& law);

/// F((F^{-1}(p0) - sqrt(gamma) z) / sqrt(1 - gamma)), clamped to [0, 1].
double conditional_default_prob(const Asset& asset, double z, const dist::FactorDistribution& law);

/// Same, reusing a threshold from default_threshold().
double conditional_default_prob(const Asset& asset, double threshold, double z,
                                const dist::FactorDistribution& law);

/// First-order expansion of arcsin(sqrt(p(z))) around z = 0, doubled to
/// gate convention. Throws kNumerical when F(psi) is within 1e-12 of 0 or 1.
RotationCoeffs linearization_coeffs(const Asset& asset, const dist::FactorDistribution& law);

/// sin^2((offset + slope z) / 2).
double loaded_default_prob(const RotationCoeffs& coeffs, double z);

AffineAngles affine_grid_angles(const RotationCoeffs& coeffs, const dist::DiscreteDistribution& grid);

/// Caches the per-asset thresholds, which are expensive for NIG.
class ConditionalDefaults {
 public:
  ConditionalDefaults(std::vector<Asset> assets, dist::FactorDistribution law);

  std::size_t size() const { return assets_.size(); }
  const Asset& asset(std::size_t i) const { return assets_.at(i); }
  double probability(std::size_t i, double z) const;

 private:
  std::vector<Asset> assets_;
  dist::FactorDistribution law_;
  std::vector<double> thresholds_;
};

}  // namespace cdoqae::copula
