#pragma once

// Tranche pricing: exact enumeration, Monte Carlo, and the amplitude
// estimation route, all over the same discretized factor model.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cdoqae/copula.hpp"
#include "cdoqae/dist.hpp"
#include "cdoqae/qae.hpp"
#include "cdoqae/tranche.hpp"

namespace cdoqae::pricing {

inline constexpr std::size_t kMaxEnumeratedAssets = 20;
inline constexpr std::int64_t kDefaultQuantization = 5;

struct Portfolio {
  std::vector<copula::Asset> assets;
  std::vector<Tranche> tranches;
  double recovery = 0.0;  // already reflected in loss_given_default

  /// Throws on invalid assets/tranches or non-contiguous tranches. Returns
  /// soft warnings (e.g. the last upper attachment exceeds the maximal loss).
  std::vector<std::string> validate() const;
  double total_loss() const;
  const Tranche& tranche(std::string_view name) const;
};

enum class Method { kExact, kMonteCarlo, kQae };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;

  friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

struct QaeDiagnostics {
  double p1_estimate = 0.0;        // modal QAE estimate of P1
  double p1_mean = 0.0;            // histogram-weighted estimate of P1
  double exact_p1 = 0.0;           // statevector P1
  double error_bound = 0.0;        // pi/M + pi^2/M^2
  double raw_expected_loss = 0.0;  // before clamping to [0, N]
  double c = 0.0;
  std::int64_t quantization = 1;
  int m = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::size_t total_qubits = 0;

  friend bool operator==(const QaeDiagnostics&, const QaeDiagnostics&) = default;
};

struct TrancheReport {
  std::string tranche;
  Method method = Method::kExact;
  double expected_loss = 0.0;
  double spread = 0.0;
  std::optional<double> standard_error;  // Monte Carlo only
  std::optional<QaeDiagnostics> qae;     // amplitude estimation only

  friend bool operator==(const TrancheReport&, const TrancheReport&) = default;
};

struct PricingReport {
  std::string distribution;
  std::vector<TrancheReport> entries;
  std::vector<std::string> warnings;

  friend bool operator==(const PricingReport&, const PricingReport&) = default;
};

/// sum_k probs[k] sum_{a in {0,1}^n} prod_i p_i(z_k)^a_i (1 - p_i(z_k))^(1 - a_i)
///   * tranche_loss(sum_i a_i lambda_i)
double exact_expected_tranche_loss(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                                   const Tranche& tranche, const dist::FactorDistribution& law);

/// Every tranche of the portfolio from one enumeration pass.
std::vector<double> exact_expected_tranche_losses(const Portfolio& portfolio,
                                                  const dist::DiscreteDistribution& grid,
                                                  const dist::FactorDistribution& law);

/// sum_k probs[k] sum_i lambda_i p_i(z_k).
double exact_expected_total_loss(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                                 const dist::FactorDistribution& law);

/// z drawn from the grid, defaults drawn independently given z. Samples are
/// processed in fixed-size chunks with counter-based draws, so the result is
/// bitwise identical for a given (seed, n) regardless of thread count.
McEstimate monte_carlo_expected_loss(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                                     const Tranche& tranche, const dist::FactorDistribution& law,
                                     std::uint64_t samples, std::uint64_t seed);

/// E[L] / (upper - lower). Throws if E[L] is outside [0, notional].
double fair_spread(double expected_loss, const Tranche& tranche);

/// lambda_i * (1 - eta); attachment points unchanged.
Portfolio apply_recovery(const Portfolio& portfolio, double eta);

/// Inverts P1 = (1/2 - c) + 2c E[L] / N.
double expected_loss_from_p1(double p1, double c, double notional);

/// Builds the pipeline, runs amplitude estimation and inverts the modal
/// estimate. Fractional losses are scaled by `quantization` (attachment points
/// too) so the sum register stays integral; the result is scaled back.
TrancheReport price_via_qae(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                            const Tranche& tranche, const dist::FactorDistribution& law, double c,
                            const qae::QaeConfig& config,
                            std::int64_t quantization = kDefaultQuantization);

void to_json(nlohmann::json& j, const TrancheReport& r);
void from_json(const nlohmann::json& j, TrancheReport& r);
void to_json(nlohmann::json& j, const PricingReport& r);
void from_json(const nlohmann::json& j, PricingReport& r);

/// Fixed-width table with spreads as percentages to one decimal.
std::string format_table(const PricingReport& report);
std::string format_csv(const PricingReport& report);

}  // namespace cdoqae::pricing
