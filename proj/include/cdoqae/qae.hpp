#pragma once

// Canonical quantum amplitude estimation: Grover operator, phase estimation
// on m ancillas, and estimate extraction.

#include <cstddef>
#include <cstdint>
#include <map>

#include "json.hpp"

#include "cdoqae/qsim.hpp"

namespace cdoqae::qae {

using qsim::Circuit;
using qsim::QubitId;

/// Qubits available to run_qae (state-preparation register plus ancillas).
inline constexpr std::size_t kMaxQaeQubits = 24;
inline constexpr int kMaxAncillas = 6;

struct QaeConfig {
  int m = 4;                 // ancillas; grid size M = 2^m
  std::uint64_t shots = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t grid_size() const { return std::uint64_t{1} << m; }
};

struct QaeResult {
  std::map<std::uint64_t, std::uint64_t> histogram;  // y -> count
  std::uint64_t y_mode = 0;   // representative y <= M/2 of the modal estimate
  double a_estimate = 0.0;    // sin^2(y_mode pi / M)
  double a_mean = 0.0;        // histogram-weighted mean of sin^2(y pi / M)
  double theta = 0.0;         // y_mode pi / M
  double error_bound = 0.0;   // pi/M + pi^2/M^2
  double exact_p1 = 0.0;      // objective marginal of A|0>
  int m = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::size_t total_qubits = 0;

  friend bool operator==(const QaeResult&, const QaeResult&) = default;
};

/// sin^2(y pi / M).
double grid_estimate(std::uint64_t y, int m);

/// Q = -A S_0 A^dagger S_good: S_good flips the sign of objective = |1>,
/// S_0 flips the all-zero state of A's register. The overall -1 is emitted as
/// gates (X Z X Z on the objective) so that controlled powers of Q carry the
/// correct relative phase. On span{A|0>} Q rotates by 2 theta_a,
/// sin^2(theta_a) = a.
Circuit build_grover_operator(const Circuit& state_prep, QubitId objective);

/// Objective-qubit marginal of A|0...0>.
double exact_p1(const Circuit& state_prep, QubitId objective);

/// pi/M + pi^2/M^2 with M = 2^m.
double qae_error_bound(int m);

/// Phase estimation with ancillas appended after A's register: Hadamards,
/// controlled-Q^{2^j} as 2^j controlled-Q applications, inverse QFT, sampled
/// readout. The modal estimate aggregates y and M - y (they map to the same a);
/// ties go to the smaller estimate. Throws kBudgetExceeded beyond
/// kMaxQaeQubits.
QaeResult run_qae(const Circuit& state_prep, QubitId objective, const QaeConfig& config);

/// Modal estimate and y of a histogram, folded over y <-> M - y.
std::pair<std::uint64_t, double> modal_estimate(const std::map<std::uint64_t, std::uint64_t>& histogram,
                                                int m);

void to_json(nlohmann::json& j, const QaeResult& r);
void from_json(const nlohmann::json& j, QaeResult& r);

}  // namespace cdoqae::qae
