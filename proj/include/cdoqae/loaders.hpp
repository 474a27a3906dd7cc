#pragma once

// Circuit builders for the pricing pipeline:
//   distribution load -> default loading (L_X, L_Z) -> weighted loss sum (S)
//   -> threshold comparators (C) -> piecewise-linear objective rotation (R).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cdoqae/copula.hpp"
#include "cdoqae/dist.hpp"
#include "cdoqae/qsim.hpp"
#include "cdoqae/tranche.hpp"

namespace cdoqae::loaders {

using qsim::Circuit;
using qsim::QubitId;
using pricing::PiecewiseSpec;

struct RegisterLayout {
  std::vector<QubitId> z_register;      // z_register[j] carries bit j of the grid index
  std::vector<QubitId> asset_register;  // one qubit per asset, |1> = default
  std::vector<QubitId> sum_register;    // total loss, little-endian
  std::vector<QubitId> carry_ancillas;  // shared scratch for S and C
  std::vector<QubitId> comparator_ancillas;
  QubitId objective;

  /// Consecutive allocation in the order listed above.
  static RegisterLayout allocate(std::size_t n_z, std::size_t n_x, std::size_t n_s,
                                 std::size_t n_comparators);

  std::size_t total_qubits() const;
  void validate() const;
};

/// Smallest n_s with 2^n_s - 1 >= total_loss (at least 1).
std::size_t sum_register_width(std::int64_t total_loss);

/// Prepares sum_i sqrt(probs[i]) |i> on the z register with multiplexed
/// RY rotations (uniformly controlled rotations, CNOT decomposition).
Circuit build_distribution_loader(const dist::DiscreteDistribution& grid,
                                  const RegisterLayout& layout);

/// For every asset: RY(base) then one z-controlled RY per grid qubit, so that
/// P(asset i = 1 | z index k) = sin^2((offset_i + slope_i grid[k]) / 2).
Circuit build_lx_lz(std::span<const copula::Asset> assets,
                    std::span<const copula::RotationCoeffs> coeffs,
                    const dist::DiscreteDistribution& grid, const RegisterLayout& layout);

/// Adds lambda_i into the sum register controlled on asset qubit i. Carry
/// ancillas are returned to |0>. Losses must be integral and fit in the
/// register.
Circuit build_weighted_sum(std::span<const copula::Asset> assets, const RegisterLayout& layout);

/// comparator_ancillas[flag_index] ^= (sum >= threshold), via the carry-out
/// of sum + (2^n_s - threshold). Scratch carries are restored.
Circuit build_comparator(const RegisterLayout& layout, std::int64_t threshold,
                         std::size_t flag_index = 0);

/// Rotates the objective to amplitude angle
///   pi/4 - c + 2c (f(L) - f_min) / (f_max - f_min)
/// using one comparator per breakpoint after the first. Comparators are
/// uncomputed at the end.
Circuit build_piecewise_objective(const PiecewiseSpec& spec, const RegisterLayout& layout);

struct Pipeline {
  Circuit circuit;
  RegisterLayout layout;
  PiecewiseSpec payoff;

  std::size_t total_qubits() const { return layout.total_qubits(); }
};

/// Full state preparation whose objective-qubit |1> probability encodes the
/// expected tranche loss.
Pipeline assemble_pipeline(std::span<const copula::Asset> assets,
                           const dist::FactorDistribution& law,
                           const dist::DiscreteDistribution& grid,
                           const pricing::Tranche& tranche, double c);

}  // namespace cdoqae::loaders
