#include "cdoqae/loaders.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "cdoqae/error.hpp"

namespace cdoqae::loaders {
namespace {

using qsim::controlled;
using qsim::Gate;
using qsim::ry;
using qsim::x;

std::vector<QubitId> take(std::size_t& next, std::size_t count) {
  std::vector<QubitId> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(next++);
  return out;
}

Gate cx(std::initializer_list<QubitId> controls, QubitId target) {
  return controlled(x(target), std::vector<QubitId>(controls));
}

std::int64_t integral_loss(double loss) {
  const double r = std::round(loss);
  require(std::abs(loss - r) <= 1e-9, ErrorCode::kInvalidArgument,
          "quantum loss register needs integral losses, got " + std::to_string(loss));
  return static_cast<std::int64_t>(r);
}

// Uniformly controlled RY: for control value v (bit l of v on controls[l]) the
// target is rotated by angles[v]. Realized as 2^k RY gates interleaved with
// CNOTs following a Gray code.
void append_uniformly_controlled_ry(Circuit& circuit, std::span<const QubitId> controls,
                                    QubitId target, std::span<const double> angles) {
  const std::size_t k = controls.size();
  const std::size_t count = std::size_t{1} << k;
  if (k == 0) {
    circuit.add(ry(angles[0], target));
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t gray = i ^ (i >> 1);
    double alpha = 0.0;
    for (std::size_t v = 0; v < count; ++v) {
      alpha += (std::popcount(v & gray) % 2 ? -1.0 : 1.0) * angles[v];
    }
    alpha /= static_cast<double>(count);
    if (alpha != 0.0) circuit.add(ry(alpha, target));
    const std::size_t flip =
        (i + 1 == count) ? k - 1 : static_cast<std::size_t>(std::countr_zero(i + 1));
    circuit.add(cx({controls[flip]}, target));
  }
}

}  // namespace

RegisterLayout RegisterLayout::allocate(std::size_t n_z, std::size_t n_x, std::size_t n_s,
                                        std::size_t n_comparators) {
  require(n_z >= 1, ErrorCode::kInvalidArgument, "z register needs at least one qubit");
  require(n_s >= 1, ErrorCode::kInvalidArgument, "sum register needs at least one qubit");
  RegisterLayout layout;
  std::size_t next = 0;
  layout.z_register = take(next, n_z);
  layout.asset_register = take(next, n_x);
  layout.sum_register = take(next, n_s);
  layout.carry_ancillas = take(next, n_s);
  layout.comparator_ancillas = take(next, n_comparators);
  layout.objective = QubitId(next);
  return layout;
}

std::size_t RegisterLayout::total_qubits() const {
  return z_register.size() + asset_register.size() + sum_register.size() +
         carry_ancillas.size() + comparator_ancillas.size() + 1;
}

void RegisterLayout::validate() const {
  std::vector<QubitId> all;
  for (const auto* reg : {&z_register, &asset_register, &sum_register, &carry_ancillas,
                          &comparator_ancillas}) {
    all.insert(all.end(), reg->begin(), reg->end());
  }
  all.push_back(objective);
  std::sort(all.begin(), all.end());
  require(std::adjacent_find(all.begin(), all.end()) == all.end(), ErrorCode::kInvalidArgument,
          "register layout reuses a qubit");
  require(carry_ancillas.size() >= sum_register.size() - 1, ErrorCode::kInvalidArgument,
          "layout needs n_s - 1 carry ancillas at least");
}

std::size_t sum_register_width(std::int64_t total_loss) {
  require(total_loss >= 0, ErrorCode::kInvalidArgument, "total loss must be >= 0");
  std::size_t n = 1;
  while (((std::int64_t{1} << n) - 1) < total_loss) ++n;
  return n;
}

Circuit build_distribution_loader(const dist::DiscreteDistribution& grid,
                                  const RegisterLayout& layout) {
  const std::size_t n = grid.n_z;
  require(layout.z_register.size() == n && grid.probs.size() == (std::size_t{1} << n),
          ErrorCode::kInvalidArgument, "distribution does not match the z register");
  Circuit circuit(layout.total_qubits());

  const double first = grid.probs.front();
  if (std::all_of(grid.probs.begin(), grid.probs.end(),
                  [first](double p) { return std::abs(p - first) <= 1e-15; })) {
    for (QubitId q : layout.z_register) circuit.add(qsim::h(q));
    return circuit;
  }

  // Most significant bit first; each level conditions on the bits above it.
  for (std::size_t level = 0; level < n; ++level) {
    const std::size_t target_bit = n - 1 - level;
    const std::size_t prefixes = std::size_t{1} << level;
    std::vector<double> angles(prefixes);
    for (std::size_t v = 0; v < prefixes; ++v) {
      double p0 = 0.0;
      double p1 = 0.0;
      for (std::size_t i = 0; i < grid.probs.size(); ++i) {
        if ((i >> (target_bit + 1)) != v) continue;
        ((i >> target_bit) & 1 ? p1 : p0) += grid.probs[i];
      }
      angles[v] = 2.0 * std::atan2(std::sqrt(p1), std::sqrt(p0));
    }
    std::span<const QubitId> controls(layout.z_register.data() + target_bit + 1, level);
    append_uniformly_controlled_ry(circuit, controls, layout.z_register[target_bit], angles);
  }
  return circuit;
}

Circuit build_lx_lz(std::span<const copula::Asset> assets,
                    std::span<const copula::RotationCoeffs> coeffs,
                    const dist::DiscreteDistribution& grid, const RegisterLayout& layout) {
  require(assets.size() == coeffs.size(), ErrorCode::kInvalidArgument,
          "one coefficient set per asset required");
  require(assets.size() == layout.asset_register.size(), ErrorCode::kInvalidArgument,
          "asset register size does not match asset count");
  require(layout.z_register.size() == grid.n_z, ErrorCode::kInvalidArgument,
          "z register does not match the distribution");
  Circuit circuit(layout.total_qubits());
  for (std::size_t i = 0; i < assets.size(); ++i) {
    const QubitId target = layout.asset_register[i];
    const copula::AffineAngles angles = copula::affine_grid_angles(coeffs[i], grid);
    circuit.add(ry(angles.base_angle, target));
    for (std::size_t j = 0; j < angles.per_qubit_angles.size(); ++j) {
      if (angles.per_qubit_angles[j] == 0.0) continue;
      const QubitId control[] = {layout.z_register[j]};
      circuit.add(controlled(ry(angles.per_qubit_angles[j], target), control));
    }
  }
  return circuit;
}

Circuit build_weighted_sum(std::span<const copula::Asset> assets, const RegisterLayout& layout) {
  require(assets.size() == layout.asset_register.size(), ErrorCode::kInvalidArgument,
          "asset register size does not match asset count");
  const std::size_t n = layout.sum_register.size();
  require(layout.carry_ancillas.size() + 1 >= n, ErrorCode::kInvalidArgument,
          "not enough carry ancillas");

  std::int64_t total = 0;
  std::vector<std::int64_t> losses;
  for (const auto& a : assets) {
    losses.push_back(integral_loss(a.loss_given_default));
    total += losses.back();
  }
  const std::int64_t capacity = (std::int64_t{1} << n) - 1;
  require(total <= capacity, ErrorCode::kBudgetExceeded,
          "total loss " + std::to_string(total) + " exceeds sum register capacity " +
              std::to_string(capacity) + " (n_s = " + std::to_string(n) + ")");

  const auto& s = layout.sum_register;
  const auto& w = layout.carry_ancillas;  // w[j] holds the carry into bit j + 1
  Circuit circuit(layout.total_qubits());

  for (std::size_t i = 0; i < assets.size(); ++i) {
    const std::int64_t k = losses[i];
    if (k == 0) continue;
    const QubitId a = layout.asset_register[i];
    auto kbit = [k](std::size_t j) { return ((k >> j) & 1) != 0; };

    auto carry_gates = [&](std::size_t j) {  // computes carry into bit j + 1
      Circuit g(layout.total_qubits());
      if (j == 0) {
        if (kbit(0)) g.add(cx({a, s[0]}, w[0]));
        return g;
      }
      if (kbit(j)) {
        g.add(cx({a, s[j]}, w[j]));
        g.add(cx({a, w[j - 1]}, w[j]));
      }
      g.add(cx({a, s[j], w[j - 1]}, w[j]));
      return g;
    };

    for (std::size_t j = 0; j + 1 < n; ++j) circuit.append(carry_gates(j));
    for (std::size_t j = n; j-- > 0;) {
      if (kbit(j)) circuit.add(cx({a}, s[j]));
      if (j >= 1) {
        circuit.add(cx({a, w[j - 1]}, s[j]));
        circuit.append(carry_gates(j - 1).inverse());
      }
    }
  }
  return circuit;
}

Circuit build_comparator(const RegisterLayout& layout, std::int64_t threshold,
                         std::size_t flag_index) {
  const std::size_t n = layout.sum_register.size();
  const std::int64_t limit = (std::int64_t{1} << n) - 1;
  require(threshold >= 0 && threshold <= limit, ErrorCode::kOutOfRange,
          "comparator threshold " + std::to_string(threshold) + " outside [0, " +
              std::to_string(limit) + "]");
  require(flag_index < layout.comparator_ancillas.size(), ErrorCode::kOutOfRange,
          "no comparator ancilla at index " + std::to_string(flag_index));
  require(layout.carry_ancillas.size() + 1 >= n, ErrorCode::kInvalidArgument,
          "not enough scratch qubits for the comparator");

  const QubitId flag = layout.comparator_ancillas[flag_index];
  Circuit circuit(layout.total_qubits());
  if (threshold == 0) {
    circuit.add(x(flag));
    return circuit;
  }

  const auto& s = layout.sum_register;
  const auto& w = layout.carry_ancillas;
  const std::int64_t t = (std::int64_t{1} << n) - threshold;
  auto tbit = [t](std::size_t j) { return ((t >> j) & 1) != 0; };

  // Carry into bit j + 1 of s + t; the final carry lands on the flag.
  Circuit carries(layout.total_qubits());
  Circuit last(layout.total_qubits());
  for (std::size_t j = 0; j < n; ++j) {
    Circuit& out = (j + 1 == n) ? last : carries;
    const QubitId target = (j + 1 == n) ? flag : w[j];
    if (j == 0) {
      if (tbit(0)) out.add(cx({s[0]}, target));
      continue;
    }
    if (tbit(j)) {
      out.add(cx({s[j]}, target));
      out.add(cx({w[j - 1]}, target));
    }
    out.add(cx({s[j], w[j - 1]}, target));
  }
  circuit.append(carries).append(last).append(carries.inverse());
  return circuit;
}

Circuit build_piecewise_objective(const PiecewiseSpec& spec, const RegisterLayout& layout) {
  spec.validate();
  const std::size_t n_breaks = spec.breakpoints.size();
  require(layout.comparator_ancillas.size() + 1 >= n_breaks, ErrorCode::kInvalidArgument,
          "one comparator ancilla per breakpoint after the first is required");

  const std::size_t n = layout.sum_register.size();
  const std::int64_t capacity = (std::int64_t{1} << n) - 1;
  const double scale = 4.0 * spec.c / (spec.f_max - spec.f_min);  // gate angle per unit of f
  const QubitId obj = layout.objective;
  auto intercept = [&spec](std::size_t k) {
    return spec.offsets[k] - spec.slopes[k] * static_cast<double>(spec.breakpoints[k]);
  };

  Circuit comparators(layout.total_qubits());
  std::vector<bool> active(n_breaks, false);
  for (std::size_t k = 1; k < n_breaks; ++k) {
    if (spec.breakpoints[k] > capacity) continue;  // never reached
    active[k] = true;
    comparators.append(build_comparator(layout, spec.breakpoints[k], k - 1));
  }

  Circuit circuit(layout.total_qubits());
  circuit.append(comparators);

  circuit.add(ry(2.0 * (std::numbers::pi / 4.0 - spec.c) + scale * (intercept(0) - spec.f_min), obj));
  auto add_linear = [&](double slope, std::vector<QubitId> extra) {
    if (slope == 0.0) return;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<QubitId> controls = extra;
      controls.push_back(layout.sum_register[j]);
      circuit.add(controlled(ry(scale * slope * std::ldexp(1.0, static_cast<int>(j)), obj), controls));
    }
  };
  add_linear(spec.slopes[0], {});
  for (std::size_t k = 1; k < n_breaks; ++k) {
    if (!active[k]) continue;
    const QubitId flag = layout.comparator_ancillas[k - 1];
    const double jump = intercept(k) - intercept(k - 1);
    if (jump != 0.0) {
      const QubitId control[] = {flag};
      circuit.add(controlled(ry(scale * jump, obj), control));
    }
    add_linear(spec.slopes[k] - spec.slopes[k - 1], {flag});
  }

  // Each comparator is an involution on a clean flag, so replaying them
  // (in reverse) uncomputes the flags.
  circuit.append(comparators.inverse());
  return circuit;
}

Pipeline assemble_pipeline(std::span<const copula::Asset> assets,
                           const dist::FactorDistribution& law,
                           const dist::DiscreteDistribution& grid,
                           const pricing::Tranche& tranche, double c) {
  require(!assets.empty(), ErrorCode::kInvalidArgument, "pipeline needs at least one asset");
  std::int64_t max_loss = 0;
  std::vector<copula::RotationCoeffs> coeffs;
  for (const auto& a : assets) {
    a.validate();
    max_loss += integral_loss(a.loss_given_default);
    coeffs.push_back(copula::linearization_coeffs(a, law));
  }
  PiecewiseSpec payoff = pricing::tranche_to_piecewise(tranche, max_loss, c);
  const std::size_t n_s = sum_register_width(max_loss);
  RegisterLayout layout =
      RegisterLayout::allocate(grid.n_z, assets.size(), n_s, payoff.breakpoints.size() - 1);
  layout.validate();

  Circuit circuit(layout.total_qubits());
  circuit.append(build_distribution_loader(grid, layout));
  circuit.append(build_lx_lz(assets, coeffs, grid, layout));
  circuit.append(build_weighted_sum(assets, layout));
  circuit.append(build_piecewise_objective(payoff, layout));
  return Pipeline{std::move(circuit), std::move(layout), std::move(payoff)};
}

}  // namespace cdoqae::loaders
