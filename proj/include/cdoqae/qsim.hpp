#pragma once

// Dense statevector simulator.
//
// Basis ordering is little-endian: in basis index i, qubit q holds the bit
// (i >> q) & 1. Rotations use the half-angle convention
// RY(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>.

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cdoqae::qsim {

using Amplitude = std::complex<double>;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kUnitarityTolerance = 1e-10;

/// Largest register the simulator will allocate (2^26 amplitudes, 1 GiB).
inline constexpr std::size_t kMaxQubits = 26;

struct QubitId {
  std::size_t index = 0;

  constexpr QubitId() = default;
  constexpr explicit QubitId(std::size_t i) : index(i) {}

  friend constexpr auto operator<=>(QubitId, QubitId) = default;
};

enum class GateKind { kH, kX, kZ, kRY, kSwap, kPhaseFlipOnZero };

std::string_view to_string(GateKind kind);

/// A gate acts on `targets` when every qubit in `controls` is |1>.
/// kPhaseFlipOnZero negates the amplitude of basis states in which every
/// target qubit is |0>.
struct Gate {
  GateKind kind = GateKind::kX;
  double angle = 0.0;  // kRY only
  std::vector<QubitId> targets;
  std::vector<QubitId> controls;

  friend bool operator==(const Gate&, const Gate&) = default;
};

Gate h(QubitId q);
Gate x(QubitId q);
Gate z(QubitId q);
Gate ry(double theta, QubitId q);
Gate swap(QubitId a, QubitId b);
Gate phase_flip_on_zero(std::vector<QubitId> qubits);

/// Adds `extra_controls` to the gate. Throws if any of them already
/// participates in the gate.
Gate controlled(Gate gate, std::span<const QubitId> extra_controls);

Gate inverse(Gate gate);

/// Throws Error(kOutOfRange / kInvalidArgument) when the gate is malformed or
/// references a qubit >= n_qubits.
void validate(const Gate& gate, std::size_t n_qubits);

/// One line: kind, angle, targets, controls.
std::string to_string(const Gate& gate);

class Circuit {
 public:
  explicit Circuit(std::size_t n_qubits = 0);

  std::size_t num_qubits() const { return n_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  Circuit& add(Gate gate);

  /// Appends every gate of `other`, whose register must fit in this one.
  Circuit& append(const Circuit& other);

  Circuit inverse() const;
  Circuit controlled(std::span<const QubitId> extra_controls) const;

  /// Plain-text gate listing, one gate per line. Debugging aid only.
  std::string listing() const;

 private:
  std::size_t n_qubits_;
  std::vector<Gate> gates_;
};

class QuantumState {
 public:
  /// |0...0> on n qubits.
  explicit QuantumState(std::size_t n_qubits);

  static QuantumState basis(std::size_t n_qubits, std::uint64_t index);

  /// Length must be a power of two and the vector normalized within
  /// kNormTolerance.
  static QuantumState from_amplitudes(std::vector<Amplitude> amplitudes);

  std::size_t num_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  Amplitude amplitude(std::uint64_t index) const { return amplitudes_.at(index); }

  void apply(const Gate& gate);
  void apply(const Circuit& circuit);

  double norm_squared() const;

  /// Probability of each integer value of `reg` (reg[0] is the least
  /// significant bit), length 2^reg.size().
  std::vector<double> register_probabilities(std::span<const QubitId> reg) const;

  friend void apply_qft(QuantumState& state, std::span<const QubitId> reg);
  friend void apply_inverse_qft(QuantumState& state, std::span<const QubitId> reg);

 private:
  QuantumState(std::size_t n_qubits, std::vector<Amplitude> amplitudes);

  void controlled_phase(QubitId control, QubitId target, double phi);
  void bit_reverse(std::span<const QubitId> reg);

  std::size_t n_qubits_;
  std::vector<Amplitude> amplitudes_;
};

QuantumState apply_gate(QuantumState state, const Gate& gate);

/// Runs the circuit from |0...0>.
QuantumState run_circuit(const Circuit& circuit);
QuantumState run_circuit(const Circuit& circuit, QuantumState initial);

/// QFT|x> = 2^{-r/2} sum_k exp(2 pi i x k / 2^r) |k> on the sub-register
/// `reg` (reg[0] least significant); identity on the other qubits.
void apply_qft(QuantumState& state, std::span<const QubitId> reg);
void apply_inverse_qft(QuantumState& state, std::span<const QubitId> reg);

double marginal_prob_one(const QuantumState& state, QubitId qubit);

using Histogram = std::map<std::uint64_t, std::uint64_t>;

/// Draws `shots` outcomes of `reg` from the exact marginal distribution by
/// inverse-CDF sampling. Identical seeds give identical histograms.
Histogram sample_register(const QuantumState& state, std::span<const QubitId> reg,
                          std::uint64_t shots, std::uint64_t seed);

/// Thread count used by the amplitude kernels; read once from
/// CDO_QAE_THREADS, defaulting to the hardware concurrency.
unsigned kernel_threads();

}  // namespace cdoqae::qsim
