#include "cdoqae/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>
#include <utility>

#include "cdoqae/error.hpp"
#include "cdoqae/random.hpp"

namespace cdoqae::qsim {
namespace {

constexpr std::uint64_t bit(QubitId q) { return std::uint64_t{1} << q.index; }

std::uint64_t mask_of(std::span<const QubitId> qubits) {
  std::uint64_t m = 0;
  for (QubitId q : qubits) m |= bit(q);
  return m;
}

// Scatters the low bits of `value` into the set positions of `mask`.
std::uint64_t deposit(std::uint64_t value, std::uint64_t mask) {
  std::uint64_t out = 0;
  while (mask != 0) {
    const std::uint64_t low = mask & (~mask + 1);
    if (value & 1) out |= low;
    value >>= 1;
    mask &= mask - 1;
  }
  return out;
}

constexpr std::uint64_t kParallelThreshold = std::uint64_t{1} << 15;

// Calls f(index) for every basis index whose `fixed_mask` bits equal the
// corresponding bits of `set_mask`. Chunks touch disjoint index sets, so
// splitting across threads does not change the result.
template <class F>
void for_each_index(std::size_t n_qubits, std::uint64_t fixed_mask, std::uint64_t set_mask,
                    F&& f) {
  const std::uint64_t all = (n_qubits == 64) ? ~std::uint64_t{0}
                                             : (std::uint64_t{1} << n_qubits) - 1;
  const std::uint64_t free = all & ~fixed_mask;
  const std::uint64_t count = std::uint64_t{1} << std::popcount(free);

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t i = deposit(begin, free);
    for (std::uint64_t t = begin; t < end; ++t) {
      f(i | set_mask);
      i = ((i | ~free) + 1) & free;
    }
  };

  const unsigned threads = kernel_threads();
  if (threads <= 1 || count < kParallelThreshold) {
    run_range(0, count);
    return;
  }
  const std::uint64_t chunk = (count + threads - 1) / threads;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&run_range, begin, end] { run_range(begin, end); });
  }
}

bool has_duplicates(std::vector<QubitId> qubits) {
  std::sort(qubits.begin(), qubits.end());
  return std::adjacent_find(qubits.begin(), qubits.end()) != qubits.end();
}

std::string join(std::span<const QubitId> qubits) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (i) os << ',';
    os << qubits[i].index;
  }
  os << ']';
  return os.str();
}

}  // namespace

unsigned kernel_threads() {
  static const unsigned threads = [] {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CDO_QAE_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return std::min(hw, static_cast<unsigned>(v));
    }
    return hw;
  }();
  return threads;
}

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::kH:
      return "H";
    case GateKind::kX:
      return "X";
    case GateKind::kZ:
      return "Z";
    case GateKind::kRY:
      return "RY";
    case GateKind::kSwap:
      return "SWAP";
    case GateKind::kPhaseFlipOnZero:
      return "PHASE_FLIP_ON_ZERO";
  }
  return "?";
}

Gate h(QubitId q) { return Gate{GateKind::kH, 0.0, {q}, {}}; }
Gate x(QubitId q) { return Gate{GateKind::kX, 0.0, {q}, {}}; }
Gate z(QubitId q) { return Gate{GateKind::kZ, 0.0, {q}, {}}; }
Gate ry(double theta, QubitId q) { return Gate{GateKind::kRY, theta, {q}, {}}; }
Gate swap(QubitId a, QubitId b) { return Gate{GateKind::kSwap, 0.0, {a, b}, {}}; }
Gate phase_flip_on_zero(std::vector<QubitId> qubits) {
  return Gate{GateKind::kPhaseFlipOnZero, 0.0, std::move(qubits), {}};
}

Gate controlled(Gate gate, std::span<const QubitId> extra_controls) {
  for (QubitId c : extra_controls) {
    const bool clash =
        std::find(gate.targets.begin(), gate.targets.end(), c) != gate.targets.end() ||
        std::find(gate.controls.begin(), gate.controls.end(), c) != gate.controls.end();
    require(!clash, ErrorCode::kInvalidArgument,
            "control qubit " + std::to_string(c.index) + " already used by " + to_string(gate));
  }
  gate.controls.insert(gate.controls.end(), extra_controls.begin(), extra_controls.end());
  require(!has_duplicates(gate.controls), ErrorCode::kInvalidArgument,
          "duplicate control qubits in " + to_string(gate));
  return gate;
}

Gate inverse(Gate gate) {
  if (gate.kind == GateKind::kRY) gate.angle = -gate.angle;
  return gate;
}

void validate(const Gate& gate, std::size_t n_qubits) {
  const std::size_t expected_targets = [&]() -> std::size_t {
    switch (gate.kind) {
      case GateKind::kSwap:
        return 2;
      case GateKind::kPhaseFlipOnZero:
        return 0;  // any positive count
      default:
        return 1;
    }
  }();
  if (expected_targets == 0) {
    require(!gate.targets.empty(), ErrorCode::kInvalidArgument,
            "PHASE_FLIP_ON_ZERO needs at least one qubit");
  } else {
    require(gate.targets.size() == expected_targets, ErrorCode::kInvalidArgument,
            std::string(to_string(gate.kind)) + " expects " + std::to_string(expected_targets) +
                " target(s), got " + std::to_string(gate.targets.size()));
  }
  require(std::isfinite(gate.angle), ErrorCode::kInvalidArgument, "non-finite rotation angle");
  for (QubitId q : gate.targets) {
    require(q.index < n_qubits, ErrorCode::kOutOfRange,
            "target qubit " + std::to_string(q.index) + " outside register of " +
                std::to_string(n_qubits));
  }
  for (QubitId q : gate.controls) {
    require(q.index < n_qubits, ErrorCode::kOutOfRange,
            "control qubit " + std::to_string(q.index) + " outside register of " +
                std::to_string(n_qubits));
  }
  std::vector<QubitId> all = gate.targets;
  all.insert(all.end(), gate.controls.begin(), gate.controls.end());
  require(!has_duplicates(all), ErrorCode::kInvalidArgument,
          "targets and controls must be distinct: " + to_string(gate));
}

std::string to_string(const Gate& gate) {
  std::ostringstream os;
  os << to_string(gate.kind);
  if (gate.kind == GateKind::kRY) {
    os.precision(17);
    os << ' ' << gate.angle;
  }
  os << " t=" << join(gate.targets) << " c=" << join(gate.controls);
  return os.str();
}

// --- Circuit ---------------------------------------------------------------

Circuit::Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {}

Circuit& Circuit::add(Gate gate) {
  validate(gate, n_qubits_);
  gates_.push_back(std::move(gate));
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  require(other.num_qubits() <= n_qubits_, ErrorCode::kOutOfRange,
          "cannot append a " + std::to_string(other.num_qubits()) + "-qubit circuit to a " +
              std::to_string(n_qubits_) + "-qubit circuit");
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  return *this;
}

Circuit Circuit::inverse() const {
  Circuit out(n_qubits_);
  out.gates_.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.gates_.push_back(qsim::inverse(*it));
  return out;
}

Circuit Circuit::controlled(std::span<const QubitId> extra_controls) const {
  Circuit out(n_qubits_);
  out.gates_.reserve(gates_.size());
  for (const Gate& g : gates_) out.add(qsim::controlled(g, extra_controls));
  return out;
}

std::string Circuit::listing() const {
  std::string out;
  for (const Gate& g : gates_) {
    out += to_string(g);
    out += '\n';
  }
  return out;
}

// --- QuantumState ----------------------------------------------------------

QuantumState::QuantumState(std::size_t n_qubits) : QuantumState(basis(n_qubits, 0)) {}

QuantumState::QuantumState(std::size_t n_qubits, std::vector<Amplitude> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

QuantumState QuantumState::basis(std::size_t n_qubits, std::uint64_t index) {
  require(n_qubits <= kMaxQubits, ErrorCode::kBudgetExceeded,
          "state of " + std::to_string(n_qubits) + " qubits exceeds simulator limit of " +
              std::to_string(kMaxQubits));
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  require(index < dim, ErrorCode::kOutOfRange, "basis index outside register");
  std::vector<Amplitude> amps(dim);
  amps[index] = 1.0;
  return QuantumState(n_qubits, std::move(amps));
}

QuantumState QuantumState::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const std::size_t dim = amplitudes.size();
  require(dim > 0 && std::has_single_bit(dim), ErrorCode::kInvalidArgument,
          "amplitude vector length must be a power of two");
  const auto n = static_cast<std::size_t>(std::countr_zero(dim));
  require(n <= kMaxQubits, ErrorCode::kBudgetExceeded, "state exceeds simulator limit");
  QuantumState s(n, std::move(amplitudes));
  require(std::abs(s.norm_squared() - 1.0) < kNormTolerance, ErrorCode::kInvalidArgument,
          "amplitudes are not normalized");
  return s;
}

double QuantumState::norm_squared() const {
  double total = 0.0;
  for (const Amplitude& a : amplitudes_) total += std::norm(a);
  return total;
}

void QuantumState::apply(const Gate& gate) {
  validate(gate, n_qubits_);
  Amplitude* amps = amplitudes_.data();
  const std::uint64_t ctrl = mask_of(gate.controls);

  switch (gate.kind) {
    case GateKind::kH: {
      const std::uint64_t t = bit(gate.targets[0]);
      const double r = std::numbers::sqrt2 / 2.0;
      for_each_index(n_qubits_, ctrl | t, ctrl, [=](std::uint64_t i) {
        const Amplitude a = amps[i];
        const Amplitude b = amps[i | t];
        amps[i] = r * (a + b);
        amps[i | t] = r * (a - b);
      });
      break;
    }
    case GateKind::kX: {
      const std::uint64_t t = bit(gate.targets[0]);
      for_each_index(n_qubits_, ctrl | t, ctrl,
                     [=](std::uint64_t i) { std::swap(amps[i], amps[i | t]); });
      break;
    }
    case GateKind::kZ: {
      const std::uint64_t t = bit(gate.targets[0]);
      for_each_index(n_qubits_, ctrl | t, ctrl | t, [=](std::uint64_t i) { amps[i] = -amps[i]; });
      break;
    }
    case GateKind::kRY: {
      const std::uint64_t t = bit(gate.targets[0]);
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      for_each_index(n_qubits_, ctrl | t, ctrl, [=](std::uint64_t i) {
        const Amplitude a = amps[i];
        const Amplitude b = amps[i | t];
        amps[i] = c * a - s * b;
        amps[i | t] = s * a + c * b;
      });
      break;
    }
    case GateKind::kSwap: {
      const std::uint64_t a = bit(gate.targets[0]);
      const std::uint64_t b = bit(gate.targets[1]);
      for_each_index(n_qubits_, ctrl | a | b, ctrl,
                     [=](std::uint64_t i) { std::swap(amps[i | a], amps[i | b]); });
      break;
    }
    case GateKind::kPhaseFlipOnZero: {
      const std::uint64_t reg = mask_of(gate.targets);
      for_each_index(n_qubits_, ctrl | reg, ctrl, [=](std::uint64_t i) { amps[i] = -amps[i]; });
      break;
    }
  }
}

void QuantumState::apply(const Circuit& circuit) {
  require(circuit.num_qubits() <= n_qubits_, ErrorCode::kOutOfRange,
          "circuit register larger than state");
  for (const Gate& g : circuit.gates()) apply(g);
}

std::vector<double> QuantumState::register_probabilities(std::span<const QubitId> reg) const {
  for (QubitId q : reg) {
    require(q.index < n_qubits_, ErrorCode::kOutOfRange,
            "register qubit " + std::to_string(q.index) + " outside state");
  }
  require(!has_duplicates({reg.begin(), reg.end()}), ErrorCode::kInvalidArgument,
          "register qubits must be distinct");
  std::vector<double> probs(std::size_t{1} << reg.size(), 0.0);
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    const double p = std::norm(amplitudes_[i]);
    if (p == 0.0) continue;
    std::uint64_t value = 0;
    for (std::size_t k = 0; k < reg.size(); ++k) value |= ((i >> reg[k].index) & 1u) << k;
    probs[value] += p;
  }
  return probs;
}

void QuantumState::controlled_phase(QubitId control, QubitId target, double phi) {
  const Amplitude w = std::polar(1.0, phi);
  const std::uint64_t m = bit(control) | bit(target);
  Amplitude* amps = amplitudes_.data();
  for_each_index(n_qubits_, m, m, [=](std::uint64_t i) { amps[i] *= w; });
}

void QuantumState::bit_reverse(std::span<const QubitId> reg) {
  const std::size_t r = reg.size();
  for (std::size_t k = 0; k < r / 2; ++k) apply(swap(reg[k], reg[r - 1 - k]));
}

QuantumState apply_gate(QuantumState state, const Gate& gate) {
  state.apply(gate);
  return state;
}

QuantumState run_circuit(const Circuit& circuit) {
  return run_circuit(circuit, QuantumState(circuit.num_qubits()));
}

QuantumState run_circuit(const Circuit& circuit, QuantumState initial) {
  initial.apply(circuit);
  return initial;
}

namespace {

void check_register(const QuantumState& state, std::span<const QubitId> reg) {
  require(!reg.empty(), ErrorCode::kInvalidArgument, "empty register");
  for (QubitId q : reg) {
    require(q.index < state.num_qubits(), ErrorCode::kOutOfRange,
            "register qubit " + std::to_string(q.index) + " outside state");
  }
  require(!has_duplicates({reg.begin(), reg.end()}), ErrorCode::kInvalidArgument,
          "duplicate qubits in register " + join(reg));
}

}  // namespace

void apply_qft(QuantumState& state, std::span<const QubitId> reg) {
  check_register(state, reg);
  const std::size_t r = reg.size();
  for (std::size_t j = r; j-- > 0;) {
    state.apply(h(reg[j]));
    for (std::size_t k = j; k-- > 0;) {
      state.controlled_phase(reg[k], reg[j], std::numbers::pi / std::ldexp(1.0, int(j - k)));
    }
  }
  state.bit_reverse(reg);
}

void apply_inverse_qft(QuantumState& state, std::span<const QubitId> reg) {
  check_register(state, reg);
  const std::size_t r = reg.size();
  state.bit_reverse(reg);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      state.controlled_phase(reg[k], reg[j], -std::numbers::pi / std::ldexp(1.0, int(j - k)));
    }
    state.apply(h(reg[j]));
  }
}

double marginal_prob_one(const QuantumState& state, QubitId qubit) {
  require(qubit.index < state.num_qubits(), ErrorCode::kOutOfRange,
          "qubit " + std::to_string(qubit.index) + " outside state");
  const std::uint64_t b = bit(qubit);
  const auto amps = state.amplitudes();
  double p = 0.0;
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (i & b) p += std::norm(amps[i]);
  }
  return std::clamp(p, 0.0, 1.0);
}

Histogram sample_register(const QuantumState& state, std::span<const QubitId> reg,
                          std::uint64_t shots, std::uint64_t seed) {
  check_register(state, reg);
  require(shots >= 1, ErrorCode::kInvalidArgument, "shot count must be at least 1");
  const std::vector<double> probs = state.register_probabilities(reg);
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    cdf[k] = acc;
    if (probs[k] > 0.0) last_nonzero = k;
  }
  const CounterRng rng(seed);
  Histogram hist;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform(s) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t outcome = static_cast<std::size_t>(it - cdf.begin());
    if (outcome > last_nonzero) outcome = last_nonzero;
    ++hist[outcome];
  }
  return hist;
}

}  // namespace cdoqae::qsim
