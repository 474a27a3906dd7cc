#include "cdoqae/qae.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cdoqae/error.hpp"

namespace cdoqae::qae {

void QaeConfig::validate() const {
  require(m >= 1 && m <= kMaxAncillas, ErrorCode::kOutOfRange,
          "QAE ancilla count m must lie in [1, " + std::to_string(kMaxAncillas) + "], got " +
              std::to_string(m));
  require(shots >= 1, ErrorCode::kInvalidArgument, "QAE needs at least one shot");
}

double grid_estimate(std::uint64_t y, int m) {
  const double s = std::sin(static_cast<double>(y) * std::numbers::pi / std::ldexp(1.0, m));
  return s * s;
}

Circuit build_grover_operator(const Circuit& state_prep, QubitId objective) {
  const std::size_t n = state_prep.num_qubits();
  require(objective.index < n, ErrorCode::kOutOfRange,
          "objective qubit " + std::to_string(objective.index) + " outside the register of A");

  std::vector<QubitId> all;
  all.reserve(n);
  for (std::size_t q = 0; q < n; ++q) all.emplace_back(q);

  Circuit q(n);
  q.add(qsim::z(objective));
  q.append(state_prep.inverse());
  q.add(qsim::phase_flip_on_zero(all));
  q.append(state_prep);
  // global -1 = X Z X Z
  q.add(qsim::x(objective)).add(qsim::z(objective)).add(qsim::x(objective)).add(qsim::z(objective));
  return q;
}

double exact_p1(const Circuit& state_prep, QubitId objective) {
  require(objective.index < state_prep.num_qubits(), ErrorCode::kOutOfRange,
          "objective qubit outside the register of A");
  return qsim::marginal_prob_one(qsim::run_circuit(state_prep), objective);
}

double qae_error_bound(int m) {
  require(m >= 1, ErrorCode::kOutOfRange, "m must be >= 1");
  const double M = std::ldexp(1.0, m);
  return std::numbers::pi / M + std::numbers::pi * std::numbers::pi / (M * M);
}

std::pair<std::uint64_t, double> modal_estimate(
    const std::map<std::uint64_t, std::uint64_t>& histogram, int m) {
  require(!histogram.empty(), ErrorCode::kInvalidArgument, "empty QAE histogram");
  const std::uint64_t M = std::uint64_t{1} << m;
  std::map<std::uint64_t, std::uint64_t> folded;
  for (const auto& [y, count] : histogram) folded[std::min(y, M - y)] += count;
  // Ascending keys mean ascending estimates, so the strict comparison keeps
  // the smaller estimate on ties.
  std::uint64_t best_y = 0;
  std::uint64_t best_count = 0;
  for (const auto& [y, count] : folded) {
    if (count > best_count) {
      best_y = y;
      best_count = count;
    }
  }
  return {best_y, grid_estimate(best_y, m)};
}

QaeResult run_qae(const Circuit& state_prep, QubitId objective, const QaeConfig& config) {
  config.validate();
  const std::size_t n = state_prep.num_qubits();
  const std::size_t total = n + static_cast<std::size_t>(config.m);
  require(total <= kMaxQaeQubits, ErrorCode::kBudgetExceeded,
          "QAE needs " + std::to_string(total) + " qubits (" + std::to_string(n) +
              " state preparation + " + std::to_string(config.m) + " ancillas); limit is " +
              std::to_string(kMaxQaeQubits));

  Circuit grover(total);
  grover.append(build_grover_operator(state_prep, objective));

  std::vector<QubitId> ancillas;
  for (int j = 0; j < config.m; ++j) ancillas.emplace_back(n + static_cast<std::size_t>(j));

  qsim::QuantumState state(total);
  state.apply(state_prep);
  for (QubitId a : ancillas) state.apply(qsim::h(a));
  for (int j = 0; j < config.m; ++j) {
    const QubitId control[] = {ancillas[static_cast<std::size_t>(j)]};
    const Circuit controlled_q = grover.controlled(control);
    for (std::uint64_t rep = 0; rep < (std::uint64_t{1} << j); ++rep) state.apply(controlled_q);
  }
  qsim::apply_inverse_qft(state, ancillas);

  QaeResult r;
  r.histogram = qsim::sample_register(state, ancillas, config.shots, config.seed);
  const auto [y_mode, estimate] = modal_estimate(r.histogram, config.m);
  r.y_mode = y_mode;
  r.a_estimate = estimate;
  double weighted = 0.0;
  for (const auto& [y, count] : r.histogram) {
    weighted += static_cast<double>(count) * grid_estimate(y, config.m);
  }
  r.a_mean = weighted / static_cast<double>(config.shots);
  r.theta = static_cast<double>(y_mode) * std::numbers::pi / std::ldexp(1.0, config.m);
  r.error_bound = qae_error_bound(config.m);
  r.exact_p1 = exact_p1(state_prep, objective);
  r.m = config.m;
  r.shots = config.shots;
  r.seed = config.seed;
  r.total_qubits = total;
  return r;
}

void to_json(nlohmann::json& j, const QaeResult& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [y, count] : r.histogram) hist[std::to_string(y)] = count;
  j = nlohmann::json{{"histogram", hist},          {"y_mode", r.y_mode},
                     {"a_estimate", r.a_estimate}, {"a_mean", r.a_mean},
                     {"theta", r.theta},           {"error_bound", r.error_bound},
                     {"exact_p1", r.exact_p1},     {"m", r.m},
                     {"shots", r.shots},           {"seed", r.seed},
                     {"total_qubits", r.total_qubits}};
}

void from_json(const nlohmann::json& j, QaeResult& r) {
  r.histogram.clear();
  for (const auto& [key, count] : j.at("histogram").items()) {
    r.histogram[std::stoull(key)] = count.get<std::uint64_t>();
  }
  j.at("y_mode").get_to(r.y_mode);
  j.at("a_estimate").get_to(r.a_estimate);
  j.at("a_mean").get_to(r.a_mean);
  j.at("theta").get_to(r.theta);
  j.at("error_bound").get_to(r.error_bound);
  j.at("exact_p1").get_to(r.exact_p1);
  j.at("m").get_to(r.m);
  j.at("shots").get_to(r.shots);
  j.at("seed").get_to(r.seed);
  j.at("total_qubits").get_to(r.total_qubits);
}

}  // namespace cdoqae::qae
