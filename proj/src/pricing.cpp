#include "cdoqae/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "cdoqae/error.hpp"
#include "cdoqae/loaders.hpp"
#include "cdoqae/random.hpp"

namespace cdoqae::pricing {
namespace {

void check_enumerable(const Portfolio& portfolio) {
  require(portfolio.assets.size() <= kMaxEnumeratedAssets, ErrorCode::kBudgetExceeded,
          "exact enumeration limited to " + std::to_string(kMaxEnumeratedAssets) + " assets, got " +
              std::to_string(portfolio.assets.size()));
}

// p_i(z_k) for every grid point k and asset i, row-major by k.
std::vector<double> conditional_table(const Portfolio& portfolio,
                                      const dist::DiscreteDistribution& grid,
                                      const dist::FactorDistribution& law) {
  const copula::ConditionalDefaults defaults(portfolio.assets, law);
  const std::size_t n = portfolio.assets.size();
  std::vector<double> table(grid.size() * n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) table[k * n + i] = defaults.probability(i, grid.grid[k]);
  }
  return table;
}

struct ChunkSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

constexpr std::uint64_t kMcChunk = 4096;

}  // namespace

std::vector<std::string> Portfolio::validate() const {
  require(!assets.empty(), ErrorCode::kInvalidArgument, "assets: portfolio needs at least one asset");
  for (const auto& a : assets) a.validate();
  require(!tranches.empty(), ErrorCode::kInvalidArgument,
          "tranches: portfolio needs at least one tranche");
  require(recovery >= 0.0 && recovery <= 1.0, ErrorCode::kInvalidArgument,
          "recovery must lie in [0, 1]");
  std::set<std::string> names;
  for (std::size_t k = 0; k < tranches.size(); ++k) {
    tranches[k].validate();
    require(names.insert(tranches[k].name).second, ErrorCode::kInvalidArgument,
            "duplicate tranche name '" + tranches[k].name + "'");
    const std::int64_t expected_lower = (k == 0) ? 0 : tranches[k - 1].upper;
    require(tranches[k].lower == expected_lower, ErrorCode::kInvalidArgument,
            "tranches must be contiguous from 0: '" + tranches[k].name + "' starts at " +
                std::to_string(tranches[k].lower) + ", expected " + std::to_string(expected_lower));
  }
  std::vector<std::string> warnings;
  const double max_loss = total_loss();
  if (static_cast<double>(tranches.back().upper) > max_loss + 1e-12) {
    std::ostringstream os;
    os << "last upper attachment " << tranches.back().upper << " exceeds the maximal pool loss "
       << max_loss;
    warnings.push_back(os.str());
  }
  return warnings;
}

double Portfolio::total_loss() const {
  double total = 0.0;
  for (const auto& a : assets) total += a.loss_given_default;
  return total;
}

const Tranche& Portfolio::tranche(std::string_view name) const {
  for (const auto& t : tranches) {
    if (t.name == name) return t;
  }
  std::string available;
  for (const auto& t : tranches) available += (available.empty() ? "" : ", ") + t.name;
  fail(ErrorCode::kInvalidArgument,
       "unknown tranche '" + std::string(name) + "'; available: " + available);
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kExact:
      return "exact";
    case Method::kMonteCarlo:
      return "mc";
    case Method::kQae:
      return "qae";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  if (name == "exact") return Method::kExact;
  if (name == "mc") return Method::kMonteCarlo;
  if (name == "qae") return Method::kQae;
  fail(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::vector<double> exact_expected_tranche_losses(const Portfolio& portfolio,
                                                  const dist::DiscreteDistribution& grid,
                                                  const dist::FactorDistribution& law) {
  check_enumerable(portfolio);
  const std::size_t n = portfolio.assets.size();
  const std::size_t patterns = std::size_t{1} << n;
  const std::vector<double> table = conditional_table(portfolio, grid, law);

  // Payoff of every tranche for every default pattern.
  std::vector<double> payoff(patterns * portfolio.tranches.size());
  for (std::size_t a = 0; a < patterns; ++a) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((a >> i) & 1) loss += portfolio.assets[i].loss_given_default;
    }
    for (std::size_t t = 0; t < portfolio.tranches.size(); ++t) {
      payoff[a * portfolio.tranches.size() + t] = tranche_loss(loss, portfolio.tranches[t]);
    }
  }

  std::vector<double> expected(portfolio.tranches.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double* p = table.data() + k * n;
    for (std::size_t a = 0; a < patterns; ++a) {
      double weight = grid.probs[k];
      for (std::size_t i = 0; i < n; ++i) weight *= ((a >> i) & 1) ? p[i] : 1.0 - p[i];
      for (std::size_t t = 0; t < expected.size(); ++t) {
        expected[t] += weight * payoff[a * expected.size() + t];
      }
    }
  }
  return expected;
}

double exact_expected_tranche_loss(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                                   const Tranche& tranche, const dist::FactorDistribution& law) {
  Portfolio single = portfolio;
  single.tranches = {tranche};
  return exact_expected_tranche_losses(single, grid, law).front();
}

double exact_expected_total_loss(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                                 const dist::FactorDistribution& law) {
  const std::vector<double> table = conditional_table(portfolio, grid, law);
  const std::size_t n = portfolio.assets.size();
  double total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double conditional = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      conditional += portfolio.assets[i].loss_given_default * table[k * n + i];
    }
    total += grid.probs[k] * conditional;
  }
  return total;
}

McEstimate monte_carlo_expected_loss(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                                     const Tranche& tranche, const dist::FactorDistribution& law,
                                     std::uint64_t samples, std::uint64_t seed) {
  require(samples >= 1, ErrorCode::kInvalidArgument, "Monte Carlo needs at least one sample");
  const std::size_t n = portfolio.assets.size();
  const std::vector<double> table = conditional_table(portfolio, grid, law);
  std::vector<double> cdf(grid.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) cdf[k] = (acc += grid.probs[k]);

  const CounterRng rng(seed);
  const std::uint64_t draws_per_sample = 1 + n;
  auto run_chunk = [&](std::uint64_t chunk) {
    ChunkSums sums;
    const std::uint64_t begin = chunk * kMcChunk;
    const std::uint64_t end = std::min(samples, begin + kMcChunk);
    for (std::uint64_t s = begin; s < end; ++s) {
      const std::uint64_t base = s * draws_per_sample;
      const double u = rng.uniform(base) * acc;
      const std::size_t k = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
          grid.size() - 1);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform(base + 1 + i) < table[k * n + i]) loss += portfolio.assets[i].loss_given_default;
      }
      const double x = tranche_loss(loss, tranche);
      sums.sum += x;
      sums.sum_sq += x * x;
    }
    return sums;
  };

  const std::uint64_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<ChunkSums> partial(chunks);
  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(qsim::kernel_threads(), chunks));
  if (threads <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) partial[c] = run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += threads) partial[c] = run_chunk(c);
      });
    }
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const ChunkSums& p : partial) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const auto count = static_cast<double>(samples);
  McEstimate out;
  out.mean = sum / count;
  if (samples > 1) {
    const double var = std::max(0.0, (sum_sq - count * out.mean * out.mean) / (count - 1.0));
    out.standard_error = std::sqrt(var / count);
  }
  return out;
}

double fair_spread(double expected_loss, const Tranche& tranche) {
  const double notional = tranche.notional();
  require(expected_loss >= -1e-12 && expected_loss <= notional + 1e-12, ErrorCode::kOutOfRange,
          "expected loss outside [0, notional] for tranche '" + tranche.name + "'");
  return std::clamp(expected_loss, 0.0, notional) / notional;
}

Portfolio apply_recovery(const Portfolio& portfolio, double eta) {
  require(eta >= 0.0 && eta <= 1.0, ErrorCode::kInvalidArgument, "recovery must lie in [0, 1]");
  Portfolio out = portfolio;
  for (auto& a : out.assets) a.loss_given_default *= (1.0 - eta);
  out.recovery = eta;
  return out;
}

double expected_loss_from_p1(double p1, double c, double notional) {
  return (p1 - 0.5 + c) * notional / (2.0 * c);
}

TrancheReport price_via_qae(const Portfolio& portfolio, const dist::DiscreteDistribution& grid,
                            const Tranche& tranche, const dist::FactorDistribution& law, double c,
                            const qae::QaeConfig& config, std::int64_t quantization) {
  require(quantization >= 1, ErrorCode::kInvalidArgument, "quantization factor must be >= 1");
  const bool integral = std::all_of(portfolio.assets.begin(), portfolio.assets.end(), [](const auto& a) {
    return std::abs(a.loss_given_default - std::round(a.loss_given_default)) <= 1e-9;
  });
  const std::int64_t scale = integral ? 1 : quantization;

  std::vector<copula::Asset> assets = portfolio.assets;
  for (auto& a : assets) {
    const double scaled = a.loss_given_default * static_cast<double>(scale);
    require(std::abs(scaled - std::round(scaled)) <= 1e-9, ErrorCode::kInvalidArgument,
            "loss " + std::to_string(a.loss_given_default) + " is not integral after scaling by " +
                std::to_string(scale));
    a.loss_given_default = std::round(scaled);
  }
  Tranche scaled_tranche = tranche;
  scaled_tranche.lower *= scale;
  scaled_tranche.upper *= scale;

  const loaders::Pipeline pipeline = loaders::assemble_pipeline(assets, law, grid, scaled_tranche, c);
  const qae::QaeResult result = qae::run_qae(pipeline.circuit, pipeline.layout.objective, config);

  const double notional = tranche.notional();
  QaeDiagnostics diag;
  diag.p1_estimate = result.a_estimate;
  diag.p1_mean = result.a_mean;
  diag.exact_p1 = result.exact_p1;
  diag.error_bound = result.error_bound;
  diag.raw_expected_loss = expected_loss_from_p1(result.a_estimate, c, notional);
  diag.c = c;
  diag.quantization = scale;
  diag.m = result.m;
  diag.shots = result.shots;
  diag.seed = result.seed;
  diag.total_qubits = result.total_qubits;

  TrancheReport report;
  report.tranche = tranche.name;
  report.method = Method::kQae;
  report.expected_loss = std::clamp(diag.raw_expected_loss, 0.0, notional);
  report.spread = report.expected_loss / notional;
  report.qae = diag;
  return report;
}

// --- serialization -----------------------------------------------------------

void to_json(nlohmann::json& j, const TrancheReport& r) {
  j = nlohmann::json{{"tranche", r.tranche},
                     {"method", std::string(to_string(r.method))},
                     {"expected_loss", r.expected_loss},
                     {"spread", r.spread}};
  if (r.standard_error) j["standard_error"] = *r.standard_error;
  if (r.qae) {
    const QaeDiagnostics& d = *r.qae;
    j["qae"] = nlohmann::json{{"p1_estimate", d.p1_estimate},
                              {"p1_mean", d.p1_mean},
                              {"exact_p1", d.exact_p1},
                              {"error_bound", d.error_bound},
                              {"raw_expected_loss", d.raw_expected_loss},
                              {"c", d.c},
                              {"quantization", d.quantization},
                              {"m", d.m},
                              {"shots", d.shots},
                              {"seed", d.seed},
                              {"total_qubits", d.total_qubits}};
  }
}

void from_json(const nlohmann::json& j, TrancheReport& r) {
  j.at("tranche").get_to(r.tranche);
  r.method = method_from_string(j.at("method").get<std::string>());
  j.at("expected_loss").get_to(r.expected_loss);
  j.at("spread").get_to(r.spread);
  r.standard_error.reset();
  if (j.contains("standard_error")) r.standard_error = j.at("standard_error").get<double>();
  r.qae.reset();
  if (j.contains("qae")) {
    const auto& q = j.at("qae");
    QaeDiagnostics d;
    q.at("p1_estimate").get_to(d.p1_estimate);
    q.at("p1_mean").get_to(d.p1_mean);
    q.at("exact_p1").get_to(d.exact_p1);
    q.at("error_bound").get_to(d.error_bound);
    q.at("raw_expected_loss").get_to(d.raw_expected_loss);
    q.at("c").get_to(d.c);
    q.at("quantization").get_to(d.quantization);
    q.at("m").get_to(d.m);
    q.at("shots").get_to(d.shots);
    q.at("seed").get_to(d.seed);
    q.at("total_qubits").get_to(d.total_qubits);
    r.qae = d;
  }
}

void to_json(nlohmann::json& j, const PricingReport& r) {
  j = nlohmann::json{{"distribution", r.distribution}, {"entries", r.entries}, {"warnings", r.warnings}};
}

void from_json(const nlohmann::json& j, PricingReport& r) {
  j.at("distribution").get_to(r.distribution);
  j.at("entries").get_to(r.entries);
  j.at("warnings").get_to(r.warnings);
}

std::string format_table(const PricingReport& report) {
  std::ostringstream os;
  os << "distribution: " << report.distribution << '\n';
  os << std::left << std::setw(12) << "tranche" << std::setw(8) << "method" << std::right
     << std::setw(14) << "E[L]" << std::setw(10) << "spread" << "  details\n";
  for (const auto& e : report.entries) {
    os << std::left << std::setw(12) << e.tranche << std::setw(8) << to_string(e.method) << std::right
       << std::fixed << std::setprecision(6) << std::setw(14) << e.expected_loss << std::setprecision(1)
       << std::setw(9) << 100.0 * e.spread << '%';
    os << std::setprecision(6);
    if (e.standard_error) os << "  +/- " << *e.standard_error << " (1 SE)";
    if (e.qae) {
      os << "  P1~" << e.qae->p1_estimate << " exact P1=" << e.qae->exact_p1
         << " error_bound=" << std::setprecision(4) << e.qae->error_bound << " m=" << e.qae->m;
    }
    os << '\n';
  }
  for (const auto& w : report.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string format_csv(const PricingReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "tranche,method,expected_loss,spread,standard_error,p1_estimate,exact_p1,error_bound\n";
  for (const auto& e : report.entries) {
    os << e.tranche << ',' << to_string(e.method) << ',' << e.expected_loss << ',' << e.spread << ',';
    if (e.standard_error) os << *e.standard_error;
    os << ',';
    if (e.qae) os << e.qae->p1_estimate << ',' << e.qae->exact_p1 << ',' << e.qae->error_bound;
    else os << ",,";
    os << '\n';
  }
  return os.str();
}

}  // namespace cdoqae::pricing
