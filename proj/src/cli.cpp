#include "cdoqae/cli.hpp"

#include <cmath>
#include <sstream>

#include "cdoqae/error.hpp"
#include "cdoqae/tranche.hpp"

namespace cdoqae::cli {
namespace {

template <typename T>
std::string join_array(const std::vector<T>& values) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  os << ']';
  return os.str();
}

bool wants(const std::string& method, std::string_view name) { return method == "all" || method == name; }

}  // namespace

pricing::PricingReport run_pricing(const config::RunConfig& cfg, const std::optional<std::string>& tranche) {
  const pricing::Portfolio& portfolio = cfg.portfolio;
  const auto& law = cfg.distribution.law;
  const dist::DiscreteDistribution grid = cfg.distribution.discretize();

  pricing::PricingReport report;
  report.distribution = law.name();
  report.warnings = portfolio.validate();

  std::vector<pricing::Tranche> selected;
  if (tranche) {
    selected.push_back(portfolio.tranche(*tranche));
  } else {
    selected = portfolio.tranches;
  }

  std::vector<double> exact;
  if (wants(cfg.method, "exact")) {
    pricing::Portfolio subset = portfolio;
    subset.tranches = selected;
    exact = pricing::exact_expected_tranche_losses(subset, grid, law);
  }

  for (std::size_t t = 0; t < selected.size(); ++t) {
    const pricing::Tranche& tr = selected[t];
    if (wants(cfg.method, "exact")) {
      report.entries.push_back({tr.name, pricing::Method::kExact, exact[t],
                                pricing::fair_spread(exact[t], tr), std::nullopt, std::nullopt});
    }
    if (wants(cfg.method, "mc")) {
      const pricing::McEstimate mc =
          pricing::monte_carlo_expected_loss(portfolio, grid, tr, law, cfg.mc_samples, cfg.mc_seed);
      report.entries.push_back({tr.name, pricing::Method::kMonteCarlo, mc.mean,
                                pricing::fair_spread(mc.mean, tr), mc.standard_error, std::nullopt});
    }
    if (wants(cfg.method, "qae")) {
      report.entries.push_back(
          pricing::price_via_qae(portfolio, grid, tr, law, cfg.c, cfg.qae, cfg.quantization));
    }
  }
  return report;
}

std::string render(const pricing::PricingReport& report, config::OutputFormat format) {
  switch (format) {
    case config::OutputFormat::kJson:
      return nlohmann::json(report).dump(2) + "\n";
    case config::OutputFormat::kCsv:
      return pricing::format_csv(report);
    case config::OutputFormat::kTable:
      return pricing::format_table(report);
  }
  return {};
}

std::string distribution_csv(const config::RunConfig& cfg) {
  const dist::DiscreteDistribution d = cfg.distribution.discretize();
  std::ostringstream os;
  os.precision(17);
  os << "z,probability\n";
  for (std::size_t i = 0; i < d.size(); ++i) os << d.grid[i] << ',' << d.probs[i] << '\n';
  return os.str();
}

std::string payoff_csv(const config::RunConfig& cfg, std::string_view tranche) {
  const pricing::Tranche& t = cfg.portfolio.tranche(tranche);
  const auto max_loss = static_cast<std::int64_t>(std::ceil(cfg.portfolio.total_loss() - 1e-9));
  const pricing::PiecewiseSpec spec = pricing::tranche_to_piecewise(t, max_loss, cfg.c);
  std::ostringstream os;
  os.precision(17);
  os << "L,tranche_loss\n";
  for (std::int64_t loss = 0; loss <= max_loss; ++loss) {
    os << loss << ',' << pricing::tranche_loss(static_cast<double>(loss), t) << '\n';
  }
  os << "# breakpoints=" << join_array(spec.breakpoints) << '\n';
  os << "# slopes=" << join_array(spec.slopes) << '\n';
  os << "# offsets=" << join_array(spec.offsets) << '\n';
  return os.str();
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::kConfig:
        return kExitConfig;
      case ErrorCode::kBudgetExceeded:
        return kExitBudget;
      default:
        return kExitRuntime;
    }
  }
  return kExitRuntime;
}

}  // namespace cdoqae::cli
