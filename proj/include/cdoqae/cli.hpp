#pragma once

// Command implementations behind the cdo_price tool.

#include <exception>
#include <optional>
#include <string>
#include <string_view>

#include "cdoqae/config.hpp"
#include "cdoqae/pricing.hpp"

namespace cdoqae::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitBudget = 3,
  kExitRuntime = 4,
};

/// Runs the configured method(s) for every tranche, or only `tranche` when
/// given. Entries are grouped by tranche in exact, mc, qae order.
pricing::PricingReport run_pricing(const config::RunConfig& cfg,
                                   const std::optional<std::string>& tranche = std::nullopt);

std::string render(const pricing::PricingReport& report, config::OutputFormat format);

/// "z,probability" rows of the discretized factor distribution.
std::string distribution_csv(const config::RunConfig& cfg);

/// "L,tranche_loss" rows for L = 0 .. maximal loss, followed by the
/// breakpoint, slope and offset arrays as comment lines.
std::string payoff_csv(const config::RunConfig& cfg, std::string_view tranche);

int exit_code_for(const std::exception& e);

}  // namespace cdoqae::cli
