#pragma once

// Run configuration loaded from JSON.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "cdoqae/dist.hpp"
#include "cdoqae/pricing.hpp"
#include "cdoqae/qae.hpp"

namespace cdoqae::config {

enum class OutputFormat { kJson, kCsv, kTable };

OutputFormat format_from_string(std::string_view name);

struct DistributionConfig {
  dist::FactorDistribution law = dist::GaussianSpec{};
  std::size_t n_z = 4;
  std::optional<double> low;   // defaults to mean - 3 stddev
  std::optional<double> high;  // defaults to mean + 3 stddev

  dist::DiscreteDistribution discretize() const;
};

struct RunConfig {
  pricing::Portfolio portfolio;  // recovery already applied
  DistributionConfig distribution;
  std::string method = "all";  // exact | mc | qae | all
  qae::QaeConfig qae;
  double c = 0.25;
  std::int64_t quantization = pricing::kDefaultQuantization;
  std::uint64_t mc_samples = 10000;
  std::uint64_t mc_seed = 0;
  OutputFormat format = OutputFormat::kTable;
  std::optional<std::filesystem::path> output_path;

  void validate() const;
};

/// Parses and validates. Errors are kConfig and name the offending field path
/// (e.g. "assets[2].default_prob").
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace cdoqae::config
