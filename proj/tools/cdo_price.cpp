// cdo_price: price CDO tranches exactly, by Monte Carlo, or by simulated
// amplitude estimation.

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cdoqae/cli.hpp"
#include "cdoqae/config.hpp"
#include "cdoqae/error.hpp"

namespace {

using namespace cdoqae;

struct Options {
  std::string config_path;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  std::optional<int> m;
  std::optional<double> c;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> tranche;
};

config::RunConfig load(const Options& opt) {
  config::RunConfig cfg = config::load_config(opt.config_path);
  if (opt.method) cfg.method = *opt.method;
  if (opt.seed) {
    cfg.mc_seed = *opt.seed;
    cfg.qae.seed = *opt.seed;
  }
  if (opt.shots) cfg.qae.shots = *opt.shots;
  if (opt.m) cfg.qae.m = *opt.m;
  if (opt.c) cfg.c = *opt.c;
  if (opt.samples) cfg.mc_samples = *opt.samples;
  if (opt.format) cfg.format = config::format_from_string(*opt.format);
  if (opt.out) cfg.output_path = *opt.out;
  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string("command line: ") + e.what());
  }
  return cfg;
}

void emit(const std::string& text, const config::RunConfig& cfg) {
  if (!cfg.output_path) {
    std::cout << text;
    return;
  }
  std::ofstream f(*cfg.output_path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + cfg.output_path->string());
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Price CDO tranches under a one-factor copula model."};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opt.out, "write output to this file instead of stdout");
  };

  CLI::App* price = app.add_subcommand("price", "expected tranche losses and fair spreads");
  add_common(price);
  price->add_option("--method", opt.method, "exact, mc, qae or all")
      ->check(CLI::IsMember({"exact", "mc", "qae", "all"}));
  price->add_option("--seed", opt.seed, "seed for Monte Carlo and amplitude estimation");
  price->add_option("--shots", opt.shots, "amplitude estimation shots");
  price->add_option("--m", opt.m, "amplitude estimation evaluation qubits");
  price->add_option("--c", opt.c, "objective rotation scale");
  price->add_option("--samples", opt.samples, "Monte Carlo samples");
  price->add_option("--format", opt.format, "json, csv or table");
  price->add_option("--tranche", opt.tranche, "price only this tranche");

  CLI::App* dist = app.add_subcommand("dist", "discretized factor distribution as CSV");
  add_common(dist);

  CLI::App* payoff = app.add_subcommand("payoff", "tranche loss table and piecewise objective");
  add_common(payoff);
  payoff->add_option("--tranche", opt.tranche, "tranche name")->required();
  payoff->add_option("--c", opt.c, "objective rotation scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitConfig;
  }

  try {
    const config::RunConfig cfg = load(opt);
    if (price->parsed()) {
      const pricing::PricingReport report = cli::run_pricing(cfg, opt.tranche);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      emit(cli::render(report, cfg.format), cfg);
    } else if (dist->parsed()) {
      emit(cli::distribution_csv(cfg), cfg);
    } else if (payoff->parsed()) {
      emit(cli::payoff_csv(cfg, *opt.tranche), cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kExitOk;
}
