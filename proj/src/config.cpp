#include "cdoqae/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "cdoqae/error.hpp"

namespace cdoqae::config {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::kConfig, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const char* type_label(const json& j) { return j.type_name(); }

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, std::string("expected an object, got ") + type_label(j));
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) config_error(join(path, key), "unknown field");
  }
}

const json* optional_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

const json& required_field(const json& j, const std::string& path, const char* key) {
  const json* v = optional_field(j, key);
  if (v == nullptr) config_error(join(path, key), "missing required field");
  return *v;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, std::string("expected a number, got ") + type_label(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(path, "must be finite");
  return v;
}

std::int64_t as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
      return static_cast<std::int64_t>(v);
    }
  }
  config_error(path, std::string("expected an integer, got ") + j.dump());
}

std::uint64_t as_count(const json& j, const std::string& path) {
  const std::int64_t v = as_integer(j, path);
  if (v < 0) config_error(path, "must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, std::string("expected a string, got ") + type_label(j));
  return j.get<std::string>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  const json* v = optional_field(j, key);
  return v ? as_number(*v, join(path, key)) : fallback;
}

// Runs `check` and rewrites any validation failure as a config error at `path`.
template <typename F>
void validate_at(const std::string& path, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error(path, e.what());
  }
}

copula::Asset parse_asset(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"loss", "default_prob", "correlation"});
  copula::Asset a;
  a.loss_given_default = as_number(required_field(j, path, "loss"), join(path, "loss"));
  a.default_prob = as_number(required_field(j, path, "default_prob"), join(path, "default_prob"));
  a.correlation = as_number(required_field(j, path, "correlation"), join(path, "correlation"));
  validate_at(path, [&] { a.validate(); });
  return a;
}

pricing::Tranche parse_tranche(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"name", "lower", "upper"});
  pricing::Tranche t;
  t.name = as_string(required_field(j, path, "name"), join(path, "name"));
  t.lower = as_integer(required_field(j, path, "lower"), join(path, "lower"));
  t.upper = as_integer(required_field(j, path, "upper"), join(path, "upper"));
  validate_at(path, [&] { t.validate(); });
  return t;
}

pricing::Portfolio parse_portfolio(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"assets", "tranches", "recovery"});
  pricing::Portfolio p;

  const std::string assets_path = join(path, "assets");
  const json& assets = required_field(j, path, "assets");
  if (!assets.is_array()) config_error(assets_path, "expected an array");
  if (assets.empty()) config_error(assets_path, "at least one asset is required");
  for (std::size_t i = 0; i < assets.size(); ++i) {
    p.assets.push_back(parse_asset(assets[i], index(assets_path, i)));
  }

  const std::string tranches_path = join(path, "tranches");
  const json& tranches = required_field(j, path, "tranches");
  if (!tranches.is_array()) config_error(tranches_path, "expected an array");
  if (tranches.empty()) config_error(tranches_path, "at least one tranche is required");
  for (std::size_t i = 0; i < tranches.size(); ++i) {
    p.tranches.push_back(parse_tranche(tranches[i], index(tranches_path, i)));
  }

  const double eta = number_or(j, path, "recovery", 0.0);
  if (eta < 0.0 || eta > 1.0) config_error(join(path, "recovery"), "must lie in [0, 1]");
  validate_at(tranches_path, [&] { p.validate(); });
  return pricing::apply_recovery(p, eta);
}

DistributionConfig parse_distribution(const json& j, const std::string& path) {
  expect_object(j, path);
  DistributionConfig d;
  const std::string kind = as_string(required_field(j, path, "kind"), join(path, "kind"));
  if (kind == "gaussian") {
    reject_unknown(j, path, {"kind", "mean", "variance", "n_z", "low", "high"});
    dist::GaussianSpec spec;
    spec.mean = number_or(j, path, "mean", 0.0);
    spec.variance = number_or(j, path, "variance", 1.0);
    validate_at(path, [&] { spec.validate(); });
    d.law = spec;
  } else if (kind == "nig") {
    reject_unknown(j, path, {"kind", "alpha", "beta", "mu", "delta", "n_z", "low", "high"});
    dist::NigSpec spec;
    spec.alpha = as_number(required_field(j, path, "alpha"), join(path, "alpha"));
    spec.beta = as_number(required_field(j, path, "beta"), join(path, "beta"));
    spec.mu = as_number(required_field(j, path, "mu"), join(path, "mu"));
    spec.delta = as_number(required_field(j, path, "delta"), join(path, "delta"));
    validate_at(path, [&] { spec.validate(); });
    d.law = spec;
  } else {
    config_error(join(path, "kind"), "expected \"gaussian\" or \"nig\", got \"" + kind + "\"");
  }

  if (const json* n = optional_field(j, "n_z")) {
    const std::int64_t n_z = as_integer(*n, join(path, "n_z"));
    if (n_z < 1 || n_z > 20) config_error(join(path, "n_z"), "must lie in [1, 20]");
    d.n_z = static_cast<std::size_t>(n_z);
  }
  if (const json* v = optional_field(j, "low")) d.low = as_number(*v, join(path, "low"));
  if (const json* v = optional_field(j, "high")) d.high = as_number(*v, join(path, "high"));
  validate_at(path, [&] { (void)d.discretize(); });
  return d;
}

}  // namespace

OutputFormat format_from_string(std::string_view name) {
  if (name == "json") return OutputFormat::kJson;
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "table") return OutputFormat::kTable;
  fail(ErrorCode::kConfig, "unknown output format '" + std::string(name) + "' (json, csv, table)");
}

dist::DiscreteDistribution DistributionConfig::discretize() const {
  const double mean = law.mean();
  const double sd = law.stddev();
  const double lo = low.value_or(mean - 3.0 * sd);
  const double hi = high.value_or(mean + 3.0 * sd);
  require(lo < hi, ErrorCode::kInvalidArgument, "low must be below high");
  return dist::discretize([this](double x) { return law.pdf(x); }, n_z, lo, hi);
}

void RunConfig::validate() const {
  validate_at("portfolio", [&] { (void)portfolio.validate(); });
  validate_at("qae", [&] { qae.validate(); });
  if (!(c > 0.0 && c < 0.5)) config_error("qae.c", "must lie in (0, 0.5)");
  if (quantization < 1) config_error("qae.quantization", "must be >= 1");
  if (mc_samples < 1) config_error("mc.samples", "must be >= 1");
  if (method != "exact" && method != "mc" && method != "qae" && method != "all") {
    config_error("method", "expected exact, mc, qae or all, got \"" + method + "\"");
  }
}

RunConfig parse_config(const json& j) {
  expect_object(j, "<root>");
  reject_unknown(j, "", {"portfolio", "distribution", "method", "mc", "qae", "output"});
  RunConfig cfg;
  cfg.portfolio = parse_portfolio(required_field(j, "", "portfolio"), "portfolio");
  cfg.distribution = parse_distribution(required_field(j, "", "distribution"), "distribution");

  if (const json* m = optional_field(j, "method")) cfg.method = as_string(*m, "method");

  if (const json* mc = optional_field(j, "mc")) {
    expect_object(*mc, "mc");
    reject_unknown(*mc, "mc", {"samples", "seed"});
    if (const json* v = optional_field(*mc, "samples")) cfg.mc_samples = as_count(*v, "mc.samples");
    if (const json* v = optional_field(*mc, "seed")) cfg.mc_seed = as_count(*v, "mc.seed");
  }

  if (const json* q = optional_field(j, "qae")) {
    expect_object(*q, "qae");
    reject_unknown(*q, "qae", {"m", "shots", "seed", "c", "quantization"});
    if (const json* v = optional_field(*q, "m")) cfg.qae.m = static_cast<int>(as_integer(*v, "qae.m"));
    if (const json* v = optional_field(*q, "shots")) cfg.qae.shots = as_count(*v, "qae.shots");
    if (const json* v = optional_field(*q, "seed")) cfg.qae.seed = as_count(*v, "qae.seed");
    cfg.c = number_or(*q, "qae", "c", cfg.c);
    if (const json* v = optional_field(*q, "quantization")) {
      cfg.quantization = as_integer(*v, "qae.quantization");
    }
  }

  if (const json* out = optional_field(j, "output")) {
    expect_object(*out, "output");
    reject_unknown(*out, "output", {"format", "path"});
    if (const json* v = optional_field(*out, "format")) {
      const std::string name = as_string(*v, "output.format");
      if (name != "json" && name != "csv" && name != "table") {
        config_error("output.format", "expected json, csv or table, got \"" + name + "\"");
      }
      cfg.format = format_from_string(name);
    }
    if (const json* v = optional_field(*out, "path")) cfg.output_path = as_string(*v, "output.path");
  }

  cfg.validate();
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column pair.
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "malformed JSON at line " << line << ", column " << column << ": " << e.what();
    fail(ErrorCode::kConfig, os.str());
  }
  return parse_config(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kConfig, "cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace cdoqae::config
