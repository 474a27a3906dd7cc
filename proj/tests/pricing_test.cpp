#include "cdoqae/pricing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cdoqae/error.hpp"
#include "cdoqae/loaders.hpp"

namespace {

using namespace cdoqae;
using namespace cdoqae::pricing;
using dist::FactorDistribution;

Portfolio reference_portfolio() {
  return Portfolio{{{2.0, 0.3, 0.05}, {2.0, 0.1, 0.15}, {1.0, 0.2, 0.1}, {2.0, 0.1, 0.05}},
                   {{"Equity", 0, 1}, {"Mezzanine", 1, 2}, {"Senior", 2, 7}},
                   0.0};
}

dist::DiscreteDistribution grid_for(const FactorDistribution& law) {
  return dist::discretize([&](double x) { return law.pdf(x); }, 4, -3.0, 3.0);
}

dist::DiscreteDistribution single_slot() {
  dist::DiscreteDistribution d;
  d.grid = {0.0};
  d.probs = {1.0};
  d.n_z = 0;
  return d;
}

// --- payoff ------------------------------------------------------------------

TEST(TrancheLoss, Examples) {
  EXPECT_EQ(tranche_loss(0.0, Tranche{"Equity", 0, 1}), 0.0);
  EXPECT_EQ(tranche_loss(3.0, Tranche{"Mezzanine", 1, 2}), 1.0);
  EXPECT_EQ(tranche_loss(7.0, Tranche{"Senior", 2, 7}), 5.0);
  EXPECT_EQ(tranche_loss(1.5, Tranche{"Mezzanine", 1, 2}), 0.5);
}

TEST(TrancheValidation, RejectsBadAttachments) {
  EXPECT_THROW((Tranche{"x", 2, 2}.validate()), Error);
  EXPECT_THROW((Tranche{"x", -1, 2}.validate()), Error);
  EXPECT_THROW((Tranche{"", 0, 2}.validate()), Error);
}

TEST(Piecewise, ReferenceArrays) {
  const PiecewiseSpec eq = tranche_to_piecewise(Tranche{"Equity", 0, 1}, 7, 0.25);
  EXPECT_EQ(eq.breakpoints, (std::vector<std::int64_t>{0, 1}));
  EXPECT_EQ(eq.slopes, (std::vector<double>{1, 0}));
  EXPECT_EQ(eq.offsets, (std::vector<double>{0, 1}));
  const PiecewiseSpec mz = tranche_to_piecewise(Tranche{"Mezzanine", 1, 2}, 7, 0.25);
  EXPECT_EQ(mz.breakpoints, (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(mz.slopes, (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(mz.offsets, (std::vector<double>{0, 0, 1}));
  const PiecewiseSpec sr = tranche_to_piecewise(Tranche{"Senior", 2, 7}, 7, 0.25);
  EXPECT_EQ(sr.breakpoints, (std::vector<std::int64_t>{0, 2}));
  EXPECT_EQ(sr.slopes, (std::vector<double>{0, 1}));
  EXPECT_EQ(sr.offsets, (std::vector<double>{0, 0}));
  EXPECT_EQ(sr.f_min, 0.0);
  EXPECT_EQ(sr.f_max, 5.0);
}

TEST(Piecewise, EvaluateMatchesPayoff) {
  for (const Tranche& t : reference_portfolio().tranches) {
    const PiecewiseSpec spec = tranche_to_piecewise(t, 7, 0.25);
    for (int loss = 0; loss <= 7; ++loss) EXPECT_DOUBLE_EQ(spec.evaluate(loss), tranche_loss(loss, t));
  }
  // Upper attachment beyond the maximal loss: the cap is never reached.
  const Tranche wide{"Wide", 3, 40};
  const PiecewiseSpec spec = tranche_to_piecewise(wide, 35, 0.25);
  for (int loss = 0; loss <= 35; ++loss) EXPECT_DOUBLE_EQ(spec.evaluate(loss), tranche_loss(loss, wide));
}

TEST(Piecewise, ValidationRejectsInconsistentArrays) {
  PiecewiseSpec ok = tranche_to_piecewise(Tranche{"Mezzanine", 1, 2}, 7, 0.25);
  EXPECT_NO_THROW(ok.validate());
  PiecewiseSpec bad = ok;
  bad.slopes.pop_back();
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.breakpoints = {0, 2, 1};
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.offsets[2] = 3.0;  // discontinuous
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.breakpoints[0] = 1;
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.c = 0.5;
  EXPECT_THROW(bad.validate(), Error);
}

// --- portfolio ---------------------------------------------------------------

TEST(PortfolioTest, ReferenceIsValid) {
  const Portfolio p = reference_portfolio();
  EXPECT_TRUE(p.validate().empty());
  EXPECT_EQ(p.total_loss(), 7.0);
  EXPECT_EQ(p.tranche("Senior").upper, 7);
}

TEST(PortfolioTest, UnknownTrancheListsAvailable) {
  try {
    reference_portfolio().tranche("Super");
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Equity"), std::string::npos);
    EXPECT_NE(msg.find("Senior"), std::string::npos);
  }
}

TEST(PortfolioTest, RejectsGapsAndDuplicates) {
  Portfolio p = reference_portfolio();
  p.tranches[1].lower = 2;
  p.tranches[1].upper = 3;
  EXPECT_THROW(p.validate(), Error);
  p = reference_portfolio();
  p.tranches[2].name = "Equity";
  EXPECT_THROW(p.validate(), Error);
  p = reference_portfolio();
  p.assets.clear();
  EXPECT_THROW(p.validate(), Error);
}

TEST(PortfolioTest, WarnsWhenTopAttachmentExceedsMaximalLoss) {
  Portfolio p = reference_portfolio();
  p.tranches.back().upper = 10;
  const auto warnings = p.validate();
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("10"), std::string::npos);
}

// --- exact oracle --------------------------------------------------------------

TEST(Exact, SingleAssetHandSum) {
  const Portfolio p{{{2.0, 0.3, 0.0}}, {{"Equity", 0, 1}}, 0.0};
  const FactorDistribution g = dist::GaussianSpec{};
  EXPECT_NEAR(exact_expected_tranche_loss(p, grid_for(g), p.tranches[0], g), 0.3, 1e-12);
}

TEST(Exact, VanishingDefaultProbabilities) {
  Portfolio p = reference_portfolio();
  for (auto& a : p.assets) a.default_prob = 1e-12;
  const FactorDistribution g = dist::GaussianSpec{};
  for (double e : exact_expected_tranche_losses(p, grid_for(g), g)) EXPECT_NEAR(e, 0.0, 1e-9);
}

TEST(Exact, GaussianReferenceValues) {
  // Independent oracle: scipy enumeration over the same 16-point grid.
  const FactorDistribution g = dist::GaussianSpec{};
  const auto e = exact_expected_tranche_losses(reference_portfolio(), grid_for(g), g);
  EXPECT_NEAR(e[0], 0.5274614557297407, 1e-10);
  EXPECT_NEAR(e[1], 0.4234242479967805, 1e-10);
  EXPECT_NEAR(e[2], 0.24825907737289454, 1e-10);
  EXPECT_NEAR(exact_expected_total_loss(reference_portfolio(), grid_for(g), g), 1.199144781099415, 1e-10);
}

TEST(Exact, NigReferenceValues) {
  const FactorDistribution n = dist::reference_nig();
  const auto e = exact_expected_tranche_losses(reference_portfolio(), grid_for(n), n);
  EXPECT_NEAR(e[0], 0.5352681932813594, 1e-8);
  EXPECT_NEAR(e[1], 0.43192550416359793, 1e-8);
  EXPECT_NEAR(e[2], 0.27422672078212723, 1e-8);
  EXPECT_NEAR(exact_expected_total_loss(reference_portfolio(), grid_for(n), n), 1.2414204182270843, 1e-8);
}

TEST(Exact, TrancheLossesPartitionTotalLoss) {
  for (const FactorDistribution& law : {FactorDistribution(dist::GaussianSpec{}), FactorDistribution(dist::reference_nig())}) {
    const Portfolio p = reference_portfolio();
    const auto grid = grid_for(law);
    const auto e = exact_expected_tranche_losses(p, grid, law);
    EXPECT_NEAR(std::accumulate(e.begin(), e.end(), 0.0), exact_expected_total_loss(p, grid, law), 1e-12);
  }
}

TEST(Exact, SingleTrancheMatchesBatch) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p = reference_portfolio();
  const auto e = exact_expected_tranche_losses(p, grid_for(g), g);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_DOUBLE_EQ(exact_expected_tranche_loss(p, grid_for(g), p.tranches[t], g), e[t]);
  }
}

TEST(Exact, MonotoneInDefaultProbabilities) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio base = reference_portfolio();
  const auto e0 = exact_expected_tranche_losses(base, grid_for(g), g);
  for (std::size_t i = 0; i < base.assets.size(); ++i) {
    Portfolio bumped = base;
    bumped.assets[i].default_prob += 0.01;
    const auto e1 = exact_expected_tranche_losses(bumped, grid_for(g), g);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_GE(e1[t], e0[t]) << "asset " << i << " tranche " << t;
  }
}

TEST(Exact, StaysWithinNotional) {
  const FactorDistribution n = dist::reference_nig();
  const Portfolio p = reference_portfolio();
  const auto e = exact_expected_tranche_losses(p, grid_for(n), n);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_GE(e[t], 0.0);
    EXPECT_LE(e[t], p.tranches[t].notional());
  }
}

TEST(Exact, EnumerationGuard) {
  Portfolio p{std::vector<copula::Asset>(21, copula::Asset{1.0, 0.1, 0.1}), {{"All", 0, 21}}, 0.0};
  const FactorDistribution g = dist::GaussianSpec{};
  try {
    exact_expected_tranche_losses(p, grid_for(g), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
  }
}

// --- Monte Carlo -------------------------------------------------------------

TEST(MonteCarlo, WithinThreeStandardErrorsOfExact) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p = reference_portfolio();
  const auto grid = grid_for(g);
  const auto exact = exact_expected_tranche_losses(p, grid, g);
  for (std::size_t t = 0; t < 3; ++t) {
    const McEstimate mc = monte_carlo_expected_loss(p, grid, p.tranches[t], g, 10000, 123);
    EXPECT_GT(mc.standard_error, 0.0);
    EXPECT_LE(std::abs(mc.mean - exact[t]), 3.0 * mc.standard_error) << p.tranches[t].name;
  }
}

TEST(MonteCarlo, DegenerateGridReducesToIndependentDefaults) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p{{{2.0, 0.3, 0.0}, {1.0, 0.2, 0.0}}, {{"All", 0, 3}}, 0.0};
  const double exact = exact_expected_tranche_loss(p, single_slot(), p.tranches[0], g);
  EXPECT_NEAR(exact, 0.3 * 2 + 0.2 * 1, 1e-12);
  const McEstimate mc = monte_carlo_expected_loss(p, single_slot(), p.tranches[0], g, 20000, 5);
  EXPECT_LE(std::abs(mc.mean - exact), 3.0 * mc.standard_error);
}

TEST(MonteCarlo, DeterministicUnderSeed) {
  const FactorDistribution n = dist::reference_nig();
  const Portfolio p = reference_portfolio();
  const auto grid = grid_for(n);
  const McEstimate a = monte_carlo_expected_loss(p, grid, p.tranches[0], n, 9000, 77);
  const McEstimate b = monte_carlo_expected_loss(p, grid, p.tranches[0], n, 9000, 77);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, monte_carlo_expected_loss(p, grid, p.tranches[0], n, 9000, 78));
}

TEST(MonteCarlo, OracleTriangleOverManySeeds) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p = reference_portfolio();
  const auto grid = grid_for(g);
  const auto exact = exact_expected_tranche_losses(p, grid, g);
  for (std::size_t t = 0; t < 3; ++t) {
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const McEstimate mc = monte_carlo_expected_loss(p, grid, p.tranches[t], g, 10000, seed);
      if (std::abs(mc.mean - exact[t]) <= 3.0 * mc.standard_error) ++inside;
    }
    EXPECT_GE(inside, 99) << p.tranches[t].name;
  }
}

TEST(MonteCarlo, RejectsZeroSamples) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p = reference_portfolio();
  EXPECT_THROW(monte_carlo_expected_loss(p, grid_for(g), p.tranches[0], g, 0, 1), Error);
}

// --- spreads, recovery, inversion ---------------------------------------------

TEST(Spread, Examples) {
  EXPECT_EQ(fair_spread(0.0, Tranche{"Equity", 0, 1}), 0.0);
  EXPECT_NEAR(fair_spread(0.090, Tranche{"Senior", 2, 7}), 0.018, 1e-15);
  EXPECT_NEAR(fair_spread(0.499, Tranche{"Equity", 0, 1}), 0.499, 1e-15);
  EXPECT_THROW(fair_spread(1.5, Tranche{"Equity", 0, 1}), Error);
  EXPECT_THROW(fair_spread(-0.1, Tranche{"Equity", 0, 1}), Error);
}

TEST(Recovery, ScalesLossesOnly) {
  const Portfolio r = apply_recovery(reference_portfolio(), 0.4);
  const double expected[] = {1.2, 1.2, 0.6, 1.2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.assets[i].loss_given_default, expected[i], 1e-15);
  EXPECT_EQ(r.tranches, reference_portfolio().tranches);
  EXPECT_EQ(r.recovery, 0.4);

  const Portfolio same = apply_recovery(reference_portfolio(), 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(same.assets[i].loss_given_default, reference_portfolio().assets[i].loss_given_default);
  }

  const Portfolio wiped = apply_recovery(reference_portfolio(), 1.0);
  const FactorDistribution g = dist::GaussianSpec{};
  for (double e : exact_expected_tranche_losses(wiped, grid_for(g), g)) EXPECT_EQ(e, 0.0);
  EXPECT_THROW(apply_recovery(reference_portfolio(), 1.1), Error);
}

TEST(Inversion, Anchors) {
  EXPECT_NEAR(expected_loss_from_p1(0.25, 0.25, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(expected_loss_from_p1(0.75, 0.25, 5.0), 5.0, 1e-15);
  EXPECT_NEAR(expected_loss_from_p1(0.4995, 0.25, 1.0), 0.499, 1e-12);
}

TEST(PriceViaQae, GaussianEquityWithinBound) {
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p = reference_portfolio();
  const auto grid = grid_for(g);
  const double c = 0.25;
  const double exact = exact_expected_tranche_losses(p, grid, g)[0];
  const TrancheReport r = price_via_qae(p, grid, p.tranches[0], g, c, qae::QaeConfig{4, 400, 3});
  ASSERT_TRUE(r.qae.has_value());
  const QaeDiagnostics& d = *r.qae;
  EXPECT_EQ(r.method, Method::kQae);
  EXPECT_EQ(d.quantization, 1);
  EXPECT_EQ(d.total_qubits, 20u);
  EXPECT_NEAR(d.error_bound, 0.2349026830411174, 1e-15);
  EXPECT_NEAR(d.raw_expected_loss, expected_loss_from_p1(d.p1_estimate, c, 1.0), 1e-15);
  const double budget = 1.0 / (2 * c) * (d.error_bound + 2 * c * c * c / 3 + 0.01);
  EXPECT_LE(std::abs(r.expected_loss - exact), budget);
  EXPECT_GE(r.expected_loss, 0.0);
  EXPECT_LE(r.expected_loss, 1.0);
  EXPECT_DOUBLE_EQ(r.spread, r.expected_loss);
}

TEST(PriceViaQae, FractionalLossesAreQuantized) {
  // Losses 1.2, 1.2, 0.6, 1.2 become 6, 6, 3, 6 with attachments scaled by 5.
  const FactorDistribution g = dist::GaussianSpec{};
  const Portfolio p = apply_recovery(reference_portfolio(), 0.4);
  const auto grid = grid_for(g);
  const double c = 0.25;
  const TrancheReport r = price_via_qae(p, grid, p.tranches[0], g, c, qae::QaeConfig{1, 50, 0});
  ASSERT_TRUE(r.qae.has_value());
  EXPECT_EQ(r.qae->quantization, 5);
  EXPECT_EQ(r.qae->total_qubits, 4u + 4u + 2u * 5u + 1u + 1u + 1u);
  // The statevector probability inverts to the same model the exact oracle prices.
  const double from_exact_p1 = expected_loss_from_p1(r.qae->exact_p1, c, 1.0);
  const double exact = exact_expected_tranche_losses(p, grid, g)[0];
  EXPECT_NEAR(from_exact_p1, exact, (2 * c * c * c / 3 + 0.01) / (2 * c));
}

TEST(PriceViaQae, RejectsUnquantizableLosses) {
  const FactorDistribution g = dist::GaussianSpec{};
  Portfolio p = reference_portfolio();
  p.assets[0].loss_given_default = 1.13;
  EXPECT_THROW(price_via_qae(p, grid_for(g), p.tranches[0], g, 0.25, qae::QaeConfig{1, 10, 0}), Error);
}

// --- reports -----------------------------------------------------------------

PricingReport sample_report() {
  PricingReport r;
  r.distribution = "nig";
  r.entries.push_back(TrancheReport{"Equity", Method::kExact, 0.499, 0.499, std::nullopt, std::nullopt});
  r.entries.push_back(TrancheReport{"Equity", Method::kMonteCarlo, 0.5012345678901234, 0.5012345678901234, 0.0049, std::nullopt});
  QaeDiagnostics d;
  d.p1_estimate = 0.5;
  d.p1_mean = 0.4876;
  d.exact_p1 = 0.50976789142587053;
  d.error_bound = 0.2349026830411174;
  d.raw_expected_loss = 0.5;
  d.c = 0.25;
  d.m = 4;
  d.shots = 1000;
  d.seed = 11;
  d.total_qubits = 20;
  r.entries.push_back(TrancheReport{"Senior", Method::kQae, 0.09, 0.018, std::nullopt, d});
  r.warnings.push_back("something to note");
  return r;
}

TEST(Report, JsonRoundTripIsExact) {
  const PricingReport r = sample_report();
  const nlohmann::json j = r;
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<PricingReport>(), r);
}

TEST(Report, TableShowsPercentagesToOneDecimal) {
  const std::string table = format_table(sample_report());
  EXPECT_NE(table.find("49.9%"), std::string::npos);
  EXPECT_NE(table.find("1.8%"), std::string::npos);
  EXPECT_NE(table.find("warning: something to note"), std::string::npos);
}

TEST(Report, CsvHasHeaderAndOneRowPerEntry) {
  const std::string csv = format_csv(sample_report());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("tranche,method,", 0), 0u);
}

TEST(MethodNames, RoundTrip) {
  for (Method m : {Method::kExact, Method::kMonteCarlo, Method::kQae}) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("fast"), Error);
}

}  // namespace
