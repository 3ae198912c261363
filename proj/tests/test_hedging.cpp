#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tfbs/hedging.hpp"

namespace tfbs {
namespace {

using testing::reference_inputs;

HedgePolicy reference_policy(PremiumSource premium = PremiumSource::Tfbs) {
    return {testing::kStep, testing::kCost, DeltaSource::Tfbs, premium};
}

TEST(HedgeSimulation, AlignsGridToRebalanceStepAndExpiry) {
    const auto in = reference_inputs();
    const HedgeSimulation sim(in.contract, in.quote, in.model, reference_policy());
    // tau = 0.1465 is not a multiple of 0.01; twenty substeps of 0.0005 are.
    EXPECT_EQ(sim.grid().n_steps, 293u);
    EXPECT_NEAR(sim.grid().dt, 0.0005, 1e-15);
    EXPECT_EQ(sim.grid().hurst, in.model.hurst);
    const SpotPath p = sim.path(1);
    EXPECT_DOUBLE_EQ(p.times.front(), in.quote.time);
    EXPECT_NEAR(p.times.back(), in.contract.maturity, 1e-12);
    EXPECT_THROW(HedgeSimulation(in.contract, in.quote, in.model, reference_policy(), 7), InvalidArgument);
}

TEST(SimulateHedge, ExactReplicationOnDeterministicPath) {
    const OptionContract contract{1.0, 0.5};
    const FrictionModel model{0.0, 0.6, 0.01, 0.0};
    const HedgePolicy policy{0.01, 0.0};
    for (double spot : {0.8, 1.2}) {
        const MarketQuote quote{spot, 0.0, 0.05, 0.02};
        const HedgeSimulation sim(contract, quote, model, policy);
        const HedgeResult r = sim.run(5);
        EXPECT_NEAR(r.terminal_error, 0.0, 1e-10) << spot;
        EXPECT_EQ(r.total_costs, 0.0);
    }
}

TEST(SimulateHedge, LedgerAccountingIdentities) {
    const auto in = reference_inputs();
    const HedgePolicy policy = reference_policy();
    const HedgeSimulation sim(in.contract, in.quote, in.model, policy);
    const HedgeResult r = sim.run(99);
    const HedgeLedger& ledger = r.ledger;
    ASSERT_EQ(ledger.size(), 16u);  // t0, 14 interior rebalances, T
    EXPECT_DOUBLE_EQ(ledger.front().portfolio, r.premium);
    EXPECT_EQ(ledger.front().cost, 0.0);
    EXPECT_EQ(ledger.back().cost, 0.0);
    double costs = 0.0;
    for (std::size_t k = 0; k < ledger.size(); ++k) {
        const LedgerEntry& e = ledger[k];
        const double bond = std::exp(in.quote.rate_domestic * e.time);
        EXPECT_NEAR(e.portfolio, e.psi * e.spot + e.phi * bond, 1e-12) << k;
        costs += e.cost;
        if (k == 0 || k + 1 == ledger.size()) continue;
        const LedgerEntry& prev = ledger[k - 1];
        const double carried = prev.psi * std::exp(in.quote.rate_foreign * (e.time - prev.time));
        const double trade = e.psi - carried;
        EXPECT_NEAR(e.cost, 0.5 * policy.cost_rate * std::abs(trade) * e.spot, 1e-12) << k;
        // Self-financing: the rebalance changes value only by the cost paid.
        const double before = carried * e.spot + prev.phi * bond;
        EXPECT_NEAR(e.portfolio, before - e.cost, 1e-12) << k;
    }
    EXPECT_NEAR(costs, r.total_costs, 1e-15);
    EXPECT_GE(r.total_costs, 0.0);
    EXPECT_NEAR(r.terminal_error,
                ledger.back().portfolio - std::max(ledger.back().spot - in.contract.strike, 0.0), 1e-12);
}

TEST(SimulateHedge, RejectsMismatchedGrids) {
    const auto in = reference_inputs();
    const HedgeSimulation sim(in.contract, in.quote, in.model, reference_policy());
    const SpotPath path = sim.path(3);
    HedgePolicy off = reference_policy();
    off.rebalance_step = 0.00075;
    EXPECT_THROW(simulate_hedge(path, in.contract, in.model, off), InvalidArgument);
    OptionContract later = in.contract;
    later.maturity += 0.01;
    EXPECT_THROW(simulate_hedge(path, later, in.model, reference_policy()), InvalidArgument);
    OptionContract put = in.contract;
    put.kind = OptionKind::Put;
    EXPECT_THROW(simulate_hedge(path, put, in.model, reference_policy()), InvalidArgument);
}

TEST(SimulateHedge, LedgerCsv) {
    std::ostringstream os;
    write_ledger_csv(os, {{0.5, 1.25, 0.5, -0.25, 0.0, 0.375}});
    EXPECT_EQ(os.str(), "time,spot,psi,phi,cost,portfolio\n0.5,1.25,0.5,-0.25,0,0.375\n");
}

TEST(HedgeExperiment, SinglePathReproducesSimulateHedge) {
    const auto in = reference_inputs();
    const HedgePolicy policy = reference_policy();
    const HedgeSummary s = hedge_experiment(in.contract, in.quote, in.model, policy, {1, 4242});
    const HedgeSimulation sim(in.contract, in.quote, in.model, policy);
    const HedgeResult r = simulate_hedge(sim.path(4242), in.contract, in.model, policy);
    EXPECT_EQ(s.mean_error, r.terminal_error);
    EXPECT_EQ(s.mean_cost, r.total_costs);
    EXPECT_EQ(s.n_paths, 1u);
    EXPECT_EQ(s.sd_error, 0.0);
}

TEST(HedgeExperiment, DeterministicAcrossThreadCounts) {
    const auto in = reference_inputs();
    const HedgeSummary a = hedge_experiment(in.contract, in.quote, in.model, reference_policy(), {300, 8, 0, 5e8, 1});
    const HedgeSummary b = hedge_experiment(in.contract, in.quote, in.model, reference_policy(), {300, 8, 0, 5e8, 4});
    EXPECT_EQ(a.mean_error, b.mean_error);
    EXPECT_EQ(a.sd_error, b.sd_error);
    EXPECT_EQ(a.mean_cost, b.mean_cost);
}

TEST(HedgeExperiment, NoCostsMeansNoCostsPaid) {
    auto in = reference_inputs();
    in.model.cost_rate = 0.0;
    const HedgePolicy policy{0.01, 0.0};
    const HedgeSummary s = hedge_experiment(in.contract, in.quote, in.model, policy, {500, 1});
    EXPECT_EQ(s.mean_cost, 0.0);
}

TEST(HedgeExperiment, EnforcesWorkCap) {
    const auto in = reference_inputs();
    EXPECT_THROW(hedge_experiment(in.contract, in.quote, in.model, reference_policy(), {10000, 1, 0, 1e6}),
                 ResourceLimit);
    EXPECT_THROW(hedge_experiment(in.contract, in.quote, in.model, reference_policy(), {0, 1}), InvalidArgument);
}

TEST(HedgeExperiment, RefinementReducesReplicationError) {
    // Classical frictionless hedge: the error shrinks like sqrt(step).
    const OptionContract contract{1.0, 0.32};
    const MarketQuote quote{1.0, 0.0, 0.03, 0.01};
    const FrictionModel model{0.2, 0.5, 0.01, 0.0};
    double previous = INFINITY;
    for (double step : {0.04, 0.02, 0.01, 0.005}) {
        const HedgePolicy policy{step, 0.0};
        const HedgeSummary s = hedge_experiment(contract, quote, model, policy, {10000, 17, 1});
        const double rms = std::sqrt(s.mean_error * s.mean_error + s.sd_error * s.sd_error);
        EXPECT_LT(rms, previous) << step;
        previous = rms;
    }
}

TEST(HedgeExperiment, PremiumFundingAtReferenceParameters) {
    const auto in = reference_inputs();
    const ExperimentConfig config{10000, 12345};
    const HedgeSummary tfbs = hedge_experiment(in.contract, in.quote, in.model, reference_policy(), config);
    EXPECT_LE(std::abs(tfbs.mean_error), 2.0 * tfbs.se_error);

    // Pricing without the cost term leaves the costs unfunded.
    const HedgeSummary bare =
        hedge_experiment(in.contract, in.quote, in.model, reference_policy(PremiumSource::Frictionless), config);
    EXPECT_LT(bare.mean_error, -3.0 * bare.se_error);

    // The raw-sigma Garman-Kohlhagen premium exceeds the adjusted price here
    // (sigma_hat < sigma at this step and Hurst exponent), so it over-funds.
    const HedgeSummary gk =
        hedge_experiment(in.contract, in.quote, in.model, reference_policy(PremiumSource::GarmanKohlhagen), config);
    EXPECT_GT(gk.mean_error, 3.0 * gk.se_error);
}

TEST(HedgeExperiment, GkDeltaChangesTheHedge) {
    const auto in = reference_inputs();
    HedgePolicy policy = reference_policy();
    const HedgeSimulation sim(in.contract, in.quote, in.model, policy);
    policy.delta_source = DeltaSource::GarmanKohlhagen;
    const HedgeResult own = sim.run(11);
    const HedgeResult gk = simulate_hedge(sim.path(11), in.contract, in.model, policy);
    EXPECT_EQ(own.premium, gk.premium);
    EXPECT_NE(own.ledger.front().psi, gk.ledger.front().psi);
}

TEST(HedgeExperiment, FirstRebalanceCostMatchesGammaTerm) {
    const auto in = reference_inputs();
    const HedgePolicy policy = reference_policy();
    const HedgeSimulation sim(in.contract, in.quote, in.model, policy);
    const std::size_t paths = 10000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        const double c = sim.run(70000 + p).ledger[1].cost;
        sum += c;
        sum_sq += c * c;
    }
    const double n = static_cast<double>(paths);
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1.0));

    const double s = in.quote.spot;
    const double vol = adjusted_volatility(in.model).value;
    const double exact = oracle::first_rebalance_cost(s, in.contract.strike, in.contract.maturity - in.quote.time,
                                                      in.quote.rate_domestic, in.quote.rate_foreign, vol,
                                                      in.model.sigma, in.model.hurst, policy.rebalance_step,
                                                      policy.cost_rate);
    EXPECT_NEAR(mean, exact, 3.0 * se);

    // Leading-order term (alpha/2) S^2 Gamma sigma sqrt(2/pi) step^H. Its
    // neglected curvature terms put it about 2.4% below the exact value here,
    // more than 3 standard errors at 10^4 paths.
    const double gamma = greeks(in.contract, in.quote, in.model).gamma;
    const double leading = 0.5 * policy.cost_rate * s * s * gamma * in.model.sigma * std::sqrt(2.0 / M_PI) *
                           std::pow(policy.rebalance_step, in.model.hurst);
    EXPECT_NEAR(leading / exact, 1.0, 0.03);
}

TEST(HedgeExperiment, MeanAbsoluteFbmIncrement) {
    // 10^5 increments drawn one per path at the hedge grid's rebalance step.
    const double step = 0.01;
    const double h = testing::kHurst;
    const FbmSampler sampler({4, step, h});
    const std::size_t draws = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double a = std::abs(sampler.increments(i)[i % 4]);
        sum += a;
        sum_sq += a * a;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1.0));
    EXPECT_NEAR(mean, std::sqrt(2.0 / M_PI) * std::pow(step, h), 4.0 * se);
}

}  // namespace
}  // namespace tfbs
