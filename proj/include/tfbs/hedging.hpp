#pragma once

// Discrete delta hedging of a short call with proportional transaction costs.
//
// The writer receives a premium at t0, buys psi = Delta units of foreign
// currency and keeps the rest in the domestic money account. Between
// rebalances the foreign holding accrues r_f (units grow by e^{r_f dt}) and the
// money account accrues r_d, both compounded per simulation grid step. At
// each rebalance the position is reset to the current Delta and
// cost_rate/2 * |trade| * S is paid out of the money account. The initial
// purchase at t0 and the physical settlement at T carry no cost.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string_view>
#include <thread>
#include <vector>

#include "tfbs/errors.hpp"
#include "tfbs/fbm.hpp"
#include "tfbs/greeks.hpp"
#include "tfbs/model.hpp"

namespace tfbs {

/// Which model's Delta the hedger follows.
enum class DeltaSource { Tfbs, GarmanKohlhagen };

/// Which model's price funds the hedge at t0.
enum class PremiumSource {
    Tfbs,             // cost-adjusted fractional price (sigma_hat with Le(H))
    Frictionless,     // same model with the cost term switched off
    GarmanKohlhagen,  // raw sigma, H = 1/2, no costs
};

struct HedgePolicy {
    double rebalance_step = 0.01;
    double cost_rate = 0.0;
    DeltaSource delta_source = DeltaSource::Tfbs;
    PremiumSource premium_source = PremiumSource::Tfbs;

    void validate() const {
        detail::require(std::isfinite(rebalance_step) && rebalance_step > 0.0, "rebalance step must be positive");
        detail::require(std::isfinite(cost_rate) && cost_rate >= 0.0, "hedge cost rate must be non-negative");
    }
};

struct LedgerEntry {
    double time = 0.0;
    double spot = 0.0;
    double psi = 0.0;        // units of foreign currency held after the rebalance
    double phi = 0.0;        // units of the money account F_t = e^{r_d t}
    double cost = 0.0;       // transaction cost paid at this rebalance
    double portfolio = 0.0;  // psi S + phi F after costs
};

using HedgeLedger = std::vector<LedgerEntry>;

struct HedgeResult {
    double premium = 0.0;
    double terminal_error = 0.0;  // P_T - (S_T - K)^+
    double total_costs = 0.0;
    HedgeLedger ledger;
};

inline double hedge_premium(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model,
                            PremiumSource source) {
    switch (source) {
        case PremiumSource::Tfbs: return call_price(contract, quote, model);
        case PremiumSource::Frictionless: return call_price(contract, quote, model.frictionless());
        case PremiumSource::GarmanKohlhagen: return garman_kohlhagen_call(contract, quote, model.sigma);
    }
    return 0.0;
}

namespace detail {

inline bool near_integer_multiple(double value, double unit, std::size_t& multiple) {
    const double ratio = value / unit;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-7 * std::max(1.0, ratio)) return false;
    multiple = static_cast<std::size_t>(rounded);
    return true;
}

}  // namespace detail

inline HedgeResult simulate_hedge(const SpotPath& path, const OptionContract& contract, const FrictionModel& model,
                                  const HedgePolicy& policy) {
    contract.validate();
    model.validate();
    policy.validate();
    detail::require(contract.kind == OptionKind::Call, "hedging simulation covers calls only");
    detail::require(path.times.size() >= 2 && path.spots.size() == path.times.size(), "path needs at least one step");

    const std::size_t n = path.times.size() - 1;
    const double dt = path.times[1] - path.times[0];
    detail::require(dt > 0.0, "path times must increase");
    detail::require(std::abs(path.times.back() - contract.maturity) <= 1e-9 * std::max(1.0, contract.maturity),
                    "path must end at the contract maturity");
    std::size_t every = 0;
    detail::require(detail::near_integer_multiple(policy.rebalance_step, dt, every),
                    "rebalance step must be an integer multiple of the path grid step");

    const FrictionModel delta_model =
        policy.delta_source == DeltaSource::Tfbs ? model : FrictionModel::garman_kohlhagen(model.sigma);
    const double rd = path.rate_domestic;
    const double rf = path.rate_foreign;
    const double half_cost = 0.5 * policy.cost_rate;

    auto delta_at = [&](double t, double s) {
        return greeks(contract, MarketQuote{s, t, rd, rf}, delta_model).delta;
    };

    HedgeResult result;
    result.ledger.reserve(n / every + 2);
    const MarketQuote start{path.spots[0], path.times[0], rd, rf};
    result.premium = hedge_premium(contract, start, model, policy.premium_source);

    double psi = delta_at(path.times[0], path.spots[0]);
    double cash = result.premium - psi * path.spots[0];  // domestic value of the money-account leg
    auto record = [&](std::size_t i, double cost) {
        const double bond_units = cash * std::exp(-rd * path.times[i]);
        result.ledger.push_back({path.times[i], path.spots[i], psi, bond_units, cost, psi * path.spots[i] + cash});
    };
    record(0, 0.0);

    for (std::size_t i = 1; i <= n; ++i) {
        const double h = path.times[i] - path.times[i - 1];
        psi *= std::exp(rf * h);
        cash *= std::exp(rd * h);
        if (i < n && i % every == 0) {
            const double s = path.spots[i];
            const double target = delta_at(path.times[i], s);
            const double trade = target - psi;
            const double cost = half_cost * std::abs(trade) * s;
            cash -= trade * s + cost;
            psi = target;
            result.total_costs += cost;
            record(i, cost);
        }
    }
    record(n, 0.0);
    const double spot_t = path.spots[n];
    result.terminal_error = psi * spot_t + cash - std::max(spot_t - contract.strike, 0.0);
    return result;
}

inline void write_ledger_csv(std::ostream& os, const HedgeLedger& ledger) {
    const auto old_precision = os.precision(10);
    os << "time,spot,psi,phi,cost,portfolio\n";
    for (const LedgerEntry& e : ledger)
        os << e.time << ',' << e.spot << ',' << e.psi << ',' << e.phi << ',' << e.cost << ',' << e.portfolio << '\n';
    os.precision(old_precision);
}

struct ExperimentConfig {
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    std::size_t substeps = 0;  // grid steps per rebalance; 0 picks the smallest aligning value
    double max_work = 5e8;     // cap on n_steps * n_paths
    unsigned threads = 0;      // 0 uses hardware concurrency
};

struct HedgeSummary {
    double mean_error = 0.0;
    double sd_error = 0.0;
    double se_error = 0.0;
    double mean_cost = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo setup shared by all paths of one experiment: the simulation
/// grid aligned to both the rebalance step and the time to expiry, and the
/// fBm sampler for that grid. Path i uses seed + i.
class HedgeSimulation {
public:
    HedgeSimulation(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model,
                    const HedgePolicy& policy, std::size_t substeps = 0, double max_work_per_path = 0.0)
        : contract_(contract), quote_(quote), model_(model), policy_(policy),
          sampler_(make_grid(contract, quote, model, policy, substeps, max_work_per_path)) {}

    const FbmGrid& grid() const noexcept { return sampler_.grid(); }

    SpotPath path(std::uint64_t seed) const {
        return sample_spot_path(sampler_.sample(seed), quote_.spot, quote_.rate_domestic, quote_.rate_foreign,
                                model_.sigma, quote_.time);
    }

    HedgeResult run(std::uint64_t seed) const { return simulate_hedge(path(seed), contract_, model_, policy_); }

private:
    static FbmGrid make_grid(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model,
                             const HedgePolicy& policy, std::size_t substeps, double max_work_per_path) {
        policy.validate();
        const double tau = time_to_expiry(contract, quote);
        detail::require(tau > 0.0, "hedging needs a positive time to expiry");
        std::size_t n = 0;
        double dt = 0.0;
        auto try_substeps = [&](std::size_t m) {
            dt = policy.rebalance_step / static_cast<double>(m);
            return detail::near_integer_multiple(tau, dt, n);
        };
        bool aligned = false;
        if (substeps > 0) {
            aligned = try_substeps(substeps);
        } else {
            for (std::size_t m = 1; m <= 1000 && !aligned; ++m) aligned = try_substeps(m);
        }
        detail::require(aligned, "time to expiry is not commensurate with the rebalance step");
        if (max_work_per_path > 0.0 && static_cast<double>(n) > max_work_per_path)
            throw ResourceLimit("simulation grid of " + std::to_string(n) + " steps exceeds the work cap");
        // Snap dt so the grid ends exactly on the maturity.
        return {n, tau / static_cast<double>(n), model.hurst};
    }

    OptionContract contract_;
    MarketQuote quote_;
    FrictionModel model_;
    HedgePolicy policy_;
    FbmSampler sampler_;
};

namespace detail {

// Neumaier compensated sum, evaluated in index order.
inline double compensated_sum(const std::vector<double>& values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

}  // namespace detail

struct HedgeExperimentResult {
    HedgeSummary summary;
    std::vector<double> terminal_errors;
    std::vector<double> total_costs;
};

inline HedgeExperimentResult hedge_experiment_detailed(const OptionContract& contract, const MarketQuote& quote,
                                                       const FrictionModel& model, const HedgePolicy& policy,
                                                       const ExperimentConfig& config) {
    detail::require(config.n_paths >= 1, "experiment needs at least one path");
    const double paths = static_cast<double>(config.n_paths);
    const HedgeSimulation sim(contract, quote, model, policy, config.substeps,
                              config.max_work > 0.0 ? config.max_work / paths : 0.0);

    HedgeExperimentResult out;
    out.terminal_errors.assign(config.n_paths, 0.0);
    out.total_costs.assign(config.n_paths, 0.0);

    unsigned workers = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.n_paths));
    auto work = [&](unsigned worker) {
        for (std::size_t i = worker; i < config.n_paths; i += workers) {
            const HedgeResult r = sim.run(config.seed + i);
            out.terminal_errors[i] = r.terminal_error;
            out.total_costs[i] = r.total_costs;
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    HedgeSummary& s = out.summary;
    s.n_paths = config.n_paths;
    s.seed = config.seed;
    s.mean_error = detail::compensated_sum(out.terminal_errors) / paths;
    s.mean_cost = detail::compensated_sum(out.total_costs) / paths;
    if (config.n_paths > 1) {
        std::vector<double> sq(config.n_paths);
        for (std::size_t i = 0; i < config.n_paths; ++i) {
            const double d = out.terminal_errors[i] - s.mean_error;
            sq[i] = d * d;
        }
        s.sd_error = std::sqrt(detail::compensated_sum(sq) / (paths - 1.0));
        s.se_error = s.sd_error / std::sqrt(paths);
    }
    return out;
}

inline HedgeSummary hedge_experiment(const OptionContract& contract, const MarketQuote& quote,
                                     const FrictionModel& model, const HedgePolicy& policy,
                                     const ExperimentConfig& config) {
    return hedge_experiment_detailed(contract, quote, model, policy, config).summary;
}

inline std::string_view to_string(DeltaSource s) { return s == DeltaSource::Tfbs ? "tfbs" : "gk"; }

inline std::string_view to_string(PremiumSource s) {
    switch (s) {
        case PremiumSource::Tfbs: return "tfbs";
        case PremiumSource::Frictionless: return "fbs";
        case PremiumSource::GarmanKohlhagen: return "gk";
    }
    return "unknown";
}

}  // namespace tfbs
