#pragma once

// Parameter sweeps and model-comparison grids behind the command-line tool.
//
// Three call prices are compared on a (maturity, strike) grid:
//   GK    Garman-Kohlhagen with the raw sigma
//   FBS   the fractional model without costs, sigma_hat = sigma step^(H-1/2)
//         (or, with FbsVariant::Classical, total variance sigma^2 (T^2H - t^2H))
//   TFBS  the fractional model with costs
// GK and FBS are evaluated through the TFBS pricer as special cases.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tfbs/errors.hpp"
#include "tfbs/finite_difference.hpp"
#include "tfbs/greeks.hpp"
#include "tfbs/model.hpp"

namespace tfbs {

/// Inclusive, evenly spaced range; `count` == 1 means the single point `lo`.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;

    void validate() const {
        detail::require(std::isfinite(lo) && std::isfinite(hi), "range bounds must be finite");
        detail::require(count >= 1, "range must contain at least one point");
        detail::require(lo <= hi, "range is inverted");
        detail::require(count == 1 || lo < hi, "multi-point range needs lo < hi");
    }

    std::vector<double> values() const {
        validate();
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i)
            v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        if (count > 1) v.back() = hi;
        return v;
    }
};

enum class FbsVariant { Rebalanced, Classical };

struct CompareSettings {
    MarketQuote quote;
    FrictionModel model;
    Range maturities{0.11, 0.5, 40};
    Range strikes{1.2, 1.49, 30};
    FbsVariant fbs_variant = FbsVariant::Rebalanced;
};

struct ComparisonCell {
    double maturity = 0.0;
    double strike = 0.0;
    double gk = 0.0;
    double fbs = 0.0;
    double tfbs = 0.0;
    double rel_fbs_gk = 0.0;   // (FBS - GK) / GK
    double rel_tfbs_gk = 0.0;  // (TFBS - GK) / GK
    bool tfbs_closer = false;  // |TFBS - GK| < |FBS - GK|
};

struct ComparisonGrid {
    std::vector<double> maturities;
    std::vector<double> strikes;
    std::vector<ComparisonCell> cells;  // maturity-major
    double tfbs_closer_fraction = 0.0;
};

/// Classical fractional price: lognormal with total variance sigma^2 (T^2H - t^2H).
inline double classical_fbs_call(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model) {
    const double tau = time_to_expiry(contract, quote);
    detail::require(tau > 0.0, "classical fractional price needs a positive time to expiry");
    const double two_h = 2.0 * model.hurst;
    const double variance = model.sigma * model.sigma *
                            (std::pow(contract.maturity, two_h) - std::pow(quote.time, two_h));
    return call_price(contract, quote, AdjustedVolatility{std::sqrt(variance / tau), 0.0});
}

inline ComparisonGrid compare_models(const CompareSettings& settings) {
    settings.quote.validate();
    settings.model.validate();
    ComparisonGrid grid;
    grid.maturities = settings.maturities.values();
    grid.strikes = settings.strikes.values();
    for (double t : grid.maturities)
        detail::require(t > settings.quote.time, "every maturity must lie after the valuation time");

    const FrictionModel gk = FrictionModel::garman_kohlhagen(settings.model.sigma);
    const FrictionModel fbs = settings.model.frictionless();
    std::size_t closer = 0;
    grid.cells.reserve(grid.maturities.size() * grid.strikes.size());
    for (double maturity : grid.maturities) {
        for (double strike : grid.strikes) {
            const OptionContract contract{strike, maturity, OptionKind::Call};
            ComparisonCell cell;
            cell.maturity = maturity;
            cell.strike = strike;
            cell.gk = call_price(contract, settings.quote, gk);
            cell.fbs = settings.fbs_variant == FbsVariant::Rebalanced
                           ? call_price(contract, settings.quote, fbs)
                           : classical_fbs_call(contract, settings.quote, settings.model);
            cell.tfbs = call_price(contract, settings.quote, settings.model);
            cell.rel_fbs_gk = (cell.fbs - cell.gk) / cell.gk;
            cell.rel_tfbs_gk = (cell.tfbs - cell.gk) / cell.gk;
            cell.tfbs_closer = std::abs(cell.tfbs - cell.gk) < std::abs(cell.fbs - cell.gk);
            closer += cell.tfbs_closer ? 1 : 0;
            grid.cells.push_back(cell);
        }
    }
    grid.tfbs_closer_fraction = static_cast<double>(closer) / static_cast<double>(grid.cells.size());
    return grid;
}

struct SweepSettings {
    OptionContract contract;
    MarketQuote quote;
    double sigma = 0.0;
    Range hurst;
    Range step;
    Range cost;
};

struct SweepRow {
    double hurst = 0.0;
    double step = 0.0;
    double cost = 0.0;
    double sigma_hat = 0.0;
    double leland_number = 0.0;
    double price = 0.0;
    double dC_dH = 0.0;
    double dC_dstep = 0.0;
    double dC_dcost = 0.0;
    // Central differences of the price; NaN where the bump leaves the domain.
    double fd_dC_dH = 0.0;
    double fd_dC_dstep = 0.0;
    double fd_dC_dcost = 0.0;
};

/// Grid evaluation over (H, step, cost), H slowest. Rows follow contract.kind
/// for the price column; sensitivities are those of the call.
inline std::vector<SweepRow> sweep(const SweepSettings& settings) {
    const auto hs = settings.hurst.values();
    const auto steps = settings.step.values();
    const auto costs = settings.cost.values();
    std::vector<SweepRow> rows;
    rows.reserve(hs.size() * steps.size() * costs.size());
    auto fd_or_nan = [](const PricingInputs& in, PricingParameter p) {
        try {
            return finite_difference(in, p);
        } catch (const InvalidArgument&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    for (double h : hs) {
        for (double dt : steps) {
            for (double a : costs) {
                const FrictionModel model{settings.sigma, h, dt, a};
                const AdjustedVolatility vol = adjusted_volatility(model);
                const SensitivityVector sens = parameter_sensitivities(settings.contract, settings.quote, model);
                const PricingInputs in{settings.contract, settings.quote, model};
                rows.push_back({h, dt, a, vol.value, vol.leland_number,
                                price(settings.contract, settings.quote, model), sens.dC_dH, sens.dC_dstep,
                                sens.dC_dcost, fd_or_nan(in, PricingParameter::Hurst),
                                fd_or_nan(in, PricingParameter::Step), fd_or_nan(in, PricingParameter::Cost)});
            }
        }
    }
    return rows;
}

}  // namespace tfbs
