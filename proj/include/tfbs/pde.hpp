#pragma once

#include "tfbs/greeks.hpp"
#include "tfbs/model.hpp"

namespace tfbs {

/// Residual of the pricing equation
///     C_t + (r_d - r_f) S C_S + sigma_hat^2 S^2 C_SS / 2 - r_d C
/// evaluated with the analytic Greeks. Zero up to rounding for the closed form.
inline double pde_residual(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model) {
    const GreeksVector g = greeks(contract, quote, model);
    const double vol = adjusted_volatility(model).value;
    const double s = quote.spot;
    return g.theta + (quote.rate_domestic - quote.rate_foreign) * s * g.delta + 0.5 * vol * vol * s * s * g.gamma -
           quote.rate_domestic * call_price(contract, quote, model);
}

}  // namespace tfbs
