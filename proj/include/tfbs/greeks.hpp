#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "tfbs/model.hpp"

namespace tfbs {

/// First and second order call sensitivities. Theta is dC/dt in calendar time
/// (positive t moves toward maturity), not -dC/dtau.
struct GreeksVector {
    double delta = 0.0;         // dC/dS
    double strike_delta = 0.0;  // dC/dK
    double rho_domestic = 0.0;  // dC/dr_d
    double rho_foreign = 0.0;   // dC/dr_f
    double theta = 0.0;         // dC/dt
    double gamma = 0.0;         // d2C/dS2
    double vega_hat = 0.0;      // dC/dsigma_hat
};

/// Call sensitivities to the friction parameters.
struct SensitivityVector {
    double dC_dH = 0.0;
    double dC_dstep = 0.0;
    double dC_dcost = 0.0;
};

/// Partial derivatives of sigma_hat^2 with respect to H, step and cost rate.
struct AdjustedVarianceGradient {
    double d_hurst = 0.0;
    double d_step = 0.0;
    double d_cost = 0.0;
};

inline AdjustedVarianceGradient adjusted_variance_gradient(const FrictionModel& model) {
    model.validate();
    constexpr double sqrt_2_over_pi = std::numbers::sqrt2 * std::numbers::inv_sqrtpi;
    const double s = model.sigma;
    const double h = model.hurst;
    const double dt = model.step;
    const double log_dt = std::log(dt);
    const double diffusion = s * s * std::pow(dt, 2.0 * h - 1.0);  // sigma^2 dt^(2H-1)
    const double cost = model.cost_rate * s * sqrt_2_over_pi * std::pow(dt, h - 1.0);  // sigma^2 Le(H)
    return {
        2.0 * log_dt * diffusion + log_dt * cost,
        ((2.0 * h - 1.0) * diffusion + (h - 1.0) * cost) / dt,
        s * sqrt_2_over_pi * std::pow(dt, h - 1.0),
    };
}

/// Analytic call Greeks at the model's adjusted volatility. Requires tau > 0.
inline GreeksVector greeks(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model) {
    const double tau = time_to_expiry(contract, quote);
    detail::require(tau > 0.0, "greeks need a positive time to expiry");
    const AdjustedVolatility vol = adjusted_volatility(model);
    const auto disc = detail::discounted(contract, quote, tau);
    const double sqrt_tau = std::sqrt(tau);

    double d1 = 0.0;
    double d2 = 0.0;
    if (vol.value > 0.0) {
        const DPair d = d_values(contract, quote, vol);
        d1 = d.d1;
        d2 = d.d2;
    } else {
        // Deterministic forward: the d-values degenerate to +-infinity.
        const double moneyness = std::log(disc.spot / disc.strike);
        const double inf = std::numeric_limits<double>::infinity();
        d1 = d2 = moneyness > 0.0 ? inf : (moneyness < 0.0 ? -inf : 0.0);
    }

    const double cdf1 = normal_cdf(d1);
    const double cdf2 = normal_cdf(d2);
    const double pdf1 = normal_pdf(d1);

    GreeksVector g;
    g.delta = std::exp(-quote.rate_foreign * tau) * cdf1;
    g.strike_delta = -std::exp(-quote.rate_domestic * tau) * cdf2;
    g.rho_domestic = tau * disc.strike * cdf2;
    g.rho_foreign = -tau * disc.spot * cdf1;
    g.theta = quote.rate_foreign * disc.spot * cdf1 - quote.rate_domestic * disc.strike * cdf2;
    if (vol.value > 0.0) {
        g.theta -= disc.spot * vol.value * pdf1 / (2.0 * sqrt_tau);
        g.gamma = disc.spot * pdf1 / (quote.spot * quote.spot * vol.value * sqrt_tau);
    }
    g.vega_hat = disc.spot * sqrt_tau * pdf1;
    return g;
}

/// dC/dx = vega_hat * dsigma_hat/dx with dsigma_hat/dx = (dsigma_hat^2/dx) / (2 sigma_hat).
inline SensitivityVector parameter_sensitivities(const OptionContract& contract, const MarketQuote& quote,
                                                 const FrictionModel& model) {
    const AdjustedVolatility vol = adjusted_volatility(model);
    detail::require(vol.value > 0.0, "parameter sensitivities need a positive adjusted volatility");
    const GreeksVector g = greeks(contract, quote, model);
    const AdjustedVarianceGradient grad = adjusted_variance_gradient(model);
    const double scale = g.vega_hat / (2.0 * vol.value);
    return {scale * grad.d_hurst, scale * grad.d_step, scale * grad.d_cost};
}

}  // namespace tfbs
