#pragma once

// Central finite-difference estimates of call-price derivatives. Used as an
// oracle against the analytic Greeks and sensitivities.

#include <cmath>
#include <string_view>

#include "tfbs/model.hpp"

namespace tfbs {

enum class PricingParameter {
    Spot,
    Strike,
    RateDomestic,
    RateForeign,
    Time,
    Sigma,
    Hurst,
    Step,
    Cost,
    SigmaHat,
};

/// All valuation inputs in one place so a single field can be bumped.
struct PricingInputs {
    OptionContract contract;
    MarketQuote quote;
    FrictionModel model;
};

inline std::string_view to_string(PricingParameter p) {
    switch (p) {
        case PricingParameter::Spot: return "spot";
        case PricingParameter::Strike: return "strike";
        case PricingParameter::RateDomestic: return "rate_domestic";
        case PricingParameter::RateForeign: return "rate_foreign";
        case PricingParameter::Time: return "time";
        case PricingParameter::Sigma: return "sigma";
        case PricingParameter::Hurst: return "hurst";
        case PricingParameter::Step: return "step";
        case PricingParameter::Cost: return "cost";
        case PricingParameter::SigmaHat: return "sigma_hat";
    }
    return "unknown";
}

/// Default bump: relative 1e-5 for scale-like inputs, absolute 1e-6 for rates,
/// calendar time and the Hurst exponent.
inline double default_bump(const PricingInputs& in, PricingParameter p) {
    constexpr double rel = 1e-5;
    constexpr double abs = 1e-6;
    switch (p) {
        case PricingParameter::Spot: return rel * in.quote.spot;
        case PricingParameter::Strike: return rel * in.contract.strike;
        case PricingParameter::Sigma: return rel * in.model.sigma;
        case PricingParameter::Cost: return rel * in.model.cost_rate;
        case PricingParameter::Step: return rel * in.model.step;
        case PricingParameter::SigmaHat: return rel * adjusted_volatility(in.model).value;
        case PricingParameter::RateDomestic:
        case PricingParameter::RateForeign:
        case PricingParameter::Time:
        case PricingParameter::Hurst: return abs;
    }
    return abs;
}

namespace detail {

inline double bumped_call(const PricingInputs& in, PricingParameter p, double shift) {
    PricingInputs x = in;
    AdjustedVolatility vol = adjusted_volatility(in.model);
    switch (p) {
        case PricingParameter::Spot: x.quote.spot += shift; break;
        case PricingParameter::Strike: x.contract.strike += shift; break;
        case PricingParameter::RateDomestic: x.quote.rate_domestic += shift; break;
        case PricingParameter::RateForeign: x.quote.rate_foreign += shift; break;
        case PricingParameter::Time: x.quote.time += shift; break;
        case PricingParameter::Sigma: x.model.sigma += shift; break;
        case PricingParameter::Hurst: x.model.hurst += shift; break;
        case PricingParameter::Step: x.model.step += shift; break;
        case PricingParameter::Cost: x.model.cost_rate += shift; break;
        case PricingParameter::SigmaHat:
            vol.value += shift;
            require(vol.value > 0.0, "bump pushes sigma_hat out of its domain");
            return call_price(x.contract, x.quote, vol);
    }
    // Validation inside call_price rejects bumps that leave the domain.
    const double tau = x.contract.maturity - x.quote.time;
    require(tau > 0.0, "bump pushes valuation time past maturity");
    return call_price(x.contract, x.quote, x.model);
}

}  // namespace detail

/// Central difference (C(x+h) - C(x-h)) / 2h.
inline double finite_difference(const PricingInputs& in, PricingParameter p, double bump) {
    detail::require(std::isfinite(bump) && bump > 0.0, "finite-difference bump must be positive");
    return (detail::bumped_call(in, p, bump) - detail::bumped_call(in, p, -bump)) / (2.0 * bump);
}

inline double finite_difference(const PricingInputs& in, PricingParameter p) {
    return finite_difference(in, p, default_bump(in, p));
}

/// Second central difference (C(x+h) - 2C(x) + C(x-h)) / h^2.
inline double second_finite_difference(const PricingInputs& in, PricingParameter p, double bump) {
    detail::require(std::isfinite(bump) && bump > 0.0, "finite-difference bump must be positive");
    const double up = detail::bumped_call(in, p, bump);
    const double mid = detail::bumped_call(in, p, 0.0);
    const double down = detail::bumped_call(in, p, -bump);
    return (up - 2.0 * mid + down) / (bump * bump);
}

inline double second_finite_difference(const PricingInputs& in, PricingParameter p) {
    return second_finite_difference(in, p, default_bump(in, p));
}

}  // namespace tfbs
