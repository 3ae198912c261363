#pragma once

// Closed-form pricing of European currency options under the fractional
// Black-Scholes model with proportional transaction costs.
//
// The hedger rebalances every `step` years and pays cost_rate/2 per unit of
// traded notional. Both effects fold into an adjusted volatility
//
//     sigma_hat^2 = sigma^2 * (step^(2H-1) + Le(H)),
//     Le(H)       = cost_rate / (sigma * step^(1-H)) * sqrt(2/pi),
//
// after which the price is the Garman-Kohlhagen lognormal formula evaluated
// at sigma_hat. The d-values use the dimensionally consistent form
//     d1 = (ln(S/K) + (r_d - r_f + sigma_hat^2/2) tau) / (sigma_hat sqrt(tau)).
// A variant with sigma_hat/2 in place of sigma_hat^2/2 also circulates; it is
// not a lognormal price and is not implemented.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tfbs/errors.hpp"
#include "tfbs/normal.hpp"

namespace tfbs {

enum class OptionKind { Call, Put };

struct OptionContract {
    double strike = 0.0;
    double maturity = 0.0;
    OptionKind kind = OptionKind::Call;

    void validate() const {
        detail::require(std::isfinite(strike) && strike > 0.0, "strike must be positive and finite");
        detail::require(std::isfinite(maturity) && maturity > 0.0, "maturity must be positive and finite");
    }
};

struct MarketQuote {
    double spot = 0.0;
    double time = 0.0;
    double rate_domestic = 0.0;
    double rate_foreign = 0.0;

    void validate() const {
        detail::require(std::isfinite(spot) && spot > 0.0, "spot must be positive and finite");
        detail::require(std::isfinite(time) && time >= 0.0, "valuation time must be non-negative and finite");
        detail::require(std::isfinite(rate_domestic), "domestic rate must be finite");
        detail::require(std::isfinite(rate_foreign), "foreign rate must be finite");
    }
};

/// Volatility, Hurst exponent, rebalancing interval and proportional cost rate.
///
/// H = 1/2 is admitted so the model can collapse onto Garman-Kohlhagen;
/// H < 1/2 is rejected. sigma = 0 is admitted only without costs, as the
/// deterministic-forward limit.
struct FrictionModel {
    double sigma = 0.0;
    double hurst = 0.5;
    double step = 1.0;
    double cost_rate = 0.0;

    void validate() const {
        detail::require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be non-negative and finite");
        detail::require(std::isfinite(hurst) && hurst >= 0.5 && hurst < 1.0, "hurst must lie in [0.5, 1)");
        detail::require(std::isfinite(step) && step > 0.0, "rebalancing step must be positive and finite");
        detail::require(std::isfinite(cost_rate) && cost_rate >= 0.0, "cost rate must be non-negative and finite");
        detail::require(sigma > 0.0 || cost_rate == 0.0, "sigma = 0 is only admitted without transaction costs");
    }

    /// Garman-Kohlhagen as a special case: H = 1/2, no costs (step is irrelevant).
    static FrictionModel garman_kohlhagen(double sigma) { return {sigma, 0.5, 1.0, 0.0}; }

    /// Same model with the cost term switched off (the plain fractional model).
    FrictionModel frictionless() const { return {sigma, hurst, step, 0.0}; }
};

struct AdjustedVolatility {
    double value = 0.0;
    double leland_number = 0.0;
};

struct DPair {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Fractional Leland number alpha * sqrt(2/pi) / (sigma * step^(1-H)).
inline double leland_number(const FrictionModel& model) {
    model.validate();
    if (model.cost_rate == 0.0) return 0.0;
    constexpr double sqrt_2_over_pi = std::numbers::sqrt2 * std::numbers::inv_sqrtpi;
    return model.cost_rate * sqrt_2_over_pi / (model.sigma * std::pow(model.step, 1.0 - model.hurst));
}

inline AdjustedVolatility adjusted_volatility(const FrictionModel& model) {
    const double le = leland_number(model);
    const double bracket = std::pow(model.step, 2.0 * model.hurst - 1.0) + le;
    detail::require(std::isfinite(bracket) && bracket > 0.0, "adjusted variance bracket must be positive");
    return {model.sigma * std::sqrt(bracket), le};
}

/// Time to expiry T - t; negative values are rejected, zero is allowed.
inline double time_to_expiry(const OptionContract& contract, const MarketQuote& quote) {
    contract.validate();
    quote.validate();
    const double tau = contract.maturity - quote.time;
    detail::require(tau >= 0.0, "valuation time is past maturity");
    return tau;
}

inline DPair d_values(const OptionContract& contract, const MarketQuote& quote, AdjustedVolatility sigma_hat) {
    const double tau = time_to_expiry(contract, quote);
    detail::require(tau > 0.0, "d-values need a positive time to expiry");
    detail::require(std::isfinite(sigma_hat.value) && sigma_hat.value > 0.0, "d-values need a positive volatility");
    const double vol_sqrt_tau = sigma_hat.value * std::sqrt(tau);
    const double carry = quote.rate_domestic - quote.rate_foreign + 0.5 * sigma_hat.value * sigma_hat.value;
    const double d1 = (std::log(quote.spot / contract.strike) + carry * tau) / vol_sqrt_tau;
    return {d1, d1 - vol_sqrt_tau};
}

namespace detail {

struct Discounted {
    double spot;    // S e^{-r_f tau}
    double strike;  // K e^{-r_d tau}
};

inline Discounted discounted(const OptionContract& contract, const MarketQuote& quote, double tau) {
    return {quote.spot * std::exp(-quote.rate_foreign * tau), contract.strike * std::exp(-quote.rate_domestic * tau)};
}

}  // namespace detail

/// Call value at a given adjusted volatility; tau = 0 or sigma_hat = 0 fall back
/// to the (discounted) intrinsic value, the continuous limit of the closed form.
inline double call_price(const OptionContract& contract, const MarketQuote& quote, AdjustedVolatility sigma_hat) {
    const double tau = time_to_expiry(contract, quote);
    if (tau == 0.0) return std::max(quote.spot - contract.strike, 0.0);
    const auto disc = detail::discounted(contract, quote, tau);
    if (sigma_hat.value == 0.0) return std::max(disc.spot - disc.strike, 0.0);
    const DPair d = d_values(contract, quote, sigma_hat);
    return disc.spot * normal_cdf(d.d1) - disc.strike * normal_cdf(d.d2);
}

inline double put_price(const OptionContract& contract, const MarketQuote& quote, AdjustedVolatility sigma_hat) {
    const double tau = time_to_expiry(contract, quote);
    if (tau == 0.0) return std::max(contract.strike - quote.spot, 0.0);
    const auto disc = detail::discounted(contract, quote, tau);
    if (sigma_hat.value == 0.0) return std::max(disc.strike - disc.spot, 0.0);
    const DPair d = d_values(contract, quote, sigma_hat);
    return disc.strike * normal_cdf(-d.d2) - disc.spot * normal_cdf(-d.d1);
}

// sigma_hat is derived from the model on every call; nothing is cached.
inline double call_price(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model) {
    return call_price(contract, quote, adjusted_volatility(model));
}

inline double put_price(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model) {
    return put_price(contract, quote, adjusted_volatility(model));
}

/// Dispatches on contract.kind.
inline double price(const OptionContract& contract, const MarketQuote& quote, const FrictionModel& model) {
    return contract.kind == OptionKind::Call ? call_price(contract, quote, model) : put_price(contract, quote, model);
}

/// Garman-Kohlhagen call with the raw volatility.
inline double garman_kohlhagen_call(const OptionContract& contract, const MarketQuote& quote, double sigma) {
    return call_price(contract, quote, FrictionModel::garman_kohlhagen(sigma));
}

/// Right-hand side of put-call parity, S e^{-r_f tau} - K e^{-r_d tau}.
inline double parity_forward_value(const OptionContract& contract, const MarketQuote& quote) {
    const auto disc = detail::discounted(contract, quote, time_to_expiry(contract, quote));
    return disc.spot - disc.strike;
}

}  // namespace tfbs
