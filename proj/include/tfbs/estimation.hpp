#pragma once

// Historical volatility and rescaled-range (R/S) Hurst estimation from
// exchange-rate series.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfbs/errors.hpp"

namespace tfbs {

struct RateSeries {
    std::vector<std::chrono::sys_days> dates;
    std::vector<double> rates;
    double frequency = 252.0;  // observations per year

    void validate() const {
        detail::require(dates.size() == rates.size(), "dates and rates differ in length");
        detail::require(std::isfinite(frequency) && frequency > 0.0, "frequency must be positive");
        for (double q : rates) detail::require(std::isfinite(q) && q > 0.0, "rates must be positive and finite");
        for (std::size_t i = 1; i < dates.size(); ++i)
            detail::require(dates[i - 1] < dates[i], "dates must be strictly increasing");
    }
};

struct VolEstimate {
    double per_step = 0.0;
    double annualized = 0.0;
    std::size_t n_used = 0;  // number of log returns
};

struct RsPoint {
    std::size_t window = 0;
    std::size_t blocks = 0;  // blocks contributing to the average
    double log_window = 0.0;
    double log_rs = 0.0;
};

struct HurstEstimate {
    double value = 0.0;         // fitted slope, clamped into [kHurstFloor, kHurstCeiling]
    double slope = 0.0;         // unclamped least-squares slope
    double slope_stderr = 0.0;
    bool clamped = false;
    std::size_t skipped_blocks = 0;  // zero-variance blocks left out
    std::vector<RsPoint> points;
};

struct RsOptions {
    std::size_t min_window = 8;
    std::size_t max_window = 0;  // 0 means N/4
    bool anis_lloyd = false;     // subtract the i.i.d. expectation of R/S before fitting
};

inline constexpr double kHurstFloor = 0.01;
inline constexpr double kHurstCeiling = 0.99;
inline constexpr std::size_t kMinHurstSamples = 64;

/// Parses YYYY-MM-DD.
inline std::optional<std::chrono::sys_days> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse = [](std::string_view s, auto& out) {
        if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size();
    };
    if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d))
        return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

inline std::string format_iso_date(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Reads a `date,rate` CSV. Blank lines are ignored; every other problem is a
/// ParseError carrying the 1-based line number.
inline RateSeries read_rate_csv(std::istream& in, double frequency = 252.0) {
    RateSeries series;
    series.frequency = frequency;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = detail::trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
            throw ParseError(line_no, "expected exactly two comma-separated fields");
        const std::string_view first = detail::trim(row.substr(0, comma));
        const std::string_view second = detail::trim(row.substr(comma + 1));
        if (!header_seen) {
            if (first != "date" || second != "rate") throw ParseError(line_no, "header must be 'date,rate'");
            header_seen = true;
            continue;
        }
        const auto date = parse_iso_date(first);
        if (!date) throw ParseError(line_no, "invalid ISO-8601 date '" + std::string(first) + "'");
        double rate = 0.0;
        const auto [ptr, ec] = std::from_chars(second.data(), second.data() + second.size(), rate);
        if (ec != std::errc() || ptr != second.data() + second.size())
            throw ParseError(line_no, "invalid rate '" + std::string(second) + "'");
        if (!std::isfinite(rate) || rate <= 0.0) throw ParseError(line_no, "rate must be positive");
        if (!series.dates.empty()) {
            if (*date == series.dates.back()) throw ParseError(line_no, "duplicate date " + std::string(first));
            if (*date < series.dates.back()) throw ParseError(line_no, "dates out of order at " + std::string(first));
        }
        series.dates.push_back(*date);
        series.rates.push_back(rate);
    }
    if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing 'date,rate' header");
    return series;
}

/// L_i = ln(q_{i+1} / q_i).
inline std::vector<double> log_returns(std::span<const double> rates) {
    detail::require(rates.size() >= 2, "log returns need at least two observations");
    for (double q : rates) detail::require(std::isfinite(q) && q > 0.0, "rates must be positive and finite");
    std::vector<double> out(rates.size() - 1);
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) out[i] = std::log(rates[i + 1] / rates[i]);
    return out;
}

inline std::vector<double> log_returns(const RateSeries& series) {
    series.validate();
    return log_returns(std::span<const double>(series.rates));
}

/// Sample standard deviation of the log returns (divisor N - 1, N = number of
/// returns), annualized by sqrt(frequency).
inline VolEstimate historical_volatility(std::span<const double> returns, double frequency = 252.0) {
    detail::require(returns.size() >= 2, "historical volatility needs at least two returns");
    detail::require(std::isfinite(frequency) && frequency > 0.0, "frequency must be positive");
    const double n = static_cast<double>(returns.size());
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    VolEstimate v;
    v.per_step = std::sqrt(ss / (n - 1.0));
    v.annualized = v.per_step * std::sqrt(frequency);
    v.n_used = returns.size();
    return v;
}

inline VolEstimate historical_volatility(const RateSeries& series) {
    const std::vector<double> r = log_returns(series);
    return historical_volatility(r, series.frequency);
}

/// Anis-Lloyd expectation of R/S for n i.i.d. Gaussian observations.
inline double expected_rs_iid(std::size_t window) {
    const double n = static_cast<double>(window);
    double sum = 0.0;
    for (std::size_t i = 1; i < window; ++i) sum += std::sqrt((n - static_cast<double>(i)) / static_cast<double>(i));
    const double gamma_ratio = std::exp(std::lgamma(0.5 * (n - 1.0)) - std::lgamma(0.5 * n));
    return (n - 0.5) / n * gamma_ratio / std::sqrt(std::numbers::pi) * sum;
}

namespace detail {

// Range of the mean-adjusted cumulative sum over the standard deviation.
// Returns nullopt for a zero-variance block.
inline std::optional<double> rescaled_range(std::span<const double> block) {
    const double n = static_cast<double>(block.size());
    const double mean = std::accumulate(block.begin(), block.end(), 0.0) / n;
    double cum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double ss = 0.0;
    for (double x : block) {
        const double dev = x - mean;
        cum += dev;
        lo = std::min(lo, cum);
        hi = std::max(hi, cum);
        ss += dev * dev;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) return std::nullopt;
    return (hi - lo) / sd;
}

}  // namespace detail

/// R/S Hurst estimate: dyadic windows from min_window to max_window (default
/// N/4), non-overlapping blocks, least-squares slope of log(R/S) on log(n).
inline HurstEstimate rs_hurst(std::span<const double> returns, const RsOptions& options = {}) {
    detail::require(returns.size() >= kMinHurstSamples, "R/S estimation needs at least 64 observations");
    for (double r : returns) detail::require(std::isfinite(r), "returns must be finite");
    detail::require(options.min_window >= 2, "minimum R/S window must be at least 2");
    const std::size_t max_window = options.max_window != 0 ? options.max_window : returns.size() / 4;
    detail::require(max_window <= returns.size(), "maximum R/S window exceeds the series length");

    HurstEstimate est;
    for (std::size_t w = options.min_window; w <= max_window; w *= 2) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t start = 0; start + w <= returns.size(); start += w) {
            const auto rs = detail::rescaled_range(returns.subspan(start, w));
            if (!rs) {
                ++est.skipped_blocks;
                continue;
            }
            sum += *rs;
            ++used;
        }
        if (used == 0) continue;
        double log_rs = std::log(sum / static_cast<double>(used));
        if (options.anis_lloyd) log_rs -= std::log(expected_rs_iid(w));
        est.points.push_back({w, used, std::log(static_cast<double>(w)), log_rs});
    }
    if (est.points.empty()) throw InvalidArgument("R/S estimation refused: zero-variance series");
    detail::require(est.points.size() >= 4 &&
                        est.points.back().window >= 8 * est.points.front().window,
                    "R/S regression needs windows spanning at least three octaves");

    const double m = static_cast<double>(est.points.size());
    double mx = 0.0;
    double my = 0.0;
    for (const RsPoint& p : est.points) {
        mx += p.log_window;
        my += p.log_rs;
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const RsPoint& p : est.points) {
        sxx += (p.log_window - mx) * (p.log_window - mx);
        sxy += (p.log_window - mx) * (p.log_rs - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double sse = 0.0;
    for (const RsPoint& p : est.points) {
        const double e = p.log_rs - intercept - slope * p.log_window;
        sse += e * e;
    }
    est.slope = options.anis_lloyd ? 0.5 + slope : slope;
    est.slope_stderr = est.points.size() > 2 ? std::sqrt(sse / (m - 2.0) / sxx) : 0.0;
    est.value = std::clamp(est.slope, kHurstFloor, kHurstCeiling);
    est.clamped = est.value != est.slope;
    return est;
}

}  // namespace tfbs
