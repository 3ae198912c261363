// Writes a synthetic `date,rate` series whose daily log returns are fractional
// Gaussian noise with Hurst exponent H, scaled to an annualized volatility
// sigma:  ln(q_{i+1}/q_i) = sigma / sqrt(frequency) * X_i,  X ~ unit fGn.
//
//   make_rate_fixture --hurst 0.7 --sigma 0.10 --returns 16384 --seed 7 > fixture.csv

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>

#include "tfbs/estimation.hpp"
#include "tfbs/fbm.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic fGn exchange-rate fixture", "make_rate_fixture"};
    double hurst = 0.7;
    double sigma = 0.10;
    double frequency = 252.0;
    double start_rate = 1.3;
    std::size_t returns = 16384;
    std::uint64_t seed = 7;
    app.add_option("--hurst", hurst)->capture_default_str();
    app.add_option("--sigma", sigma)->capture_default_str();
    app.add_option("--frequency", frequency)->capture_default_str();
    app.add_option("--start-rate", start_rate)->capture_default_str();
    app.add_option("--returns", returns)->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const tfbs::FbmSampler sampler({returns, 1.0, hurst}, tfbs::FbmMethod::Hosking);
    const std::vector<double> noise = sampler.increments(seed);
    const double scale = sigma / std::sqrt(frequency);

    using namespace std::chrono;
    sys_days day{year{2000} / January / 3};
    double log_rate = std::log(start_rate);
    std::cout.precision(17);
    std::cout << "date,rate\n" << tfbs::format_iso_date(day) << ',' << start_rate << '\n';
    for (double x : noise) {
        day += days{1};
        log_rate += scale * x;
        std::cout << tfbs::format_iso_date(day) << ',' << std::exp(log_rate) << '\n';
    }
    return 0;
}
