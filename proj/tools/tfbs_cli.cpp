// tfbs: command-line front end for pricing, Greeks, sweeps, model comparison,
// estimation and hedging experiments.
//
// Exit codes: 0 success, 2 invalid input or usage, 3 resource cap exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tfbs/tfbs.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitResource = 3;

struct GlobalArgs {
    std::uint64_t seed = 20120401;
    std::string out;
    std::string format;
};

struct MarketArgs {
    double spot = std::numeric_limits<double>::quiet_NaN();
    double strike = 1.235;
    double maturity = 0.2465;
    double time = 0.1;
    double rd = 0.0456;
    double rf = 0.0371;
    double sigma = 0.1051;
    double hurst = 0.6103;
    double step = 0.01;
    double cost = 0.01;

    tfbs::OptionContract contract() const { return {strike, maturity, tfbs::OptionKind::Call}; }
    tfbs::MarketQuote quote() const { return {spot, time, rd, rf}; }
    tfbs::FrictionModel model() const { return {sigma, hurst, step, cost}; }
};

void add_market_options(CLI::App* cmd, MarketArgs& m, bool spot_required) {
    auto* spot = cmd->add_option("--spot", m.spot, "Spot exchange rate S_t");
    if (spot_required) spot->required();
    cmd->add_option("--strike", m.strike, "Strike K")->capture_default_str();
    cmd->add_option("--maturity", m.maturity, "Maturity T in years")->capture_default_str();
    cmd->add_option("--time", m.time, "Valuation time t in years")->capture_default_str();
    cmd->add_option("--rd", m.rd, "Domestic rate r_d")->capture_default_str();
    cmd->add_option("--rf", m.rf, "Foreign rate r_f")->capture_default_str();
    cmd->add_option("--sigma", m.sigma, "Volatility sigma")->capture_default_str();
    cmd->add_option("--hurst", m.hurst, "Hurst exponent H in [0.5, 1)")->capture_default_str();
    cmd->add_option("--step", m.step, "Rebalancing interval delta t in years")->capture_default_str();
    cmd->add_option("--cost", m.cost, "Proportional transaction cost rate alpha")->capture_default_str();
}

tfbs::Range parse_range(const std::string& text) {
    // lo:hi:n or a single value
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw tfbs::InvalidArgument("malformed range '" + text + "'");
        return v;
    };
    if (parts.size() == 1) {
        const double v = number(parts[0]);
        return {v, v, 1};
    }
    if (parts.size() != 3) throw tfbs::InvalidArgument("range must be lo:hi:n, got '" + text + "'");
    const double count = number(parts[2]);
    if (count < 1.0 || count != std::floor(count)) throw tfbs::InvalidArgument("range count must be a positive integer");
    tfbs::Range r{number(parts[0]), number(parts[1]), static_cast<std::size_t>(count)};
    r.validate();
    return r;
}

std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Tabular output: JSON (object for one row, array otherwise) or CSV with a fixed header.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    ordered_json row_json(const std::vector<double>& row) const {
        ordered_json obj = ordered_json::object();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (std::isnan(row[c]))
                obj[columns[c]] = nullptr;
            else
                obj[columns[c]] = row[c];
        }
        return obj;
    }

    void write_csv(std::ostream& os) const {
        for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_number(row[c]);
            os << '\n';
        }
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw tfbs::InvalidArgument("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string resolve_format(const GlobalArgs& g, const char* fallback) {
    const std::string f = g.format.empty() ? fallback : g.format;
    if (f != "json" && f != "csv") throw tfbs::InvalidArgument("format must be json or csv");
    return f;
}

void emit(const GlobalArgs& g, const Table& table, const char* default_format, bool single_object) {
    Output out(g.out);
    if (resolve_format(g, default_format) == "csv") {
        table.write_csv(out.stream());
        return;
    }
    if (single_object && table.rows.size() == 1) {
        out.stream() << table.row_json(table.rows.front()).dump(2) << '\n';
        return;
    }
    ordered_json arr = ordered_json::array();
    for (const auto& row : table.rows) arr.push_back(table.row_json(row));
    out.stream() << arr.dump(2) << '\n';
}

int cmd_price(const GlobalArgs& g, const MarketArgs& m) {
    const auto contract = m.contract();
    const auto quote = m.quote();
    const auto model = m.model();
    const auto vol = tfbs::adjusted_volatility(model);
    Table t{{"call", "put", "sigma_hat", "leland_number"},
            {{tfbs::call_price(contract, quote, model), tfbs::put_price(contract, quote, model), vol.value,
              vol.leland_number}}};
    emit(g, t, "json", true);
    return kExitOk;
}

int cmd_greeks(const GlobalArgs& g, const MarketArgs& m, bool check) {
    const auto contract = m.contract();
    const auto quote = m.quote();
    const auto model = m.model();
    const auto gr = tfbs::greeks(contract, quote, model);
    const auto sens = tfbs::parameter_sensitivities(contract, quote, model);

    struct Entry {
        const char* name;
        double analytic;
        tfbs::PricingParameter parameter;
        bool second_order;
    };
    const std::vector<Entry> entries{
        {"delta", gr.delta, tfbs::PricingParameter::Spot, false},
        {"strike_delta", gr.strike_delta, tfbs::PricingParameter::Strike, false},
        {"rho_domestic", gr.rho_domestic, tfbs::PricingParameter::RateDomestic, false},
        {"rho_foreign", gr.rho_foreign, tfbs::PricingParameter::RateForeign, false},
        {"theta", gr.theta, tfbs::PricingParameter::Time, false},
        {"gamma", gr.gamma, tfbs::PricingParameter::Spot, true},
        {"vega_hat", gr.vega_hat, tfbs::PricingParameter::SigmaHat, false},
        {"dC_dH", sens.dC_dH, tfbs::PricingParameter::Hurst, false},
        {"dC_dstep", sens.dC_dstep, tfbs::PricingParameter::Step, false},
        {"dC_dcost", sens.dC_dcost, tfbs::PricingParameter::Cost, false},
    };
    const tfbs::PricingInputs inputs{contract, quote, model};
    auto oracle = [&](const Entry& e) {
        try {
            return e.second_order ? tfbs::second_finite_difference(inputs, e.parameter)
                                  : tfbs::finite_difference(inputs, e.parameter);
        } catch (const tfbs::InvalidArgument&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    Output out(g.out);
    if (resolve_format(g, "json") == "csv") {
        out.stream() << (check ? "greek,analytic,finite_difference,rel_error\n" : "greek,analytic\n");
        for (const Entry& e : entries) {
            out.stream() << e.name << ',' << csv_number(e.analytic);
            if (check) {
                const double fd = oracle(e);
                out.stream() << ',' << csv_number(fd) << ',' << csv_number(std::abs(fd - e.analytic) / std::abs(e.analytic));
            }
            out.stream() << '\n';
        }
        return kExitOk;
    }
    ordered_json j = ordered_json::object();
    for (const Entry& e : entries) j[e.name] = e.analytic;
    if (check) {
        ordered_json c = ordered_json::object();
        for (const Entry& e : entries) {
            const double fd = oracle(e);
            ordered_json item = {{"analytic", e.analytic}};
            if (std::isnan(fd)) {
                item["finite_difference"] = nullptr;
                item["rel_error"] = nullptr;
            } else {
                item["finite_difference"] = fd;
                item["rel_error"] = std::abs(fd - e.analytic) / std::abs(e.analytic);
            }
            c[e.name] = item;
        }
        j["check"] = c;
    }
    out.stream() << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_sweep(const GlobalArgs& g, const MarketArgs& m, const std::string& hurst_range,
              const std::string& step_range, const std::string& cost_range) {
    tfbs::SweepSettings s;
    s.contract = m.contract();
    s.quote = m.quote();
    s.sigma = m.sigma;
    s.hurst = hurst_range.empty() ? tfbs::Range{m.hurst, m.hurst, 1} : parse_range(hurst_range);
    s.step = step_range.empty() ? tfbs::Range{m.step, m.step, 1} : parse_range(step_range);
    s.cost = cost_range.empty() ? tfbs::Range{m.cost, m.cost, 1} : parse_range(cost_range);
    Table t{{"hurst", "step", "cost", "sigma_hat", "leland_number", "price", "dC_dH", "dC_dstep", "dC_dcost",
             "fd_dC_dH", "fd_dC_dstep", "fd_dC_dcost"},
            {}};
    for (const auto& r : tfbs::sweep(s))
        t.rows.push_back({r.hurst, r.step, r.cost, r.sigma_hat, r.leland_number, r.price, r.dC_dH, r.dC_dstep,
                          r.dC_dcost, r.fd_dC_dH, r.fd_dC_dstep, r.fd_dC_dcost});
    emit(g, t, "csv", false);
    return kExitOk;
}

int cmd_compare(const GlobalArgs& g, const MarketArgs& m, const std::string& moneyness,
                const std::string& maturities, const std::string& strikes, const std::string& variant) {
    tfbs::CompareSettings s;
    s.quote = m.quote();
    s.model = m.model();
    if (moneyness == "itm")
        s.strikes = {1.2, 1.49, 30};
    else if (moneyness == "otm")
        s.strikes = {1.52, 1.8, 30};
    else
        throw tfbs::InvalidArgument("moneyness must be itm or otm");
    if (!maturities.empty()) s.maturities = parse_range(maturities);
    if (!strikes.empty()) s.strikes = parse_range(strikes);
    if (variant == "rebalanced")
        s.fbs_variant = tfbs::FbsVariant::Rebalanced;
    else if (variant == "classical")
        s.fbs_variant = tfbs::FbsVariant::Classical;
    else
        throw tfbs::InvalidArgument("fbs variant must be rebalanced or classical");

    const tfbs::ComparisonGrid grid = tfbs::compare_models(s);
    Table t{{"maturity", "strike", "gk", "fbs", "tfbs", "rel_fbs_gk", "rel_tfbs_gk", "tfbs_closer"}, {}};
    for (const auto& c : grid.cells)
        t.rows.push_back({c.maturity, c.strike, c.gk, c.fbs, c.tfbs, c.rel_fbs_gk, c.rel_tfbs_gk,
                          c.tfbs_closer ? 1.0 : 0.0});

    Output out(g.out);
    if (resolve_format(g, "csv") == "csv") {
        t.write_csv(out.stream());
        std::cerr << "tfbs_closer_fraction=" << csv_number(grid.tfbs_closer_fraction) << " cells=" << grid.cells.size()
                  << '\n';
        return kExitOk;
    }
    ordered_json cells = ordered_json::array();
    for (const auto& row : t.rows) {
        ordered_json obj = t.row_json(row);
        obj["tfbs_closer"] = row.back() != 0.0;
        cells.push_back(obj);
    }
    ordered_json j = {{"n_cells", grid.cells.size()},
                      {"tfbs_closer_fraction", grid.tfbs_closer_fraction},
                      {"cells", cells}};
    out.stream() << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_estimate(const GlobalArgs& g, const std::string& path, double frequency, const tfbs::RsOptions& rs) {
    std::ifstream in(path);
    if (!in) throw tfbs::InvalidArgument("cannot open rate file '" + path + "'");
    const tfbs::RateSeries series = tfbs::read_rate_csv(in, frequency);
    const std::vector<double> returns = tfbs::log_returns(series);
    const tfbs::VolEstimate vol = tfbs::historical_volatility(returns, series.frequency);

    ordered_json j;
    j["volatility"] = {{"per_step", vol.per_step}, {"annualized", vol.annualized}, {"n_used", vol.n_used}};
    int code = kExitOk;
    try {
        const tfbs::HurstEstimate h = tfbs::rs_hurst(returns, rs);
        ordered_json points = ordered_json::array();
        for (const auto& p : h.points)
            points.push_back(
                {{"window", p.window}, {"blocks", p.blocks}, {"log_window", p.log_window}, {"log_rs", p.log_rs}});
        j["hurst"] = {{"value", h.value},          {"slope", h.slope},
                      {"slope_stderr", h.slope_stderr}, {"clamped", h.clamped},
                      {"skipped_blocks", h.skipped_blocks}, {"points", points}};
        j["hurst_error"] = nullptr;
        if (h.clamped) std::cerr << "warning: Hurst slope " << h.slope << " clamped to " << h.value << '\n';
    } catch (const tfbs::InvalidArgument& e) {
        j["hurst"] = nullptr;
        j["hurst_error"] = e.what();
        std::cerr << "error: " << e.what() << '\n';
        code = kExitInvalid;
    }
    if (resolve_format(g, "json") != "json") throw tfbs::InvalidArgument("estimate only writes json");
    Output out(g.out);
    out.stream() << j.dump(2) << '\n';
    return code;
}

struct HedgeArgs {
    std::size_t paths = 10000;
    std::string premium = "tfbs";
    std::string delta = "tfbs";
    std::optional<double> rebalance;
    std::optional<double> hedge_cost;
    std::size_t substeps = 0;
    double max_work = 5e8;
    unsigned threads = 0;
    std::string ledger_dir;
    std::size_t ledger_paths = 1;
};

int cmd_hedge(const GlobalArgs& g, const MarketArgs& m, const HedgeArgs& h) {
    tfbs::HedgePolicy policy;
    policy.rebalance_step = h.rebalance.value_or(m.step);
    policy.cost_rate = h.hedge_cost.value_or(m.cost);
    if (h.premium == "tfbs")
        policy.premium_source = tfbs::PremiumSource::Tfbs;
    else if (h.premium == "fbs")
        policy.premium_source = tfbs::PremiumSource::Frictionless;
    else if (h.premium == "gk")
        policy.premium_source = tfbs::PremiumSource::GarmanKohlhagen;
    else
        throw tfbs::InvalidArgument("premium must be tfbs, fbs or gk");
    if (h.delta == "tfbs")
        policy.delta_source = tfbs::DeltaSource::Tfbs;
    else if (h.delta == "gk")
        policy.delta_source = tfbs::DeltaSource::GarmanKohlhagen;
    else
        throw tfbs::InvalidArgument("delta must be tfbs or gk");

    tfbs::ExperimentConfig cfg{h.paths, g.seed, h.substeps, h.max_work, h.threads};
    const auto summary = tfbs::hedge_experiment(m.contract(), m.quote(), m.model(), policy, cfg);

    if (!h.ledger_dir.empty()) {
        std::filesystem::create_directories(h.ledger_dir);
        const tfbs::HedgeSimulation sim(m.contract(), m.quote(), m.model(), policy, h.substeps);
        for (std::size_t i = 0; i < std::min(h.ledger_paths, h.paths); ++i) {
            const auto file = std::filesystem::path(h.ledger_dir) / ("ledger_" + std::to_string(i) + ".csv");
            std::ofstream os(file);
            if (!os) throw tfbs::InvalidArgument("cannot write ledger file '" + file.string() + "'");
            tfbs::write_ledger_csv(os, sim.run(g.seed + i).ledger);
        }
    }

    Table t{{"mean_error", "sd_error", "se_error", "mean_cost", "n_paths", "seed"},
            {{summary.mean_error, summary.sd_error, summary.se_error, summary.mean_cost,
              static_cast<double>(summary.n_paths), static_cast<double>(summary.seed)}}};
    if (resolve_format(g, "json") == "csv") {
        emit(g, t, "json", true);
        return kExitOk;
    }
    ordered_json j = {{"mean_error", summary.mean_error}, {"sd_error", summary.sd_error},
                      {"se_error", summary.se_error},     {"mean_cost", summary.mean_cost},
                      {"n_paths", summary.n_paths},       {"seed", summary.seed}};
    Output out(g.out);
    out.stream() << j.dump(2) << '\n';
    return kExitOk;
}

struct SimulateArgs {
    std::size_t steps = 252;
    double dt = 1.0 / 252.0;
    std::string method = "cholesky";
};

int cmd_simulate(const GlobalArgs& g, const MarketArgs& m, const SimulateArgs& s) {
    tfbs::FbmMethod method = tfbs::FbmMethod::Cholesky;
    if (s.method == "hosking")
        method = tfbs::FbmMethod::Hosking;
    else if (s.method != "cholesky")
        throw tfbs::InvalidArgument("method must be cholesky or hosking");
    const tfbs::FbmPath fbm = tfbs::sample_fbm({s.steps, s.dt, m.hurst}, g.seed, method);
    const tfbs::SpotPath path = tfbs::sample_spot_path(fbm, m.spot, m.rd, m.rf, m.sigma, m.time);
    if (resolve_format(g, "csv") != "csv") throw tfbs::InvalidArgument("simulate only writes csv");
    Output out(g.out);
    tfbs::write_path_csv(out.stream(), path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Currency option pricing under the fractional Black-Scholes model with transaction costs", "tfbs"};
    app.require_subcommand(1);
    GlobalArgs global;
    app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
    app.add_option("--out", global.out, "Write output to this file instead of stdout");
    app.add_option("--format", global.format, "Output format (json or csv)")
        ->check(CLI::IsMember({"json", "csv"}));

    MarketArgs price_args;
    auto* price = app.add_subcommand("price", "Call and put prices with sigma_hat and Le(H)")->fallthrough();
    add_market_options(price, price_args, true);

    MarketArgs greeks_args;
    bool check = false;
    auto* greeks = app.add_subcommand("greeks", "Analytic Greeks and parameter sensitivities")->fallthrough();
    add_market_options(greeks, greeks_args, true);
    greeks->add_flag("--check", check, "Compare against central finite differences");

    MarketArgs sweep_args;
    std::string hurst_range;
    std::string step_range;
    std::string cost_range;
    auto* sweep = app.add_subcommand("sweep", "Price and sensitivities over (H, step, cost) ranges")->fallthrough();
    add_market_options(sweep, sweep_args, true);
    sweep->add_option("--hurst-range", hurst_range, "lo:hi:n");
    sweep->add_option("--step-range", step_range, "lo:hi:n");
    sweep->add_option("--cost-range", cost_range, "lo:hi:n");

    MarketArgs compare_args;
    compare_args.spot = 1.512;
    compare_args.time = 0.1;
    compare_args.rd = 0.0321;
    compare_args.rf = 0.0252;
    compare_args.sigma = 0.11;
    compare_args.hurst = 0.6;
    compare_args.step = 0.01;
    compare_args.cost = 0.1;
    std::string moneyness = "itm";
    std::string maturities;
    std::string strikes;
    std::string variant = "rebalanced";
    auto* compare = app.add_subcommand("compare", "G-K / FBS / TFBS price grid over maturity and strike")->fallthrough();
    add_market_options(compare, compare_args, false);
    compare->add_option("--moneyness", moneyness, "itm (K in [1.2,1.49]) or otm (K in [1.52,1.8])")
        ->capture_default_str();
    compare->add_option("--maturities", maturities, "lo:hi:n (default 0.11:0.5:40)");
    compare->add_option("--strikes", strikes, "lo:hi:n (overrides --moneyness)");
    compare->add_option("--fbs-variant", variant, "rebalanced or classical")->capture_default_str();

    std::string rate_file;
    double frequency = 252.0;
    tfbs::RsOptions rs;
    auto* estimate = app.add_subcommand("estimate", "Historical volatility and R/S Hurst estimate")->fallthrough();
    estimate->add_option("file", rate_file, "CSV with header date,rate")->required();
    estimate->add_option("--frequency", frequency, "Observations per year")->capture_default_str();
    estimate->add_option("--min-window", rs.min_window, "Smallest R/S window")->capture_default_str();
    estimate->add_option("--max-window", rs.max_window, "Largest R/S window (0 = N/4)")->capture_default_str();
    estimate->add_flag("--anis-lloyd", rs.anis_lloyd, "Apply the Anis-Lloyd small-sample correction");

    MarketArgs hedge_args;
    HedgeArgs hedge_opts;
    auto* hedge = app.add_subcommand("hedge", "Monte Carlo delta-hedging experiment")->fallthrough();
    add_market_options(hedge, hedge_args, true);
    hedge->add_option("--paths", hedge_opts.paths, "Number of simulated paths")->capture_default_str();
    hedge->add_option("--premium", hedge_opts.premium, "Funding premium: tfbs, fbs or gk")->capture_default_str();
    hedge->add_option("--delta", hedge_opts.delta, "Hedge ratio model: tfbs or gk")->capture_default_str();
    hedge->add_option("--rebalance", hedge_opts.rebalance, "Rebalance interval (default --step)");
    hedge->add_option("--hedge-cost", hedge_opts.hedge_cost, "Cost rate actually paid (default --cost)");
    hedge->add_option("--substeps", hedge_opts.substeps, "Grid steps per rebalance (0 = auto)")->capture_default_str();
    hedge->add_option("--max-work", hedge_opts.max_work, "Cap on steps x paths")->capture_default_str();
    hedge->add_option("--threads", hedge_opts.threads, "Worker threads (0 = all cores)")->capture_default_str();
    hedge->add_option("--ledger-dir", hedge_opts.ledger_dir, "Write per-path ledger CSVs here");
    hedge->add_option("--ledger-paths", hedge_opts.ledger_paths, "Number of ledgers to write")->capture_default_str();

    MarketArgs sim_args;
    sim_args.spot = 1.0;
    SimulateArgs sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Dump one fBm spot path as CSV (t,bh,spot)")->fallthrough();
    add_market_options(simulate, sim_args, false);
    simulate->add_option("--steps", sim_opts.steps, "Number of grid steps")->capture_default_str();
    simulate->add_option("--dt", sim_opts.dt, "Grid step in years")->capture_default_str();
    simulate->add_option("--method", sim_opts.method, "cholesky or hosking")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitInvalid;
    }

    try {
        if (*price) return cmd_price(global, price_args);
        if (*greeks) return cmd_greeks(global, greeks_args, check);
        if (*sweep) return cmd_sweep(global, sweep_args, hurst_range, step_range, cost_range);
        if (*compare) return cmd_compare(global, compare_args, moneyness, maturities, strikes, variant);
        if (*estimate) return cmd_estimate(global, rate_file, frequency, rs);
        if (*hedge) return cmd_hedge(global, hedge_args, hedge_opts);
        if (*simulate) return cmd_simulate(global, sim_args, sim_opts);
    } catch (const tfbs::ResourceLimit& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitResource;
    } catch (const tfbs::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const tfbs::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}
