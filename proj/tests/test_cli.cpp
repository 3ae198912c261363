#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "tfbs/greeks.hpp"
#include "tfbs/hedging.hpp"

namespace tfbs {
namespace {

using nlohmann::json;

const std::string kCli = TFBS_CLI_PATH;
const std::string kDataDir = TFBS_TEST_DATA_DIR;

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / ("tfbs_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run(const std::string& args) {
    const auto err_file = scratch_dir() / "stderr.txt";
    const std::string cmd = "'" + kCli + "' " + args + " 2>'" + err_file.string() + "'";
    CliRun r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_file);
    return r;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n' ? 1 : 0;
    return n;
}

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    for (const char* sub : {"price", "greeks", "sweep", "compare", "estimate", "hedge", "simulate"}) {
        const CliRun r = run(std::string(sub) + " --help");
        EXPECT_EQ(r.code, 0) << sub;
        EXPECT_NE(r.out.find("Usage"), std::string::npos) << sub;
    }
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("bogus").code, 2);
    EXPECT_EQ(run("price").code, 2);  // --spot is required
    EXPECT_EQ(run("price --spot 1.25 --frobnicate 1").code, 2);
    EXPECT_EQ(run("price --spot 1.25 --format xml").code, 2);
}

TEST(Cli, PriceMatchesLibrary) {
    const CliRun r = run("price --spot 1.25");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    const auto in = testing::reference_inputs();
    EXPECT_EQ(j.at("call").get<double>(), call_price(in.contract, in.quote, in.model));
    EXPECT_EQ(j.at("sigma_hat").get<double>(), adjusted_volatility(in.model).value);
    EXPECT_NEAR(j.at("leland_number").get<double>(), 0.45681183336829437, 1e-14);
    const double tau = in.contract.maturity - in.quote.time;
    EXPECT_NEAR(j.at("call").get<double>() - j.at("put").get<double>(),
                1.25 * std::exp(-in.quote.rate_foreign * tau) - in.contract.strike * std::exp(-in.quote.rate_domestic * tau),
                1e-12);
}

TEST(Cli, PriceRejectsInvalidInput) {
    EXPECT_EQ(run("price --spot -1").code, 2);
    EXPECT_EQ(run("price --spot 1.25 --hurst 0.3").code, 2);
    EXPECT_EQ(run("price --spot 1.25 --time 0.5").code, 2);
    const CliRun r = run("price --spot 1.25 --sigma 0 ");
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, GreeksWithFiniteDifferenceCheck) {
    const CliRun r = run("greeks --spot 1.25 --check");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    for (const char* key : {"delta", "strike_delta", "rho_domestic", "rho_foreign", "theta", "gamma", "vega_hat",
                            "dC_dH", "dC_dstep", "dC_dcost"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_LT(j.at("rho_foreign").get<double>(), 0.0);
    for (const auto& [name, entry] : j.at("check").items()) {
        const double tol = name == "gamma" ? 1e-4 : 1e-6;
        EXPECT_LT(entry.at("rel_error").get<double>(), tol) << name;
    }
    const CliRun csv = run("--format csv greeks --spot 1.25");
    ASSERT_EQ(csv.code, 0);
    EXPECT_EQ(first_line(csv.out), "greek,analytic");
    EXPECT_EQ(line_count(csv.out), 11u);
    const CliRun checked = run("--format csv greeks --spot 1.25 --check");
    EXPECT_EQ(first_line(checked.out), "greek,analytic,finite_difference,rel_error");
}

TEST(Cli, SweepCsv) {
    const CliRun r = run("sweep --spot 1.25 --step-range 0.002:0.05:50");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(r.out),
              "hurst,step,cost,sigma_hat,leland_number,price,dC_dH,dC_dstep,dC_dcost,fd_dC_dH,fd_dC_dstep,"
              "fd_dC_dcost");
    EXPECT_EQ(line_count(r.out), 51u);
    EXPECT_EQ(run("sweep --spot 1.25 --step-range 0.05:0.002:3").code, 2);
    EXPECT_EQ(run("sweep --spot 1.25 --step-range nonsense").code, 2);
}

TEST(Cli, CompareIsDeterministic) {
    const CliRun a = run("compare");
    const CliRun b = run("compare");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(first_line(a.out), "maturity,strike,gk,fbs,tfbs,rel_fbs_gk,rel_tfbs_gk,tfbs_closer");
    EXPECT_EQ(line_count(a.out), 1201u);
    EXPECT_NE(a.err.find("tfbs_closer_fraction="), std::string::npos);
    EXPECT_NE(a.err.find("cells=1200"), std::string::npos);

    const CliRun j = run("--format json compare --moneyness otm --maturities 0.2:0.5:4 --strikes 1.52:1.8:5");
    ASSERT_EQ(j.code, 0) << j.err;
    const json grid = json::parse(j.out);
    EXPECT_EQ(grid.at("n_cells").get<int>(), 20);
    EXPECT_EQ(grid.at("cells").size(), 20u);
    EXPECT_TRUE(grid.at("cells")[0].at("tfbs_closer").is_boolean());
    EXPECT_EQ(run("compare --moneyness sideways").code, 2);
    EXPECT_EQ(run("compare --fbs-variant classical").code, 0);
}

TEST(Cli, EstimateOnFixture) {
    const CliRun r = run("estimate '" + kDataDir + "/synthetic_fgn_h07.csv'");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j.at("volatility").at("annualized").get<double>(), 0.10, 0.01);
    EXPECT_EQ(j.at("volatility").at("n_used").get<int>(), 16384);
    EXPECT_NEAR(j.at("hurst").at("value").get<double>(), 0.7, 0.07);
    EXPECT_FALSE(j.at("hurst").at("clamped").get<bool>());
    EXPECT_TRUE(j.at("hurst_error").is_null());
}

TEST(Cli, EstimateRefusalsAndParseErrors) {
    const CliRun flat = run("estimate '" + kDataDir + "/constant.csv'");
    EXPECT_EQ(flat.code, 2);
    const json j = json::parse(flat.out);
    EXPECT_EQ(j.at("volatility").at("per_step").get<double>(), 0.0);
    EXPECT_TRUE(j.at("hurst").is_null());
    EXPECT_FALSE(j.at("hurst_error").is_null());

    const auto bad = scratch_dir() / "bad.csv";
    std::ofstream(bad) << "date,rate\n2012-04-02,1.3\n2012-04-01,1.4\n";
    const CliRun parse = run("estimate '" + bad.string() + "'");
    EXPECT_EQ(parse.code, 2);
    EXPECT_NE(parse.err.find("line 3"), std::string::npos) << parse.err;
    EXPECT_EQ(run("estimate /nonexistent/rates.csv").code, 2);
    EXPECT_EQ(run("estimate '" + kDataDir + "/two_rows.csv'").code, 2);
}

TEST(Cli, HedgeSinglePathMatchesLibrary) {
    const CliRun r = run("--seed 777 hedge --spot 1.25 --paths 1");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    const auto in = testing::reference_inputs();
    const HedgePolicy policy{testing::kStep, testing::kCost};
    const HedgeSimulation sim(in.contract, in.quote, in.model, policy);
    const HedgeResult direct = simulate_hedge(sim.path(777), in.contract, in.model, policy);
    EXPECT_EQ(j.at("mean_error").get<double>(), direct.terminal_error);
    EXPECT_EQ(j.at("mean_cost").get<double>(), direct.total_costs);
    EXPECT_EQ(j.at("n_paths").get<int>(), 1);
    EXPECT_EQ(j.at("seed").get<int>(), 777);
}

TEST(Cli, HedgeDeterminismCapsAndLedgers) {
    const CliRun a = run("--seed 5 hedge --spot 1.25 --paths 200");
    const CliRun b = run("--seed 5 hedge --spot 1.25 --paths 200 --threads 3");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const json j = json::parse(a.out);
    for (const char* key : {"mean_error", "sd_error", "se_error", "mean_cost", "n_paths", "seed"})
        EXPECT_TRUE(j.contains(key)) << key;

    EXPECT_EQ(run("hedge --spot 1.25 --paths 100000 --max-work 1e6").code, 3);
    EXPECT_EQ(run("hedge --spot 1.25 --paths 10 --premium free").code, 2);
    EXPECT_EQ(run("hedge --spot 1.25 --paths 10 --rebalance 0.0123456789").code, 2);

    const auto dir = scratch_dir() / "ledgers";
    const auto out = scratch_dir() / "summary.json";
    const CliRun l = run("--out '" + out.string() + "' hedge --spot 1.25 --paths 3 --ledger-dir '" + dir.string() +
                      "' --ledger-paths 2");
    ASSERT_EQ(l.code, 0) << l.err;
    EXPECT_TRUE(l.out.empty());
    EXPECT_EQ(json::parse(slurp(out)).at("n_paths").get<int>(), 3);
    EXPECT_EQ(first_line(slurp(dir / "ledger_0.csv")), "time,spot,psi,phi,cost,portfolio");
    EXPECT_TRUE(std::filesystem::exists(dir / "ledger_1.csv"));
    EXPECT_FALSE(std::filesystem::exists(dir / "ledger_2.csv"));
}

TEST(Cli, SimulateCsv) {
    const CliRun a = run("--seed 3 simulate --spot 1.25 --steps 10 --dt 0.01");
    const CliRun b = run("--seed 3 simulate --spot 1.25 --steps 10 --dt 0.01");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(first_line(a.out), "t,bh,spot");
    EXPECT_EQ(line_count(a.out), 12u);
    EXPECT_EQ(run("simulate --steps 9000 --dt 0.01 --method cholesky").code, 3);
}

}  // namespace
}  // namespace tfbs
