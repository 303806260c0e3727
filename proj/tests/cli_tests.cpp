// End-to-end checks of the command-line binary: exit codes, JSON stability,
// error diagnostics, golden output. Each test shells out to the built tool.

#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pexp/sensitivity.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const std::string kCli = PEXP_CLI_PATH;
const std::string kData = PEXP_DATA_DIR;

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
    std::string command = kCli + " " + args + " 2>&1";
    std::array<char, 4096> buffer{};
    std::string output;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buffer.data(), buffer.size(), pipe)) output += buffer.data();
    int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path tmp_dir() {
    fs::path dir = fs::temp_directory_path() / "pexp_cli_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("help text exists for every subcommand and documents its flags") {
    RunResult top = run("--help");
    CHECK(top.exit_code == 0);
    for (const char* name : {"estimate", "mc", "oracle", "sensitivity", "model", "simulate"})
        CHECK(top.output.find(name) != std::string::npos);

    struct FlagCheck {
        const char* subcommand;
        std::vector<const char*> flags;
    };
    const std::vector<FlagCheck> checks = {
        {"estimate",
         {"--panel", "--prices", "--focal", "--fe", "--methods", "--cr1", "--transformed-score",
          "--seed", "--out", "--sensitivity", "--b-lower", "--b-upper", "--alpha", "--im-form",
          "--breakdown", "--null"}},
        {"mc", {"--config", "--seed", "--threads", "--out", "--reps-csv"}},
        {"oracle", {"--config", "--seed", "--out"}},
        {"sensitivity",
         {"--beta-hat", "--se", "--from-report", "--b-lower", "--b-upper", "--alpha", "--im-form",
          "--breakdown", "--null", "--out"}},
        {"model", {"--config", "--out", "--sweep-phi", "--phi-min", "--phi-max", "--steps"}},
        {"simulate", {"--config", "--out-panel", "--out-prices", "--seed"}},
    };
    for (const auto& check : checks) {
        RunResult sub = run(std::string(check.subcommand) + " --help");
        CHECK(sub.exit_code == 0);
        for (const char* flag : check.flags) {
            INFO(check.subcommand << " " << flag);
            CHECK(sub.output.find(flag) != std::string::npos);
        }
    }
}

TEST_CASE("simulate then estimate: the full pipeline round trip") {
    fs::path dir = tmp_dir();
    fs::path panel = dir / "panel.csv";
    fs::path prices = dir / "prices.csv";
    RunResult sim = run("simulate --config " + kData + "/simulate_sample.cfg --out-panel " +
                        panel.string() + " --out-prices " + prices.string() + " --seed 4");
    REQUIRE(sim.exit_code == 0);

    fs::path report = dir / "report.json";
    RunResult est = run("estimate --panel " + panel.string() + " --prices " + prices.string() +
                        " --out " + report.string());
    REQUIRE(est.exit_code == 0);
    Json json = Json::parse(slurp(report));
    CHECK(json["estimates"].contains("first_stage"));
    CHECK(json["estimates"].contains("reduced_form"));
    CHECK(json["estimates"].contains("ols"));
    CHECK(json["estimates"].contains("two_sls"));

    // ratio identity surfaced through the report
    double rf = json["estimates"]["reduced_form"]["coefficient"].get<double>();
    double fs_coef = json["estimates"]["first_stage"]["coefficient"].get<double>();
    double two_sls = json["estimates"]["two_sls"]["coefficient"].get<double>();
    CHECK(std::fabs(rf / fs_coef - two_sls) < 1e-8 * std::max(1.0, std::fabs(two_sls)));

    // byte-identical on a second run
    fs::path report2 = dir / "report2.json";
    RunResult est2 = run("estimate --panel " + panel.string() + " --prices " + prices.string() +
                         " --out " + report2.string());
    REQUIRE(est2.exit_code == 0);
    CHECK(slurp(report) == slurp(report2));
}

TEST_CASE("estimate: golden JSON for the bundled synthetic CSVs") {
    fs::path out = tmp_dir() / "golden_check.json";
    RunResult est = run("estimate --panel " + kData + "/sample_panel.csv --prices " + kData +
                        "/sample_prices.csv --out " + out.string());
    REQUIRE(est.exit_code == 0);
    CHECK(slurp(out) == slurp(fs::path(kData) / "estimate_golden.json"));
}

TEST_CASE("estimate: requested methods appear, and only those") {
    fs::path out = tmp_dir() / "methods.json";
    RunResult est = run("estimate --panel " + kData + "/sample_panel.csv --prices " + kData +
                        "/sample_prices.csv --methods pe,cluster_region --out " + out.string());
    REQUIRE(est.exit_code == 0);
    Json json = Json::parse(slurp(out));
    auto& ses = json["estimates"]["two_sls"]["std_errors"];
    CHECK(ses.size() == 2);
    CHECK(ses.contains("price_exposure"));
    CHECK(ses.contains("cluster_region"));
}

TEST_CASE("estimate: missing price period names the period, exit code 2") {
    fs::path dir = tmp_dir();
    fs::path prices = dir / "short_prices.csv";
    {
        std::ofstream out(prices);
        out << "period,sector,price\n";
        // periods 1..9 only; the sample panel has 10
        for (int t = 1; t <= 9; ++t) out << t << ",s1,1.5\n";
    }
    RunResult est = run("estimate --panel " + kData + "/sample_panel.csv --prices " +
                        prices.string());
    CHECK(est.exit_code == 2);
    CHECK(est.output.find("missing period '10'") != std::string::npos);
}

TEST_CASE("estimate: numerically degenerate designs exit with code 3") {
    fs::path dir = tmp_dir();
    fs::path panel = dir / "degenerate_panel.csv";
    fs::path prices = dir / "degenerate_prices.csv";
    {
        std::ofstream out(panel);
        out << "region,period,outcome,treatment,exposure\n";
        for (int i = 1; i <= 3; ++i)
            for (int t = 1; t <= 4; ++t)
                out << "r" << i << ',' << t << ',' << (i + t) << ",0.0,1.0\n";
    }
    {
        std::ofstream out(prices);
        out << "period,sector,price\n";
        for (int t = 1; t <= 4; ++t) out << t << ",s1," << (1.0 + 0.1 * t) << "\n";
    }
    RunResult est = run("estimate --panel " + panel.string() + " --prices " + prices.string());
    CHECK(est.exit_code == 3);
}

TEST_CASE("mc: smoke config runs, JSON is thread-count invariant, seed override changes it") {
    fs::path dir = tmp_dir();
    fs::path a = dir / "mc_a.json";
    fs::path b = dir / "mc_b.json";
    RunResult one = run("mc --config " + kData + "/mc_smoke.cfg --threads 1 --out " + a.string());
    REQUIRE(one.exit_code == 0);
    RunResult two = run("mc --config " + kData + "/mc_smoke.cfg --threads 2 --out " + b.string());
    REQUIRE(two.exit_code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(one.output.find("Mean Bias") != std::string::npos);

    fs::path c = dir / "mc_c.json";
    RunResult reseeded =
        run("mc --config " + kData + "/mc_smoke.cfg --threads 2 --seed 99 --out " + c.string());
    REQUIRE(reseeded.exit_code == 0);
    CHECK(slurp(a) != slurp(c));
    CHECK(reseeded.output.find("Mean Bias") != std::string::npos);

    // per-replication CSV comes out when asked
    fs::path reps = dir / "reps.csv";
    RunResult with_reps =
        run("mc --config " + kData + "/mc_smoke.cfg --reps-csv " + reps.string());
    REQUIRE(with_reps.exit_code == 0);
    std::string reps_text = slurp(reps);
    CHECK(reps_text.find("scenario,replication,beta_hat") != std::string::npos);
}

TEST_CASE("mc: unknown config keys are schema errors naming the key") {
    fs::path bad = tmp_dir() / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "[population]\nn_regions = 5\nn_sectors = 2\nn_periods = 3\n"
            << "[scenario]\nreplications = 2\nmystery_knob = 1\n";
    }
    RunResult result = run("mc --config " + bad.string());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("mystery_knob") != std::string::npos);
}

TEST_CASE("oracle: contamination switches off and on with the configuration") {
    RunResult indep = run("oracle --config " + kData + "/oracle_indep.cfg --out -");
    REQUIRE(indep.exit_code == 0);
    Json json = Json::parse(indep.output);
    CHECK(json["decomposition"]["contamination_price"].get<double>() == 0.0);
    CHECK(json["decomposition"]["contamination_ge"].get<double>() == 0.0);
    CHECK(json.contains("weight_audit"));

    RunResult gamma_zero = run("oracle --config " + kData + "/oracle_gamma_zero.cfg --out -");
    REQUIRE(gamma_zero.exit_code == 0);
    CHECK(Json::parse(gamma_zero.output)["decomposition"]["contamination_ge"].get<double>() ==
          0.0);

    RunResult ge = run("oracle --config " + kData + "/oracle_ge.cfg --out -");
    REQUIRE(ge.exit_code == 0);
    CHECK(Json::parse(ge.output)["decomposition"]["contamination_ge"].get<double>() > 0.0);

    RunResult comove = run("oracle --config " + kData + "/oracle_comove.cfg --out -");
    REQUIRE(comove.exit_code == 0);
    Json comove_json = Json::parse(comove.output);
    CHECK(comove_json["decomposition"]["contamination_price"].get<double>() != 0.0);
    CHECK(comove_json["weight_audit"].contains("negative_mass_share"));
}

TEST_CASE("sensitivity: Wald collapse, report plumbing, breakdown consistency") {
    RunResult wald =
        run("sensitivity --beta-hat 1.0 --se 0.25 --b-lower 0 --b-upper 0 --out -");
    REQUIRE(wald.exit_code == 0);
    Json json = Json::parse(wald.output);
    CHECK(json["im_constant"].get<double>() == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(json["im_interval"]["lower"].get<double>() ==
          doctest::Approx(1.0 - 1.959964 * 0.25).epsilon(1e-6));

    // breakdown through the CLI equals the library call
    RunResult breakdown = run(
        "sensitivity --beta-hat 1.0 --se 0.1 --b-lower -0.2 --b-upper 0.2 --breakdown --out -");
    REQUIRE(breakdown.exit_code == 0);
    double from_cli = Json::parse(breakdown.output)["breakdown_point"].get<double>();
    double direct = pexp::breakdown_point(1.0, 0.1, 0.05, 0.0);
    CHECK(from_cli == doctest::Approx(direct).epsilon(1e-9));

    // reads the estimate report produced earlier in this suite
    fs::path dir = tmp_dir();
    fs::path report = dir / "for_sensitivity.json";
    RunResult est = run("estimate --panel " + kData + "/sample_panel.csv --prices " + kData +
                        "/sample_prices.csv --out " + report.string());
    REQUIRE(est.exit_code == 0);
    RunResult from_report = run("sensitivity --from-report " + report.string() +
                                " --b-lower 0 --b-upper 0.1 --out -");
    REQUIRE(from_report.exit_code == 0);
    Json chained = Json::parse(from_report.output);
    Json base = Json::parse(slurp(report));
    CHECK(chained["beta_hat"].get<double>() ==
          base["estimates"]["two_sls"]["coefficient"].get<double>());
}

TEST_CASE("model: monotonicity summary and the phi sweep") {
    RunResult single = run("model --config " + kData + "/model_single.cfg --out -");
    REQUIRE(single.exit_code == 0);
    Json json = Json::parse(single.output);
    CHECK(json["monotonicity"]["all_monotone"].get<bool>());

    RunResult comove = run("model --config " + kData + "/model_comove.cfg --out -");
    REQUIRE(comove.exit_code == 0);
    Json mixed = Json::parse(comove.output);
    CHECK(mixed["monotonicity"]["monotone_regions"].get<int>() == 1);
    CHECK(mixed["monotonicity"]["total_regions"].get<int>() == 2);
    CHECK(!mixed["monotonicity"]["all_monotone"].get<bool>());

    RunResult sweep = run("model --config " + kData +
                          "/model_comove.cfg --sweep-phi 0 --phi-min 0.05 --phi-max 4.0 "
                          "--steps 80 --out -");
    REQUIRE(sweep.exit_code == 0);
    Json swept = Json::parse(sweep.output);
    // analytic crossing: the exposure index hits (sigma_q-1)/sigma_q = 0.5
    // when phi = W/0.5 - sum(share*sigma*delta) = 2.1333... - 1.5666... = 0.5667
    double crossing = swept["phi_sweep"]["first_crossing_phi"].get<double>();
    CHECK(crossing > 0.55);
    CHECK(crossing < 0.65);
}

TEST_CASE("cli: determinism of every JSON-emitting command under a fixed seed") {
    fs::path dir = tmp_dir();
    auto bytes_of = [&](const std::string& args, const fs::path& out) {
        RunResult result = run(args + " --out " + out.string());
        REQUIRE(result.exit_code == 0);
        return slurp(out);
    };
    std::string oracle_args = "oracle --config " + kData + "/oracle_comove.cfg";
    CHECK(bytes_of(oracle_args, dir / "o1.json") == bytes_of(oracle_args, dir / "o2.json"));
    std::string model_args = "model --config " + kData + "/model_comove.cfg";
    CHECK(bytes_of(model_args, dir / "m1.json") == bytes_of(model_args, dir / "m2.json"));
    std::string sens_args = "sensitivity --beta-hat 0.5 --se 0.2 --b-lower -0.1 --b-upper 0.3";
    CHECK(bytes_of(sens_args, dir / "s1.json") == bytes_of(sens_args, dir / "s2.json"));
}

TEST_CASE("estimate: a panel without a treatment column runs the reduced form only") {
    fs::path dir = tmp_dir();
    fs::path panel = dir / "rf_only_panel.csv";
    fs::path prices = dir / "rf_only_prices.csv";
    {
        std::ofstream out(panel);
        out << "region,period,outcome,exposure\n";
        for (int i = 1; i <= 5; ++i)
            for (int t = 1; t <= 6; ++t)
                out << "r" << i << ',' << t << ',' << (0.3 * i + 0.1 * t * i) << ',' << i << "\n";
    }
    {
        std::ofstream out(prices);
        out << "period,sector,price\n";
        for (int t = 1; t <= 6; ++t) out << t << ",s1," << (1.0 + 0.2 * t) << "\n";
    }
    fs::path report = dir / "rf_only.json";
    RunResult est = run("estimate --panel " + panel.string() + " --prices " + prices.string() +
                        " --out " + report.string());
    REQUIRE(est.exit_code == 0);
    Json json = Json::parse(slurp(report));
    CHECK(json["estimates"].size() == 1);
    CHECK(json["estimates"].contains("reduced_form"));
}
