#include <doctest.h>

#include <cmath>

#include "pexp/config_load.hpp"
#include "pexp/montecarlo.hpp"
#include "pexp/report.hpp"
#include "test_util.hpp"

using namespace pexp;

namespace {

Scenario tiny_scenario(std::uint64_t seed) {
    Scenario scenario;
    scenario.name = "tiny";
    scenario.population.n_regions = 25;
    scenario.population.n_sectors = 2;
    scenario.population.n_periods = 12;
    scenario.prices.n_sectors = 2;
    scenario.prices.marginals.assign(2, {MarginalFamily::uniform, 1.0});
    scenario.replications = 60;
    scenario.estimator.kind = FitKind::two_sls;
    scenario.estimator.fixed_effects = FixedEffects::none;
    scenario.master_seed = seed;
    return scenario;
}

}  // namespace

TEST_CASE("run_scenario: identical reports for any worker count") {
    Scenario one = tiny_scenario(5);
    one.threads = 1;
    Scenario four = tiny_scenario(5);
    four.threads = 4;
    MCReport a = run_scenario(one);
    MCReport b = run_scenario(four);
    CHECK(to_json(a).dump() == to_json(b).dump());

    std::vector<ReplicationRecord> records_a, records_b;
    run_scenario(one, &records_a);
    run_scenario(four, &records_b);
    REQUIRE(records_a.size() == records_b.size());
    for (std::size_t r = 0; r < records_a.size(); ++r) {
        CHECK(records_a[r].beta_hat == records_b[r].beta_hat);
        CHECK(records_a[r].std_errors == records_b[r].std_errors);
    }
}

TEST_CASE("run_scenario: exact recovery with one sector and no noise") {
    Scenario scenario = tiny_scenario(9);
    scenario.population.n_sectors = 1;
    scenario.prices.n_sectors = 1;
    scenario.prices.marginals.assign(1, {MarginalFamily::uniform, 1.0});
    scenario.population.beta_low = scenario.population.beta_high = 1.0;
    scenario.population.eta_sd = 0.0;
    scenario.population.epsilon_sd = 0.0;
    scenario.replications = 1;
    MCReport report = run_scenario(scenario);
    CHECK(report.estimand == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs(report.mean_bias) < 1e-12);
    for (const auto& m : report.methods) CHECK(m.coverage == 1.0);
}

TEST_CASE("run_scenario: coverage bookkeeping stays within [0,1] and the MC SE formula") {
    MCReport report = run_scenario(tiny_scenario(13));
    for (const auto& m : report.methods) {
        CHECK(m.coverage >= 0.0);
        CHECK(m.coverage <= 1.0);
        CHECK(m.coverage_mc_se ==
              doctest::Approx(std::sqrt(m.coverage * (1.0 - m.coverage) /
                                        static_cast<double>(report.replications))));
    }
    CHECK(report.excluded == 0);
}

TEST_CASE("run_scenario: degenerate designs fail loudly") {
    Scenario scenario = tiny_scenario(17);
    scenario.population.n_sectors = 1;
    scenario.prices.n_sectors = 1;
    scenario.prices.marginals.assign(1, {MarginalFamily::uniform, 1.0});
    scenario.population.kappa_low = scenario.population.kappa_high = 0.0;
    scenario.population.alpha_scale = 0.0;
    scenario.population.epsilon_sd = 0.0;  // treatment identically zero
    scenario.replications = 5;
    CHECK_THROWS_AS(run_scenario(scenario), degenerate_error);
}

TEST_CASE("run_scenario: cross-exposure residual structure ranks the variance methods") {
    // second sector in the outcome makes the robust meat miss the
    // within-period correlation; the price-exposure meat picks it up
    Scenario scenario = tiny_scenario(21);
    scenario.population.n_regions = 200;
    scenario.population.n_periods = 30;
    scenario.replications = 120;
    MCReport report = run_scenario(scenario);
    REQUIRE(report.methods.size() == 2);
    const MethodSummary& robust = report.methods[0];
    const MethodSummary& pe = report.methods[1];
    REQUIRE(robust.method == VarianceMethod::ehw);
    REQUIRE(pe.method == VarianceMethod::price_exposure);
    CHECK(pe.mean_se > robust.mean_se);
    CHECK(pe.coverage > robust.coverage);
}

TEST_CASE("run_table: empty input is an error; rows keep their order") {
    CHECK_THROWS_AS(run_table({}), input_error);
    std::vector<Scenario> rows{tiny_scenario(1), tiny_scenario(2)};
    rows[0].name = "first";
    rows[1].name = "second";
    rows[1].population.n_periods = 6;
    std::vector<MCReport> reports = run_table(rows);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].scenario_name == "first");
    CHECK(reports[1].scenario_name == "second");
    std::string table = format_table(reports);
    CHECK(table.find("first") != std::string::npos);
    CHECK(table.find("Mean Bias") != std::string::npos);
}

TEST_CASE("scenario config: schema errors name the offending key") {
    ConfigFile bad = ConfigFile::parse_string(
        "[population]\nn_regions = 10\nn_sectors = 2\nn_periods = 4\n"
        "[scenario]\nreplications = 3\nbogus_key = 1\n",
        "cfg");
    CHECK_THROWS_WITH_AS(load_scenarios(bad), doctest::Contains("bogus_key"), input_error);

    ConfigFile good = ConfigFile::parse_string(
        "[population]\nn_regions = 10\nn_sectors = 2\nn_periods = 4\n"
        "[prices]\nfamily = uniform\nscale = 1.0\n"
        "[scenario]\nname = a\nreplications = 3\nseed = 1\nmethods = robust, pe\n",
        "cfg");
    std::vector<Scenario> scenarios = load_scenarios(good);
    REQUIRE(scenarios.size() == 1);
    CHECK(scenarios[0].methods[0] == VarianceMethod::ehw);
    CHECK(scenarios[0].methods[1] == VarianceMethod::price_exposure);
    CHECK(scenarios[0].population.n_regions == 10);
    CHECK_NOTHROW(run_scenario(scenarios[0]));
}

TEST_CASE("PEXP_THREADS steers the default worker count without changing results") {
    Scenario scenario = tiny_scenario(31);
    scenario.threads = 1;
    MCReport reference = run_scenario(scenario);
    setenv("PEXP_THREADS", "3", 1);
    scenario.threads = 0;  // defer to the environment
    MCReport from_env = run_scenario(scenario);
    unsetenv("PEXP_THREADS");
    CHECK(to_json(reference).dump() == to_json(from_env).dump());
}
