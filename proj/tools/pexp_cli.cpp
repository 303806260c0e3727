// Command-line front end: estimation pipeline on CSV panels, coverage
// experiments, estimand decompositions, sensitivity analysis, the structural
// first-stage profile, and a synthetic-data generator.
//
// Exit codes: 0 success, 2 input error, 3 numerical degeneracy.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pexp/config_load.hpp"
#include "pexp/estimands.hpp"
#include "pexp/panel_io.hpp"
#include "pexp/report.hpp"
#include "pexp/sensitivity.hpp"

namespace {

using pexp::Json;

constexpr const char* kVersion = "0.1.0";

void write_json(const Json& json, const std::string& out_path) {
    std::string text = json.dump(2);
    text.push_back('\n');
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw pexp::input_error("cannot write output file '" + out_path + "'");
    out << text;
}

struct EstimateArgs {
    std::string panel_path, prices_path, focal_sector, out_path;
    std::string fixed_effects = "two_way";
    std::vector<std::string> methods{"price_exposure", "cluster_region"};
    bool cr1 = false;
    bool transformed_score = false;
    std::uint64_t seed = 0;
    // optional sensitivity block on the instrumented coefficient
    double b_lower = 0.0, b_upper = 0.0, alpha = 0.05;
    std::string im_form = "symmetric";
    bool with_sensitivity = false;
    bool with_breakdown = false;
    double null_value = 0.0;
};

int run_estimate(const EstimateArgs& args) {
    pexp::Panel panel = pexp::read_panel_csv(args.panel_path);
    pexp::RawPriceTable raw = pexp::read_prices_csv(args.prices_path);
    pexp::PriceSystem prices = pexp::make_price_system(raw, panel, args.focal_sector);

    pexp::EstimatorSpec spec;
    spec.fixed_effects = pexp::fixed_effects_from_string(args.fixed_effects);
    pexp::VarianceOptions var_options;
    var_options.cr1 = args.cr1;
    var_options.pe_transformed_score = args.transformed_score;

    std::vector<pexp::VarianceMethod> methods;
    for (const auto& name : args.methods)
        methods.push_back(pexp::variance_method_from_string(name));

    pexp::EstimateReport report;
    report.spec = Json{{"fixed_effects", args.fixed_effects},
                       {"focal_sector",
                        args.focal_sector.empty() ? raw.sector_labels.front() : args.focal_sector},
                       {"methods", args.methods},
                       {"cr1", args.cr1},
                       {"pe_transformed_score", args.transformed_score}};
    // basenames only: reports must be byte-identical wherever the inputs live
    auto basename = [](const std::string& path) {
        return std::filesystem::path(path).filename().string();
    };
    report.metadata = Json{{"panel_file", basename(args.panel_path)},
                           {"panel_hash", pexp::hash_file(args.panel_path)},
                           {"prices_file", basename(args.prices_path)},
                           {"prices_hash", pexp::hash_file(args.prices_path)},
                           {"seed", args.seed},
                           {"version", kVersion}};

    auto attach = [&](const std::string& name, pexp::FitResult fit) {
        pexp::EstimateReport::Line line;
        line.name = name;
        for (pexp::VarianceMethod method : methods) {
            switch (method) {
                case pexp::VarianceMethod::ehw:
                    line.variances.push_back(pexp::ehw_variance(fit, var_options));
                    break;
                case pexp::VarianceMethod::price_exposure:
                    line.variances.push_back(pexp::pe_variance(fit, var_options));
                    break;
                case pexp::VarianceMethod::cluster_region:
                    line.variances.push_back(
                        pexp::cluster_variance(fit, panel, pexp::ClusterBy::region, var_options));
                    break;
                case pexp::VarianceMethod::cluster_time:
                    line.variances.push_back(
                        pexp::cluster_variance(fit, panel, pexp::ClusterBy::time, var_options));
                    break;
            }
        }
        line.fit = std::move(fit);
        report.lines.push_back(std::move(line));
    };

    if (panel.treatment) {
        attach("first_stage", pexp::fit_first_stage(panel, prices, spec));
        attach("reduced_form", pexp::fit_reduced_form(panel, prices, spec));
        attach("ols", pexp::fit_ols(panel, prices, spec));
        pexp::FitResult two_sls = pexp::fit_2sls(panel, prices, spec);
        if (two_sls.weak_instrument_warning)
            std::cerr << "warning: weak first stage (t = " << two_sls.first_stage_t << ")\n";
        attach("two_sls", std::move(two_sls));
    } else {
        attach("reduced_form", pexp::fit_reduced_form(panel, prices, spec));
    }

    if (args.with_sensitivity) {
        const pexp::EstimateReport::Line* headline = nullptr;
        for (const auto& line : report.lines)
            if (line.name == (panel.treatment ? "two_sls" : "reduced_form")) headline = &line;
        double se = 0.0;
        for (const auto& v : headline->variances)
            if (v.method == pexp::VarianceMethod::price_exposure) se = v.std_error;
        if (se <= 0.0)
            throw pexp::input_error(
                "sensitivity block needs the price_exposure method in --methods");
        pexp::SensitivityResult sensitivity = pexp::imbens_manski_interval(
            headline->fit.coefficient, se, args.b_lower, args.b_upper, args.alpha,
            pexp::im_form_from_string(args.im_form));
        if (args.with_breakdown)
            sensitivity.breakdown_point = pexp::breakdown_point(headline->fit.coefficient, se,
                                                                args.alpha, args.null_value);
        report.sensitivity = std::move(sensitivity);
    }

    // human-readable summary
    std::ostringstream table;
    table << std::left << std::setw(14) << "regression" << std::right << std::setw(12)
          << "estimate";
    for (pexp::VarianceMethod method : methods)
        table << std::setw(20) << (std::string("se[") + pexp::to_string(method) + "]");
    table << "\n" << std::fixed;
    for (const auto& line : report.lines) {
        table << std::left << std::setw(14) << line.name << std::right << std::setw(12)
              << std::setprecision(4) << line.fit.coefficient;
        for (const auto& v : line.variances)
            table << std::setw(20) << std::setprecision(4) << v.std_error;
        table << "\n";
    }
    std::cout << table.str();

    if (!args.out_path.empty()) write_json(report.to_json(), args.out_path);
    return 0;
}

struct McArgs {
    std::string config_path, out_path, reps_csv_path;
    std::int64_t seed = -1;
    std::size_t threads = 0;
};

int run_mc(const McArgs& args) {
    pexp::ConfigFile config = pexp::ConfigFile::parse_file(args.config_path);
    std::vector<pexp::Scenario> scenarios = pexp::load_scenarios(config);
    for (auto& scenario : scenarios) {
        if (args.seed >= 0) scenario.master_seed = static_cast<std::uint64_t>(args.seed);
        if (args.threads > 0) scenario.threads = args.threads;
    }

    std::ofstream reps_csv;
    if (!args.reps_csv_path.empty()) {
        reps_csv.open(args.reps_csv_path);
        if (!reps_csv)
            throw pexp::input_error("cannot write replication file '" + args.reps_csv_path + "'");
        reps_csv << "scenario,replication,beta_hat";
        for (const auto& method : scenarios.front().methods)
            reps_csv << ",se_" << pexp::to_string(method);
        reps_csv << ",excluded\n";
        reps_csv.precision(17);
    }

    std::vector<pexp::MCReport> reports;
    for (const auto& scenario : scenarios) {
        std::vector<pexp::ReplicationRecord> records;
        pexp::MCReport report =
            pexp::run_scenario(scenario, reps_csv.is_open() ? &records : nullptr);
        if (reps_csv.is_open()) {
            for (const auto& record : records) {
                reps_csv << report.scenario_name << ',' << record.replication << ','
                         << record.beta_hat;
                for (double se : record.std_errors) reps_csv << ',' << se;
                reps_csv << ',' << (record.excluded ? 1 : 0) << "\n";
            }
        }
        reports.push_back(std::move(report));
    }

    std::cout << pexp::format_table(reports);
    Json json = Json::array();
    for (const auto& report : reports) json.push_back(pexp::to_json(report));
    if (!args.out_path.empty()) write_json(json, args.out_path);
    return 0;
}

int run_oracle(const std::string& config_path, const std::string& out_path,
               std::int64_t seed_override) {
    pexp::ConfigFile config = pexp::ConfigFile::parse_file(config_path);
    pexp::OracleRequest request = pexp::load_oracle_request(config);
    if (seed_override >= 0) request.seed = static_cast<std::uint64_t>(seed_override);
    pexp::FinitePopulation pop = pexp::draw_population(request.population, request.seed);

    pexp::EstimandDecomposition decomposition;
    if (request.kind == "iv")
        decomposition = pexp::iv_estimand(pop, request.prices);
    else if (request.kind == "iv_ge")
        decomposition = pexp::iv_estimand_ge(pop, request.prices);
    else
        decomposition = pexp::twfe_estimand(pop, request.prices);

    Json json{{"kind", request.kind},
              {"seed", request.seed},
              {"n_regions", pop.n_regions},
              {"n_sectors", pop.n_sectors},
              {"n_periods", pop.n_periods},
              {"decomposition", pexp::to_json(decomposition, true)},
              {"weight_audit", pexp::to_json(pexp::weight_audit(decomposition))}};
    write_json(json, out_path);
    return 0;
}

struct SensitivityArgs {
    double beta_hat = 0.0, se = 0.0;
    std::string from_report;
    double b_lower = 0.0, b_upper = 0.0, alpha = 0.05, null_value = 0.0;
    std::string im_form = "symmetric";
    bool with_breakdown = false;
    std::string out_path;
};

int run_sensitivity(const SensitivityArgs& args) {
    double beta_hat = args.beta_hat;
    double se = args.se;
    if (!args.from_report.empty()) {
        std::ifstream in(args.from_report);
        if (!in) throw pexp::input_error("cannot open report '" + args.from_report + "'");
        Json report = Json::parse(in, nullptr, true);
        const char* line = report["estimates"].contains("two_sls") ? "two_sls" : "reduced_form";
        if (!report["estimates"].contains(line))
            throw pexp::input_error("report carries no usable estimate");
        beta_hat = report["estimates"][line]["coefficient"].get<double>();
        auto& ses = report["estimates"][line]["std_errors"];
        if (!ses.contains("price_exposure"))
            throw pexp::input_error("report lacks a price_exposure standard error");
        se = ses["price_exposure"]["std_error"].get<double>();
    }
    if (!(se > 0.0)) throw pexp::input_error("need a positive standard error (--se or --from-report)");

    pexp::SensitivityResult result = pexp::imbens_manski_interval(
        beta_hat, se, args.b_lower, args.b_upper, args.alpha,
        pexp::im_form_from_string(args.im_form));
    if (args.with_breakdown)
        result.breakdown_point =
            pexp::breakdown_point(beta_hat, se, args.alpha, args.null_value);
    write_json(pexp::to_json(result), args.out_path);
    return 0;
}

struct ModelArgs {
    std::string config_path, out_path;
    std::int64_t sweep_region = -1;
    double phi_min = 0.05, phi_max = 5.0;
    std::size_t sweep_steps = 50;
};

int run_model(const ModelArgs& args) {
    pexp::ConfigFile config = pexp::ConfigFile::parse_file(args.config_path);
    std::size_t focal = 0;
    pexp::LaborModelParams params = pexp::load_labor_model(config, &focal);
    pexp::FirstStageProfile profile = pexp::compute_kappa(params, focal);

    std::size_t monotone_count = 0;
    for (char m : profile.monotone) monotone_count += m ? 1 : 0;
    double threshold =
        (params.tradables[focal].sigma - 1.0) / params.tradables[focal].sigma;
    Json json{{"profile", pexp::to_json(profile)},
              {"monotonicity",
               Json{{"threshold", threshold},
                    {"monotone_regions", monotone_count},
                    {"total_regions", params.regions.size()},
                    {"all_monotone", monotone_count == params.regions.size()}}}};

    if (args.sweep_region >= 0) {
        if (static_cast<std::size_t>(args.sweep_region) >= params.regions.size())
            throw pexp::input_error("sweep region index out of range");
        if (!(args.phi_max > args.phi_min) || args.sweep_steps < 2)
            throw pexp::input_error("sweep needs phi_max > phi_min and at least two steps");
        Json sweep = Json::array();
        double crossing = -1.0;
        bool previous_monotone = false;
        for (std::size_t k = 0; k < args.sweep_steps; ++k) {
            double phi = args.phi_min + (args.phi_max - args.phi_min) *
                                            static_cast<double>(k) /
                                            static_cast<double>(args.sweep_steps - 1);
            pexp::LaborModelParams swept = params;
            swept.regions[static_cast<std::size_t>(args.sweep_region)].phi = phi;
            pexp::FirstStageProfile p = pexp::compute_kappa(swept, focal);
            std::size_t i = static_cast<std::size_t>(args.sweep_region);
            sweep.push_back(Json{{"phi", phi},
                                 {"exposure_index", p.exposure_index[i]},
                                 {"kappa", p.kappa[i]},
                                 {"monotone", static_cast<bool>(p.monotone[i])}});
            bool now = p.monotone[i] != 0;
            if (k > 0 && now != previous_monotone && crossing < 0.0) crossing = phi;
            previous_monotone = now;
        }
        json["phi_sweep"] = Json{{"region", args.sweep_region},
                                 {"values", std::move(sweep)},
                                 {"first_crossing_phi", crossing}};
    }
    write_json(json, args.out_path);
    return 0;
}

struct SimulateArgs {
    std::string config_path, out_panel, out_prices;
    std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& args) {
    pexp::ConfigFile config = pexp::ConfigFile::parse_file(args.config_path);
    config.restrict_sections({"population", "prices", "oracle", "scenario"});
    pexp::PopulationConfig population = pexp::load_population_config(config);
    pexp::PriceProcessSpec price_spec = pexp::load_price_spec(config, population.n_sectors);

    pexp::FinitePopulation pop = pexp::draw_population(population, args.seed);
    pexp::PriceSystem prices = pexp::draw_prices(price_spec, population.n_periods, args.seed,
                                                 pexp::stream::replication(0));
    pexp::GeneratedPanel generated = pexp::generate_panel(pop, prices);
    pexp::write_panel_csv(generated.panel, args.out_panel);
    std::vector<std::string> sector_labels;
    for (std::size_t s = 0; s < population.n_sectors; ++s)
        sector_labels.push_back("s" + std::to_string(s + 1));
    pexp::write_prices_csv(prices, sector_labels, args.out_prices);
    std::cout << "wrote " << args.out_panel << " (" << pop.n_regions << " x " << pop.n_periods
              << ") and " << args.out_prices << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"price-exposure design toolkit"};
    app.require_subcommand(1);

    EstimateArgs estimate_args;
    auto* estimate = app.add_subcommand(
        "estimate", "first-stage / reduced-form / OLS / instrumented fits on a CSV panel");
    estimate->add_option("--panel", estimate_args.panel_path, "panel CSV")->required();
    estimate->add_option("--prices", estimate_args.prices_path, "prices CSV")->required();
    estimate->add_option("--focal", estimate_args.focal_sector,
                         "focal sector name (default: first sector in the prices file)");
    estimate->add_option("--fe", estimate_args.fixed_effects,
                         "fixed effects: none|region|time|two_way (default two_way)");
    estimate->add_option("--methods", estimate_args.methods,
                         "variance methods (pe|ehw|cluster_region|cluster_time)")
        ->delimiter(',');
    estimate->add_flag("--cr1", estimate_args.cr1, "apply the G/(G-1) cluster factor");
    estimate->add_flag("--transformed-score", estimate_args.transformed_score,
                       "use the FE-transformed instrument inside the price-exposure meat");
    estimate->add_option("--seed", estimate_args.seed, "seed recorded in the report");
    estimate->add_option("--out", estimate_args.out_path, "write the JSON report here ('-' = stdout)");
    estimate->add_flag("--sensitivity", estimate_args.with_sensitivity,
                       "attach a contamination-bounds block to the headline estimate");
    estimate->add_option("--b-lower", estimate_args.b_lower, "contamination lower bound");
    estimate->add_option("--b-upper", estimate_args.b_upper, "contamination upper bound");
    estimate->add_option("--alpha", estimate_args.alpha, "nominal level (default 0.05)");
    estimate->add_option("--im-form", estimate_args.im_form,
                         "interval form: symmetric|bounds_bracketing");
    estimate->add_flag("--breakdown", estimate_args.with_breakdown,
                       "also search for the breakdown contamination");
    estimate->add_option("--null", estimate_args.null_value, "null value for the breakdown search");
    estimate->callback([&] { run_estimate(estimate_args); });

    McArgs mc_args;
    auto* mc = app.add_subcommand("mc", "coverage experiments over seeded replications");
    mc->add_option("--config", mc_args.config_path, "scenario config file")->required();
    mc->add_option("--seed", mc_args.seed, "override every scenario's master seed");
    mc->add_option("--threads", mc_args.threads, "worker threads (default: PEXP_THREADS or all)");
    mc->add_option("--out", mc_args.out_path, "write the JSON report here");
    mc->add_option("--reps-csv", mc_args.reps_csv_path, "write per-replication draws as CSV");
    mc->callback([&] { run_mc(mc_args); });

    std::string oracle_config, oracle_out;
    std::int64_t oracle_seed = -1;
    auto* oracle =
        app.add_subcommand("oracle", "closed-form estimand decomposition of a drawn population");
    oracle->add_option("--config", oracle_config, "population config file")->required();
    oracle->add_option("--seed", oracle_seed, "override the config's population seed");
    oracle->add_option("--out", oracle_out, "write the JSON decomposition here ('-' = stdout)");
    oracle->callback([&] { run_oracle(oracle_config, oracle_out, oracle_seed); });

    SensitivityArgs sensitivity_args;
    auto* sensitivity =
        app.add_subcommand("sensitivity", "contamination bounds, interval, breakdown point");
    sensitivity->add_option("--beta-hat", sensitivity_args.beta_hat, "point estimate");
    sensitivity->add_option("--se", sensitivity_args.se, "its standard error");
    sensitivity->add_option("--from-report", sensitivity_args.from_report,
                            "read beta-hat and the price-exposure SE from an estimate report");
    sensitivity->add_option("--b-lower", sensitivity_args.b_lower, "contamination lower bound");
    sensitivity->add_option("--b-upper", sensitivity_args.b_upper, "contamination upper bound");
    sensitivity->add_option("--alpha", sensitivity_args.alpha, "nominal level (default 0.05)");
    sensitivity->add_option("--im-form", sensitivity_args.im_form,
                            "interval form: symmetric|bounds_bracketing");
    sensitivity->add_flag("--breakdown", sensitivity_args.with_breakdown,
                          "also search for the breakdown contamination");
    sensitivity->add_option("--null", sensitivity_args.null_value,
                            "null value for the breakdown search (default 0)");
    sensitivity->add_option("--out", sensitivity_args.out_path, "output file ('-' = stdout)");
    sensitivity->callback([&] { run_sensitivity(sensitivity_args); });

    ModelArgs model_args;
    auto* model = app.add_subcommand("model", "structural first-stage profile and monotonicity");
    model->add_option("--config", model_args.config_path, "model config file")->required();
    model->add_option("--out", model_args.out_path, "output file ('-' = stdout)");
    model->add_option("--sweep-phi", model_args.sweep_region,
                      "region index whose labor-supply elasticity is swept");
    model->add_option("--phi-min", model_args.phi_min, "sweep start (default 0.05)");
    model->add_option("--phi-max", model_args.phi_max, "sweep end (default 5)");
    model->add_option("--steps", model_args.sweep_steps, "sweep steps (default 50)");
    model->callback([&] { run_model(model_args); });

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "draw a synthetic panel and write CSVs");
    simulate->add_option("--config", simulate_args.config_path, "population config file")
        ->required();
    simulate->add_option("--out-panel", simulate_args.out_panel, "panel CSV path")->required();
    simulate->add_option("--out-prices", simulate_args.out_prices, "prices CSV path")->required();
    simulate->add_option("--seed", simulate_args.seed, "master seed (default 0)");
    simulate->callback([&] { run_simulate(simulate_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const pexp::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pexp::degenerate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
