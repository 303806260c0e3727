#include "pexp/config_load.hpp"

namespace pexp {

namespace {

const std::vector<std::string> kPopulationKeys = {
    "n_regions",    "n_sectors",    "n_periods",   "beta_low",      "beta_high",
    "kappa_low",    "kappa_high",   "exposure_low", "exposure_high", "alpha_scale",
    "eta_sd",       "epsilon_sd",   "gamma_enabled", "gamma_low",    "gamma_high"};

const std::vector<std::string> kPriceKeys = {"family", "scale", "scales", "dependence",
                                             "loadings"};

const std::vector<std::string> kScenarioKeys = {
    "name",   "n_regions", "n_periods", "n_sectors", "replications",
    "seed",   "methods",   "estimator", "fixed_effects", "threads"};

MarginalFamily family_from_string(const std::string& name) {
    if (name == "uniform") return MarginalFamily::uniform;
    if (name == "gaussian" || name == "normal") return MarginalFamily::gaussian;
    throw input_error("unknown price family '" + name + "'");
}

void apply_population_keys(const ConfigSection& section, PopulationConfig* config) {
    config->n_regions = static_cast<std::size_t>(
        section.get_long_or("n_regions", static_cast<long>(config->n_regions)));
    config->n_sectors = static_cast<std::size_t>(
        section.get_long_or("n_sectors", static_cast<long>(config->n_sectors)));
    config->n_periods = static_cast<std::size_t>(
        section.get_long_or("n_periods", static_cast<long>(config->n_periods)));
    config->beta_low = section.get_double_or("beta_low", config->beta_low);
    config->beta_high = section.get_double_or("beta_high", config->beta_high);
    config->kappa_low = section.get_double_or("kappa_low", config->kappa_low);
    config->kappa_high = section.get_double_or("kappa_high", config->kappa_high);
    config->exposure_low = section.get_double_or("exposure_low", config->exposure_low);
    config->exposure_high = section.get_double_or("exposure_high", config->exposure_high);
    config->alpha_scale = section.get_double_or("alpha_scale", config->alpha_scale);
    config->eta_sd = section.get_double_or("eta_sd", config->eta_sd);
    config->epsilon_sd = section.get_double_or("epsilon_sd", config->epsilon_sd);
    config->gamma_enabled = section.get_bool_or("gamma_enabled", config->gamma_enabled);
    config->gamma_low = section.get_double_or("gamma_low", config->gamma_low);
    config->gamma_high = section.get_double_or("gamma_high", config->gamma_high);
}

}  // namespace

PopulationConfig load_population_config(const ConfigFile& config) {
    PopulationConfig population;
    if (const ConfigSection* section = config.find("population")) {
        section->restrict_keys(kPopulationKeys);
        apply_population_keys(*section, &population);
    }
    return population;
}

PriceProcessSpec load_price_spec(const ConfigFile& config, std::size_t n_sectors) {
    PriceProcessSpec spec;
    spec.n_sectors = n_sectors;
    spec.focal_sector = 0;
    MarginalLaw base;
    if (const ConfigSection* section = config.find("prices")) {
        section->restrict_keys(kPriceKeys);
        base.family = family_from_string(section->get_or("family", "uniform"));
        base.scale = section->get_double_or("scale", 1.0);
        spec.marginals.assign(n_sectors, base);
        if (section->has("scales")) {
            std::vector<double> scales = section->get_list("scales");
            if (scales.size() != n_sectors)
                throw input_error("[prices] scales needs one entry per sector");
            for (std::size_t s = 0; s < n_sectors; ++s) spec.marginals[s].scale = scales[s];
        }
        std::string dependence = section->get_or("dependence", "independent");
        if (dependence == "independent") {
            spec.dependence = CrossSectorDependence::independent;
        } else if (dependence == "focal_loading") {
            spec.dependence = CrossSectorDependence::focal_loading;
            spec.loadings = section->get_list("loadings");
            if (spec.loadings.size() != n_sectors)
                throw input_error("[prices] loadings needs one entry per sector");
        } else {
            throw input_error("unknown price dependence '" + dependence + "'");
        }
    } else {
        spec.marginals.assign(n_sectors, base);
    }
    spec.validate();
    return spec;
}

std::vector<Scenario> load_scenarios(const ConfigFile& config) {
    config.restrict_sections({"population", "prices", "scenario"});
    PopulationConfig base = load_population_config(config);

    std::vector<Scenario> scenarios;
    for (const ConfigSection* section : config.all("scenario")) {
        section->restrict_keys(kScenarioKeys);
        Scenario scenario;
        scenario.name = section->get_or("name", "");
        scenario.population = base;
        apply_population_keys(*section, &scenario.population);
        scenario.prices = load_price_spec(config, scenario.population.n_sectors);
        scenario.replications =
            static_cast<std::size_t>(section->get_long_or("replications", 1000));
        scenario.master_seed = static_cast<std::uint64_t>(section->get_long_or("seed", 0));
        scenario.threads = static_cast<std::size_t>(section->get_long_or("threads", 0));
        scenario.estimator.kind = fit_kind_from_string(section->get_or("estimator", "two_sls"));
        scenario.estimator.fixed_effects =
            fixed_effects_from_string(section->get_or("fixed_effects", "none"));
        if (section->has("methods")) {
            scenario.methods.clear();
            for (const std::string& name : section->get_string_list("methods"))
                scenario.methods.push_back(variance_method_from_string(name));
        }
        scenario.validate();
        scenarios.push_back(std::move(scenario));
    }
    if (scenarios.empty()) throw input_error("config defines no [scenario] section");
    return scenarios;
}

LaborModelParams load_labor_model(const ConfigFile& config, std::size_t* focal_sector) {
    config.restrict_sections({"model", "internal", "sector", "region"});
    LaborModelParams params;

    for (const ConfigSection* section : config.all("sector")) {
        section->restrict_keys({"name", "sigma", "theta", "rho"});
        SectorParams sector;
        sector.name = section->get_or("name", "sector" + std::to_string(params.tradables.size()));
        sector.sigma = section->get_double("sigma");
        sector.theta = section->get_double("theta");
        sector.rho = section->get_double_or("rho", 0.0);
        params.tradables.push_back(std::move(sector));
    }
    if (params.tradables.empty()) throw input_error("model config needs at least one [sector]");

    if (const ConfigSection* internal = config.find("internal")) {
        internal->restrict_keys({"sigma", "theta"});
        params.internal_sigma = internal->get_double_or("sigma", 2.0);
        params.internal_theta = internal->get_double_or("theta", 0.5);
    }

    for (const ConfigSection* section : config.all("region")) {
        section->restrict_keys(
            {"name", "phi", "shares", "internal_share", "ebar", "capital", "labor0", "exposure"});
        RegionParams region;
        region.name = section->get_or("name", "region" + std::to_string(params.regions.size()));
        region.phi = section->get_double("phi");
        region.tradable_shares = section->get_list("shares");
        region.internal_share = section->get_double("internal_share");
        auto fill = [&](const char* key) {
            if (!section->has(key))
                return std::vector<double>(params.tradables.size(), 1.0);
            std::vector<double> v = section->get_list(key);
            if (v.size() == 1) v.assign(params.tradables.size(), v[0]);
            return v;
        };
        region.ebar = fill("ebar");
        region.capital = fill("capital");
        region.labor0 = fill("labor0");
        region.exposure = fill("exposure");
        params.regions.push_back(std::move(region));
    }
    if (params.regions.empty()) throw input_error("model config needs at least one [region]");

    std::size_t focal = 0;
    if (const ConfigSection* model = config.find("model")) {
        model->restrict_keys({"focal_sector"});
        std::string name = model->get_or("focal_sector", params.tradables.front().name);
        bool found = false;
        for (std::size_t s = 0; s < params.tradables.size(); ++s)
            if (params.tradables[s].name == name) {
                focal = s;
                found = true;
                break;
            }
        if (!found) throw input_error("focal sector '" + name + "' is not a declared [sector]");
    }
    // the focal price loads on itself with coefficient one
    params.tradables[focal].rho = 1.0;
    params.validate();
    if (focal_sector) *focal_sector = focal;
    return params;
}

OracleRequest load_oracle_request(const ConfigFile& config) {
    config.restrict_sections({"population", "prices", "oracle"});
    OracleRequest request;
    request.population = load_population_config(config);
    request.prices = load_price_spec(config, request.population.n_sectors);
    if (const ConfigSection* oracle = config.find("oracle")) {
        oracle->restrict_keys({"seed", "kind"});
        request.seed = static_cast<std::uint64_t>(oracle->get_long_or("seed", 0));
        request.kind = oracle->get_or("kind", "iv");
    }
    if (request.kind != "iv" && request.kind != "iv_ge" && request.kind != "twfe")
        throw input_error("oracle kind must be iv, iv_ge, or twfe");
    return request;
}

}  // namespace pexp
