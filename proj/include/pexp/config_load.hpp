#pragma once

#include "pexp/config.hpp"
#include "pexp/dgp.hpp"
#include "pexp/labor_model.hpp"
#include "pexp/montecarlo.hpp"

namespace pexp {

// Config schemas are documented in the README. Every section and key is
// checked against the schema; unknown names raise input_error naming them.

// [population]: panel dimensions and the distribution families of one frozen
// population draw.
PopulationConfig load_population_config(const ConfigFile& config);

// [prices]: marginal family/scale(s), cross-sector dependence, loadings.
PriceProcessSpec load_price_spec(const ConfigFile& config, std::size_t n_sectors);

// Repeated [scenario] sections layered over the shared [population]/[prices]
// template; each row may override dimensions, replications, seed, methods.
std::vector<Scenario> load_scenarios(const ConfigFile& config);

// [model]/[internal]/[sector].../[region]...: structural labor-market
// parameters. Returns the focal sector index through `focal_sector`.
LaborModelParams load_labor_model(const ConfigFile& config, std::size_t* focal_sector);

// [oracle]: seed and which estimand to decompose (iv | iv_ge | twfe).
struct OracleRequest {
    std::uint64_t seed = 0;
    std::string kind = "iv";
    PopulationConfig population;
    PriceProcessSpec prices;
};
OracleRequest load_oracle_request(const ConfigFile& config);

}  // namespace pexp
