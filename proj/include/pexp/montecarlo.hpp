#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pexp/dgp.hpp"
#include "pexp/estimators.hpp"
#include "pexp/inference.hpp"

namespace pexp {

// One coverage experiment: a population frozen once, prices redrawn per
// replication, the estimator refit and each variance method evaluated against
// the finite-population estimand.
struct Scenario {
    std::string name;
    PopulationConfig population;  // carries N, S, T
    PriceProcessSpec prices;
    std::size_t replications = 1000;
    EstimatorSpec estimator;  // stacked two_sls with no fixed effects by default
    std::vector<VarianceMethod> methods{VarianceMethod::ehw, VarianceMethod::price_exposure};
    std::uint64_t master_seed = 0;
    std::size_t threads = 0;  // 0: PEXP_THREADS env var, else hardware concurrency

    void validate() const;
};

struct MethodSummary {
    VarianceMethod method = VarianceMethod::ehw;
    double mean_se = 0.0;
    double coverage = 0.0;           // 95% CI covers the finite-population estimand
    double coverage_vs_unit = 0.0;   // 95% CI covers 1.0 (the design target on average)
    double coverage_mc_se = 0.0;     // sqrt(c(1-c)/R)
};

struct MCReport {
    std::string scenario_name;
    std::size_t n_regions = 0, n_periods = 0, n_sectors = 0;
    std::size_t replications = 0, excluded = 0;
    std::uint64_t master_seed = 0;
    double estimand = 0.0;  // closed form from the drawn population
    double mean_bias = 0.0;           // mean(beta_hat) - estimand
    double mean_bias_vs_unit = 0.0;   // mean(beta_hat) - 1
    std::vector<MethodSummary> methods;
    double wall_seconds = 0.0;  // shown in the text table only, never serialized
    std::string annotation;     // e.g. single-period designs are degenerate
};

struct ReplicationRecord {
    std::size_t replication = 0;
    double beta_hat = 0.0;
    std::vector<double> std_errors;  // one per scenario method
    bool excluded = false;
};

// Deterministic under master_seed for any thread count: replication r always
// consumes the price stream keyed by r and aggregation runs in index order.
// Replications with a degenerate fit are excluded and counted; an exclusion
// rate of 0.1% or more aborts the scenario.
MCReport run_scenario(const Scenario& scenario,
                      std::vector<ReplicationRecord>* per_replication = nullptr);

std::vector<MCReport> run_table(const std::vector<Scenario>& rows);

// Aligned text rendering of one or more scenario rows.
std::string format_table(const std::vector<MCReport>& reports);

}  // namespace pexp
