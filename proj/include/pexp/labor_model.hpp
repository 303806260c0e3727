#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pexp/matrix.hpp"
#include "pexp/panel.hpp"

namespace pexp {

// Structural primitives of the multi-sector labor market behind the first
// stage. Sectors split into tradables (world prices) and one internal sector
// whose price is the numeraire.
struct SectorParams {
    std::string name;
    double sigma = 2.0;  // CES substitution elasticity, > 1
    double theta = 0.5;  // labor share in production, in (0,1)
    double rho = 0.0;    // co-movement loading of this sector's price on the focal price
};

struct RegionParams {
    std::string name;
    double phi = 1.0;                      // labor-supply elasticity, > 0
    std::vector<double> tradable_shares;   // baseline employment shares, one per tradable
    double internal_share = 0.0;           // share of the internal sector
    std::vector<double> ebar;              // baseline productivity per tradable
    std::vector<double> capital;           // installed capital per tradable
    std::vector<double> labor0;            // baseline labor per tradable
    std::vector<double> exposure;          // endowment A_is per tradable
};

struct LaborModelParams {
    std::vector<SectorParams> tradables;
    double internal_sigma = 2.0;  // default calibration, overridable
    double internal_theta = 0.5;
    std::vector<RegionParams> regions;

    std::size_t n_tradables() const { return tradables.size(); }
    std::size_t n_regions() const { return regions.size(); }

    // Parameter ranges plus shares summing to one (including the internal sector).
    void validate() const;
};

// Everything the reduced form needs about region i's response of focal-sector
// output to the focal price.
struct FirstStageProfile {
    std::size_t focal_sector = 0;
    std::vector<double> delta;            // per tradable sector
    double internal_delta = 0.0;
    std::vector<double> lambda;           // wage-feedback denominator, per region
    std::vector<double> wage_elasticity;  // d ln w / d ln P_q
    std::vector<double> exposure_index;   // S_iq, co-moving exposure share of lambda
    std::vector<double> kappa_tilde;      // output units per unit log price (includes A)
    std::vector<double> kappa;            // kappa_tilde / A, the slope on Z = A*p
    std::vector<double> alpha;            // baseline focal output level
    std::vector<double> kappa_efficiency; // output units per unit efficiency shock
    std::vector<char> monotone;           // kappa > 0, region by region
};

// delta = 1 / (1 + (sigma-1)(1-theta)): sensitivity of sectoral labor demand
// to its revenue shifter. Increasing in theta, decreasing in sigma.
double compute_delta(double sigma, double theta);

// lambda_i = phi_i + sum_s share_is * sigma_s * delta_s over all sectors
// including the internal one.
std::vector<double> compute_lambda(const LaborModelParams& params);

// (1/lambda_i) * sum over tradables of share * (sigma-1) * delta * rho.
std::vector<double> compute_wage_elasticity(const LaborModelParams& params,
                                            std::size_t focal_sector);

// Full first-stage profile for the focal sector; capacity inputs must be
// strictly positive.
FirstStageProfile compute_kappa(const LaborModelParams& params, std::size_t focal_sector);

// X_it = alpha_i + A_i*kappa_i*p_qt + kappa_E_i*e_it + eps_it with
// eps ~ N(0, noise_sd^2) drawn from one stream per region.
Matrix simulate_structural_first_stage(const LaborModelParams& params, const PriceSystem& prices,
                                       const Matrix& efficiency_shocks, std::uint64_t rng_seed,
                                       double noise_sd = 0.0);

}  // namespace pexp
