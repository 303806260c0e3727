#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pexp/matrix.hpp"
#include "pexp/panel.hpp"
#include "pexp/rng.hpp"

namespace pexp {

// The conditioning set of the design-based framework: potential outcomes,
// effects, first-stage slopes, exposures, and output shocks, all frozen once
// per experiment. Uncertainty then comes from the price process alone.
struct FinitePopulation {
    std::size_t n_regions = 0;
    std::size_t n_sectors = 0;
    std::size_t n_periods = 0;
    std::size_t focal_sector = 0;
    Matrix eta;                    // untreated potential outcomes, N x T
    Matrix beta;                   // causal effect per unit of sector output, N x S
    Matrix alpha;                  // baseline outputs, N x S
    Matrix kappa;                  // first-stage slopes on Z = A*p, N x S
    Matrix exposure;               // A_is, N x S
    Tensor3 epsilon;               // idiosyncratic output shocks, N x S x T
    std::optional<Tensor3> gamma;  // cross-price output loadings gamma(i, s, s'), diagonal unused

    bool monotone_design() const;  // kappa_iq >= 0 for every region
    void validate() const;
};

// Mean-zero marginal law for one sector's price innovation.
enum class MarginalFamily { uniform, gaussian };

struct MarginalLaw {
    MarginalFamily family = MarginalFamily::uniform;
    double scale = 1.0;  // uniform: half-width; gaussian: standard deviation

    double variance() const;
    double third_moment() const;
    double fourth_moment() const;
    double draw(Philox& rng) const;
};

enum class CrossSectorDependence { independent, focal_loading };

// Price process: mean-zero marginals, iid over time (a serial-dependence flag
// is reserved but rejected for now), and either mutually independent sectors
// or non-focal prices loading on the focal one:
//   p_st = rho_s * p_qt + u_st, u_st drawn from the sector's marginal.
struct PriceProcessSpec {
    std::size_t n_sectors = 1;
    std::size_t focal_sector = 0;
    std::vector<MarginalLaw> marginals;  // focal: law of p_q; others: innovation law
    CrossSectorDependence dependence = CrossSectorDependence::independent;
    std::vector<double> loadings;        // rho_s per sector, focal entry 1
    bool iid_over_time = true;

    void validate() const;
    double variance(std::size_t s) const;
    double cov_with_focal(std::size_t s) const;
};

// Distribution families and scales for one frozen population draw. Defaults
// are documented choices; every magnitude is overridable in config.
struct PopulationConfig {
    std::size_t n_regions = 100;
    std::size_t n_sectors = 2;
    std::size_t n_periods = 50;
    double beta_low = 0.0, beta_high = 2.0;        // causal effects
    double kappa_low = 0.0, kappa_high = 1.0;      // keeps the first stage monotone
    double exposure_low = 0.5, exposure_high = 1.5;
    // Baseline levels must stay small next to the price-driven output swings,
    // or the stacked estimator's denominator turns erratic in short panels.
    double alpha_scale = 0.1;                      // alpha_is = alpha_scale * A_is
    double eta_sd = 0.4;
    double epsilon_sd = 0.2;
    bool gamma_enabled = false;
    double gamma_low = 0.0, gamma_high = 0.3;

    void validate() const;
};

FinitePopulation draw_population(const PopulationConfig& config, std::uint64_t seed);

// One S x T price path from the given stream; analytic variances and focal
// covariances are recorded alongside the draws.
PriceSystem draw_prices(const PriceProcessSpec& spec, std::size_t n_periods, std::uint64_t seed,
                        std::uint64_t stream_id);

// Deterministic map (F0, prices) -> panel. The full output tensor is kept for
// oracle checks; the panel's treatment is the focal slice.
struct GeneratedPanel {
    Panel panel;
    Tensor3 outputs;  // X_ist, N x S x T
};
GeneratedPanel generate_panel(const FinitePopulation& pop, const PriceSystem& prices);

}  // namespace pexp
