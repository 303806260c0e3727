#include "pexp/dgp.hpp"

#include <cmath>
#include <string>

namespace pexp {

bool FinitePopulation::monotone_design() const {
    for (std::size_t i = 0; i < n_regions; ++i)
        if (kappa(i, focal_sector) < 0.0) return false;
    return true;
}

void FinitePopulation::validate() const {
    if (n_regions < 1 || n_sectors < 1 || n_periods < 1)
        throw input_error("population needs N, S, T >= 1");
    if (focal_sector >= n_sectors) throw input_error("focal sector out of range");
    eta.require_shape(n_regions, n_periods, "eta");
    for (const auto* m : {&beta, &alpha, &kappa, &exposure})
        m->require_shape(n_regions, n_sectors, "per-sector population matrix");
    if (epsilon.dim1() != n_regions || epsilon.dim2() != n_sectors || epsilon.dim3() != n_periods)
        throw input_error("epsilon tensor shape mismatch");
    if (gamma && (gamma->dim1() != n_regions || gamma->dim2() != n_sectors ||
                  gamma->dim3() != n_sectors))
        throw input_error("gamma tensor shape mismatch");
}

double MarginalLaw::variance() const {
    switch (family) {
        case MarginalFamily::uniform: return scale * scale / 3.0;
        case MarginalFamily::gaussian: return scale * scale;
    }
    return 0.0;
}

double MarginalLaw::third_moment() const {
    return 0.0;  // both supported families are symmetric around zero
}

double MarginalLaw::fourth_moment() const {
    switch (family) {
        case MarginalFamily::uniform: return scale * scale * scale * scale / 5.0;
        case MarginalFamily::gaussian: return 3.0 * scale * scale * scale * scale;
    }
    return 0.0;
}

double MarginalLaw::draw(Philox& rng) const {
    switch (family) {
        case MarginalFamily::uniform: return rng.uniform(-scale, scale);
        case MarginalFamily::gaussian: return rng.normal(0.0, scale);
    }
    return 0.0;
}

void PriceProcessSpec::validate() const {
    if (n_sectors < 1) throw input_error("price spec needs at least one sector");
    if (focal_sector >= n_sectors) throw input_error("focal sector out of range");
    if (marginals.size() != n_sectors)
        throw input_error("price spec needs one marginal law per sector");
    for (const auto& m : marginals)
        if (!(m.scale > 0.0)) throw input_error("price marginal scale must be positive");
    if (dependence == CrossSectorDependence::focal_loading) {
        if (loadings.size() != n_sectors)
            throw input_error("focal-loading mode needs one loading per sector");
        if (std::abs(loadings[focal_sector] - 1.0) > 1e-12)
            throw input_error("the focal sector's loading on itself must be 1");
    }
    if (!iid_over_time)
        throw input_error("serially dependent prices are reserved and not implemented");
}

double PriceProcessSpec::variance(std::size_t s) const {
    if (dependence == CrossSectorDependence::focal_loading && s != focal_sector) {
        double rho = loadings[s];
        return rho * rho * marginals[focal_sector].variance() + marginals[s].variance();
    }
    return marginals[s].variance();
}

double PriceProcessSpec::cov_with_focal(std::size_t s) const {
    if (s == focal_sector) return variance(focal_sector);
    if (dependence == CrossSectorDependence::focal_loading)
        return loadings[s] * marginals[focal_sector].variance();
    return 0.0;
}

void PopulationConfig::validate() const {
    if (n_regions < 1 || n_sectors < 1 || n_periods < 1)
        throw input_error("population config needs N, S, T >= 1");
    if (beta_high < beta_low || kappa_high < kappa_low || exposure_high < exposure_low ||
        gamma_high < gamma_low)
        throw input_error("population config has an inverted uniform range");
    if (eta_sd < 0.0 || epsilon_sd < 0.0)
        throw input_error("population config needs nonnegative noise scales");
    if (!(exposure_low > 0.0))
        throw input_error("exposure lower limit must be strictly positive");
}

FinitePopulation draw_population(const PopulationConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t n = config.n_regions, S = config.n_sectors, T = config.n_periods;

    FinitePopulation pop;
    pop.n_regions = n;
    pop.n_sectors = S;
    pop.n_periods = T;
    pop.focal_sector = 0;
    pop.eta = Matrix(n, T);
    pop.beta = Matrix(n, S);
    pop.alpha = Matrix(n, S);
    pop.kappa = Matrix(n, S);
    pop.exposure = Matrix(n, S);
    pop.epsilon = Tensor3(n, S, T);

    // Separate streams per block keep the layout stable if block sizes change.
    Philox rng_effects(seed, stream::population(0));
    Philox rng_outcomes(seed, stream::population(1));
    Philox rng_shocks(seed, stream::population(2));
    Philox rng_gamma(seed, stream::population(3));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < S; ++s) {
            pop.beta(i, s) = rng_effects.uniform(config.beta_low, config.beta_high);
            pop.kappa(i, s) = rng_effects.uniform(config.kappa_low, config.kappa_high);
            pop.exposure(i, s) = rng_effects.uniform(config.exposure_low, config.exposure_high);
            pop.alpha(i, s) = config.alpha_scale * pop.exposure(i, s);
        }
        for (std::size_t t = 0; t < T; ++t) pop.eta(i, t) = rng_outcomes.normal(0.0, config.eta_sd);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t t = 0; t < T; ++t)
                pop.epsilon(i, s, t) = rng_shocks.normal(0.0, config.epsilon_sd);
    }
    if (config.gamma_enabled) {
        Tensor3 gamma(n, S, S);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t s2 = 0; s2 < S; ++s2)
                    gamma(i, s, s2) =
                        s == s2 ? 0.0 : rng_gamma.uniform(config.gamma_low, config.gamma_high);
        pop.gamma = std::move(gamma);
    }
    return pop;
}

PriceSystem draw_prices(const PriceProcessSpec& spec, std::size_t n_periods, std::uint64_t seed,
                        std::uint64_t stream_id) {
    spec.validate();
    if (n_periods < 1) throw input_error("price draw needs T >= 1");

    PriceSystem prices;
    prices.n_sectors = spec.n_sectors;
    prices.n_periods = n_periods;
    prices.focal_sector = spec.focal_sector;
    prices.log_prices = Matrix(spec.n_sectors, n_periods);
    Matrix variances(spec.n_sectors, n_periods);
    Matrix covariances(spec.n_sectors, n_periods);

    Philox rng(seed, stream_id);
    for (std::size_t t = 0; t < n_periods; ++t) {
        double focal = spec.marginals[spec.focal_sector].draw(rng);
        for (std::size_t s = 0; s < spec.n_sectors; ++s) {
            if (s == spec.focal_sector) {
                prices.log_prices(s, t) = focal;
            } else if (spec.dependence == CrossSectorDependence::focal_loading) {
                prices.log_prices(s, t) = spec.loadings[s] * focal + spec.marginals[s].draw(rng);
            } else {
                prices.log_prices(s, t) = spec.marginals[s].draw(rng);
            }
        }
    }
    for (std::size_t s = 0; s < spec.n_sectors; ++s) {
        double v = spec.variance(s);
        double c = spec.cov_with_focal(s);
        for (std::size_t t = 0; t < n_periods; ++t) {
            variances(s, t) = v;
            covariances(s, t) = c;
        }
    }
    prices.variances = std::move(variances);
    prices.covariances_with_focal = std::move(covariances);
    prices.validate();
    return prices;
}

GeneratedPanel generate_panel(const FinitePopulation& pop, const PriceSystem& prices) {
    pop.validate();
    if (prices.n_sectors != pop.n_sectors || prices.n_periods != pop.n_periods)
        throw input_error("price system shape does not match the population");

    const std::size_t n = pop.n_regions, S = pop.n_sectors, T = pop.n_periods;
    GeneratedPanel out;
    out.outputs = Tensor3(n, S, T);
    out.panel.n_regions = n;
    out.panel.n_periods = T;
    out.panel.outcome = Matrix(n, T);
    out.panel.treatment = Matrix(n, T);
    out.panel.exposure.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        out.panel.exposure[i] = pop.exposure(i, pop.focal_sector);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t t = 0; t < T; ++t) {
                double x = pop.alpha(i, s) +
                           pop.kappa(i, s) * pop.exposure(i, s) * prices.log_prices(s, t) +
                           pop.epsilon(i, s, t);
                if (pop.gamma) {
                    for (std::size_t s2 = 0; s2 < S; ++s2)
                        if (s2 != s) x += (*pop.gamma)(i, s, s2) * prices.log_prices(s2, t);
                }
                out.outputs(i, s, t) = x;
            }
        }
        for (std::size_t t = 0; t < T; ++t) {
            KahanSum y;
            y.add(pop.eta(i, t));
            for (std::size_t s = 0; s < S; ++s) y.add(pop.beta(i, s) * out.outputs(i, s, t));
            out.panel.outcome(i, t) = y.value();
            (*out.panel.treatment)(i, t) = out.outputs(i, pop.focal_sector, t);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.panel.region_labels.push_back("r" + std::to_string(i + 1));
    }
    for (std::size_t t = 0; t < T; ++t) {
        out.panel.period_labels.push_back(std::to_string(t + 1));
    }
    return out;
}

}  // namespace pexp
