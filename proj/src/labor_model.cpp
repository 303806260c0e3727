#include "pexp/labor_model.hpp"

#include <cmath>

#include "pexp/rng.hpp"

namespace pexp {

namespace {

void check_sector(const std::string& name, double sigma, double theta) {
    if (!(sigma > 1.0))
        throw input_error("sector '" + name + "': sigma must exceed 1, got " +
                          std::to_string(sigma));
    if (!(theta > 0.0 && theta < 1.0))
        throw input_error("sector '" + name + "': theta must lie in (0,1), got " +
                          std::to_string(theta));
}

}  // namespace

void LaborModelParams::validate() const {
    if (tradables.empty()) throw input_error("labor model needs at least one tradable sector");
    if (regions.empty()) throw input_error("labor model needs at least one region");
    for (const auto& s : tradables) check_sector(s.name.empty() ? "?" : s.name, s.sigma, s.theta);
    check_sector("internal", internal_sigma, internal_theta);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& r = regions[i];
        std::string label = r.name.empty() ? "region " + std::to_string(i) : "region '" + r.name + "'";
        if (!(r.phi > 0.0)) throw input_error(label + ": phi must be positive");
        if (r.tradable_shares.size() != tradables.size())
            throw input_error(label + ": expected " + std::to_string(tradables.size()) +
                              " tradable shares");
        double total = r.internal_share;
        if (r.internal_share < 0.0) throw input_error(label + ": negative internal share");
        for (double sh : r.tradable_shares) {
            if (sh < 0.0) throw input_error(label + ": negative employment share");
            total += sh;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw input_error(label + ": employment shares sum to " + std::to_string(total) +
                              ", expected 1");
        for (const auto* v : {&r.ebar, &r.capital, &r.labor0, &r.exposure})
            if (v->size() != tradables.size())
                throw input_error(label + ": capacity vectors must have one entry per tradable");
    }
}

double compute_delta(double sigma, double theta) {
    check_sector("?", sigma, theta);
    return 1.0 / (1.0 + (sigma - 1.0) * (1.0 - theta));
}

std::vector<double> compute_lambda(const LaborModelParams& params) {
    double internal_delta = compute_delta(params.internal_sigma, params.internal_theta);
    std::vector<double> delta(params.tradables.size());
    for (std::size_t s = 0; s < params.tradables.size(); ++s)
        delta[s] = compute_delta(params.tradables[s].sigma, params.tradables[s].theta);

    std::vector<double> lambda(params.regions.size());
    for (std::size_t i = 0; i < params.regions.size(); ++i) {
        const auto& r = params.regions[i];
        KahanSum acc;
        acc.add(r.phi);
        for (std::size_t s = 0; s < params.tradables.size(); ++s)
            acc.add(r.tradable_shares[s] * params.tradables[s].sigma * delta[s]);
        acc.add(r.internal_share * params.internal_sigma * internal_delta);
        lambda[i] = acc.value();
    }
    return lambda;
}

std::vector<double> compute_wage_elasticity(const LaborModelParams& params,
                                            std::size_t focal_sector) {
    if (focal_sector >= params.tradables.size())
        throw input_error("focal sector index out of range");
    std::vector<double> delta(params.tradables.size());
    for (std::size_t s = 0; s < params.tradables.size(); ++s)
        delta[s] = compute_delta(params.tradables[s].sigma, params.tradables[s].theta);
    std::vector<double> lambda = compute_lambda(params);

    std::vector<double> elasticity(params.regions.size());
    for (std::size_t i = 0; i < params.regions.size(); ++i) {
        KahanSum acc;
        for (std::size_t s = 0; s < params.tradables.size(); ++s)
            acc.add(params.regions[i].tradable_shares[s] * (params.tradables[s].sigma - 1.0) *
                    delta[s] * params.tradables[s].rho);
        elasticity[i] = acc.value() / lambda[i];
    }
    return elasticity;
}

FirstStageProfile compute_kappa(const LaborModelParams& params, std::size_t focal_sector) {
    params.validate();
    if (focal_sector >= params.tradables.size())
        throw input_error("focal sector index out of range");
    const SectorParams& focal = params.tradables[focal_sector];
    if (std::abs(focal.rho - 1.0) > 1e-12)
        throw input_error("focal sector's own co-movement loading must be 1");

    FirstStageProfile profile;
    profile.focal_sector = focal_sector;
    profile.internal_delta = compute_delta(params.internal_sigma, params.internal_theta);
    profile.delta.resize(params.tradables.size());
    for (std::size_t s = 0; s < params.tradables.size(); ++s)
        profile.delta[s] = compute_delta(params.tradables[s].sigma, params.tradables[s].theta);
    profile.lambda = compute_lambda(params);
    profile.exposure_index = compute_wage_elasticity(params, focal_sector);
    profile.wage_elasticity = profile.exposure_index;  // same object in this model

    const double sigma_q = focal.sigma;
    const double theta_q = focal.theta;
    const double delta_q = profile.delta[focal_sector];
    const double threshold = (sigma_q - 1.0) / sigma_q;

    const std::size_t n = params.regions.size();
    profile.kappa.resize(n);
    profile.kappa_tilde.resize(n);
    profile.alpha.resize(n);
    profile.kappa_efficiency.resize(n);
    profile.monotone.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = params.regions[i];
        double ebar = r.ebar[focal_sector];
        double capital = r.capital[focal_sector];
        double labor0 = r.labor0[focal_sector];
        double a = r.exposure[focal_sector];
        if (!(ebar > 0.0 && capital > 0.0 && labor0 > 0.0 && a > 0.0))
            throw input_error("region " + std::to_string(i) +
                              ": capacity inputs (ebar, capital, labor0, exposure) must be positive");

        double capacity = ebar * std::pow(capital, 1.0 - theta_q) * std::pow(labor0, theta_q);
        double drag = 1.0 - (sigma_q / (sigma_q - 1.0)) * profile.exposure_index[i];
        profile.kappa[i] = capacity * (sigma_q - 1.0) * theta_q * delta_q * drag;
        profile.kappa_tilde[i] = a * profile.kappa[i];
        profile.alpha[i] = a * capacity;
        // Response to a local efficiency shock: the direct effect plus the
        // labor-demand response net of the own-sector wage feedback.
        double own_feedback = 1.0 - sigma_q * delta_q * r.tradable_shares[focal_sector] /
                                        profile.lambda[i];
        profile.kappa_efficiency[i] =
            profile.alpha[i] * (1.0 + (sigma_q - 1.0) * theta_q * delta_q * own_feedback);
        profile.monotone[i] = profile.exposure_index[i] < threshold ? 1 : 0;
    }
    return profile;
}

Matrix simulate_structural_first_stage(const LaborModelParams& params, const PriceSystem& prices,
                                       const Matrix& efficiency_shocks, std::uint64_t rng_seed,
                                       double noise_sd) {
    FirstStageProfile profile = compute_kappa(params, prices.focal_sector);
    const std::size_t n = params.regions.size();
    const std::size_t T = prices.n_periods;
    if (!efficiency_shocks.empty()) efficiency_shocks.require_shape(n, T, "efficiency shocks");

    Matrix output(n, T);
    for (std::size_t i = 0; i < n; ++i) {
        Philox rng(rng_seed, stream::region(i));
        double slope = params.regions[i].exposure[prices.focal_sector] * profile.kappa[i];
        for (std::size_t t = 0; t < T; ++t) {
            double e = efficiency_shocks.empty() ? 0.0 : efficiency_shocks(i, t);
            double eps = noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0;
            output(i, t) = profile.alpha[i] + slope * prices.focal_price(t) +
                           profile.kappa_efficiency[i] * e + eps;
        }
    }
    return output;
}

}  // namespace pexp
