#pragma once

// Shared helpers for the test suites. The least-squares solver and the
// simulation oracles here are deliberately independent of the library's
// estimation path: plain loops, naive sums, normal equations.

#include <cmath>
#include <cstdint>
#include <vector>

#include "pexp/dgp.hpp"
#include "pexp/matrix.hpp"
#include "pexp/rng.hpp"

namespace testutil {

// Ordinary least squares via normal equations + Gaussian elimination.
// rows: one vector per observation; y: targets. Returns the coefficients.
inline std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& rows,
                                               const std::vector<double>& y) {
    const std::size_t k = rows.front().size();
    std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t obs = 0; obs < rows.size(); ++obs) {
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) g[a][b] += rows[obs][a] * rows[obs][b];
            g[a][k] += rows[obs][a] * y[obs];
        }
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::fabs(g[r][col]) > std::fabs(g[pivot][col])) pivot = r;
        std::swap(g[col], g[pivot]);
        for (std::size_t r = col + 1; r < k; ++r) {
            double f = g[r][col] / g[col][col];
            for (std::size_t c = col; c <= k; ++c) g[r][c] -= f * g[col][c];
        }
    }
    std::vector<double> beta(k, 0.0);
    for (std::size_t r = k; r-- > 0;) {
        double v = g[r][k];
        for (std::size_t c = r + 1; c < k; ++c) v -= g[r][c] * beta[c];
        beta[r] = v / g[r][r];
    }
    return beta;
}

// Ratio-of-expectations simulation oracle for the stacked instrument estimand:
// draws R price paths, recomputes outputs and outcomes with plain triple
// loops, and averages numerator and denominator separately before dividing.
struct SimOracle {
    double estimate = 0.0;
    double mc_se = 0.0;  // delta-method standard error of the ratio
};

inline SimOracle simulate_iv_estimand(const pexp::FinitePopulation& pop,
                                      const pexp::PriceProcessSpec& spec, std::size_t draws,
                                      std::uint64_t seed) {
    const std::size_t n = pop.n_regions, S = pop.n_sectors, T = pop.n_periods;
    const std::size_t q = pop.focal_sector;
    std::vector<double> nums(draws), dens(draws);
    for (std::size_t r = 0; r < draws; ++r) {
        pexp::PriceSystem prices =
            pexp::draw_prices(spec, T, seed, pexp::stream::replication(r));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t t = 0; t < T; ++t) {
                double z = pop.exposure(i, q) * prices.log_prices(q, t);
                double y = pop.eta(i, t);
                double x_focal = 0.0;
                for (std::size_t s = 0; s < S; ++s) {
                    double x = pop.alpha(i, s) +
                               pop.kappa(i, s) * pop.exposure(i, s) * prices.log_prices(s, t) +
                               pop.epsilon(i, s, t);
                    if (pop.gamma)
                        for (std::size_t s2 = 0; s2 < S; ++s2)
                            if (s2 != s) x += (*pop.gamma)(i, s, s2) * prices.log_prices(s2, t);
                    y += pop.beta(i, s) * x;
                    if (s == q) x_focal = x;
                }
                num += z * y;
                den += z * x_focal;
            }
        }
        nums[r] = num;
        dens[r] = den;
    }
    double num_mean = 0.0, den_mean = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
        num_mean += nums[r];
        den_mean += dens[r];
    }
    num_mean /= static_cast<double>(draws);
    den_mean /= static_cast<double>(draws);

    SimOracle oracle;
    oracle.estimate = num_mean / den_mean;
    double var = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
        double linearized = nums[r] - oracle.estimate * dens[r];
        var += linearized * linearized;
    }
    var /= static_cast<double>(draws) * static_cast<double>(draws - 1);
    oracle.mc_se = std::sqrt(var) / std::fabs(den_mean);
    return oracle;
}

// Same oracle for the two-period trend regression: E[dZ dY] / E[(dZ)^2].
inline SimOracle simulate_twfe_estimand(const pexp::FinitePopulation& pop,
                                        const pexp::PriceProcessSpec& spec, std::size_t draws,
                                        std::uint64_t seed) {
    const std::size_t n = pop.n_regions, S = pop.n_sectors;
    const std::size_t q = pop.focal_sector;
    std::vector<double> nums(draws), dens(draws);
    for (std::size_t r = 0; r < draws; ++r) {
        pexp::PriceSystem prices =
            pexp::draw_prices(spec, 2, seed, pexp::stream::replication(r));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dz = pop.exposure(i, q) *
                        (prices.log_prices(q, 1) - prices.log_prices(q, 0));
            double dy = pop.eta(i, 1) - pop.eta(i, 0);
            for (std::size_t s = 0; s < S; ++s) {
                double dx = pop.kappa(i, s) * pop.exposure(i, s) *
                                (prices.log_prices(s, 1) - prices.log_prices(s, 0)) +
                            (pop.epsilon(i, s, 1) - pop.epsilon(i, s, 0));
                if (pop.gamma)
                    for (std::size_t s2 = 0; s2 < S; ++s2)
                        if (s2 != s)
                            dx += (*pop.gamma)(i, s, s2) *
                                  (prices.log_prices(s2, 1) - prices.log_prices(s2, 0));
                dy += pop.beta(i, s) * dx;
            }
            num += dz * dy;
            den += dz * dz;
        }
        nums[r] = num;
        dens[r] = den;
    }
    double num_mean = 0.0, den_mean = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
        num_mean += nums[r];
        den_mean += dens[r];
    }
    num_mean /= static_cast<double>(draws);
    den_mean /= static_cast<double>(draws);

    SimOracle oracle;
    oracle.estimate = num_mean / den_mean;
    double var = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
        double linearized = nums[r] - oracle.estimate * dens[r];
        var += linearized * linearized;
    }
    var /= static_cast<double>(draws) * static_cast<double>(draws - 1);
    oracle.mc_se = std::sqrt(var) / std::fabs(den_mean);
    return oracle;
}

inline bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace testutil
