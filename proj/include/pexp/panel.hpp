#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pexp/matrix.hpp"

namespace pexp {

// Balanced region x period panel. All matrices are N x T; the exposure is one
// entry per region and never missing.
struct Panel {
    std::size_t n_regions = 0;
    std::size_t n_periods = 0;
    Matrix outcome;                                // Y_it
    std::optional<Matrix> treatment;               // X_it, focal-sector output units
    std::vector<double> exposure;                  // A_i, endowment units
    std::optional<std::vector<int>> cluster_id;    // length N
    std::vector<std::string> region_labels;
    std::vector<std::string> period_labels;

    // Shape and missing-value checks; warns (stderr) on negative exposures,
    // which the monotonicity diagnostics presume are positive.
    void validate() const;
};

// Sector price paths plus the moments of their generating process, when known.
// log_prices holds centered log prices p_st.
struct PriceSystem {
    std::size_t n_sectors = 0;
    std::size_t n_periods = 0;
    std::size_t focal_sector = 0;
    Matrix log_prices;                             // S x T
    std::optional<Matrix> variances;               // Var(p_st | F0), S x T
    std::optional<Matrix> covariances_with_focal;  // Cov(p_qt, p_st | F0), S x T

    void validate() const;
    double focal_price(std::size_t t) const { return log_prices(focal_sector, t); }
};

struct InstrumentMatrix {
    Matrix values;  // Z_it = A_i * p_qt, N x T
};

// Log-transform then demean each sector's series over time. Prices must be
// strictly positive; the error names the offending sector and period.
Matrix center_log_prices(const Matrix& raw_prices);

// Z_it = exposure_i * focal log price_t, entrywise and reproducible bit for bit.
InstrumentMatrix build_instrument(const Panel& panel, const PriceSystem& prices);

// Two-way demeaning: m - rowmean - colmean + grandmean. Absorbs region and
// period fixed effects; idempotent and linear.
Matrix within_transform(const Matrix& m);

// Column t of the result is column t+1 minus column t. Requires T >= 2.
Matrix first_difference(const Matrix& m);

enum class FixedEffects { none, region, time, two_way };

Matrix apply_fixed_effects(const Matrix& m, FixedEffects fe);

const char* to_string(FixedEffects fe);
FixedEffects fixed_effects_from_string(const std::string& name);

}  // namespace pexp
