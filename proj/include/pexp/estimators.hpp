#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pexp/matrix.hpp"
#include "pexp/panel.hpp"

namespace pexp {

enum class FitKind { two_sls, reduced_form, first_stage, ols, twfe_within, twfe_first_diff };

const char* to_string(FitKind kind);
FitKind fit_kind_from_string(const std::string& name);

// Additional price-exposure regressor: exposure vector interacted with a
// common price path, used as a control alongside the focal instrument.
struct ExposurePriceControl {
    std::string name;
    std::vector<double> exposure;  // length N
    std::vector<double> prices;    // length T
};

struct EstimatorSpec {
    FitKind kind = FitKind::two_sls;
    FixedEffects fixed_effects = FixedEffects::two_way;
    std::vector<ExposurePriceControl> extra_exposures;
    bool pooled_differences = false;  // allow twfe_first_diff with T > 2
};

// Single-coefficient fit. All cross products are Kahan-compensated sums taken
// region-by-region with the period index innermost, so results are bit-stable.
//
// The score pieces (instrument, exposure, price path) are kept on the result
// because every variance estimator consumes them; for first-difference fits
// they are aligned with the differenced columns.
struct FitResult {
    FitKind kind = FitKind::two_sls;
    FixedEffects fixed_effects = FixedEffects::none;
    std::size_t n_regions = 0;
    std::size_t n_periods = 0;  // columns actually used by the fit
    double coefficient = 0.0;
    double denominator = 0.0;   // (1/NT) * sum of transformed score x regressor
    Matrix residuals;           // structural residuals on transformed data
    Matrix score_raw;           // untransformed instrument (or regressor for OLS)
    Matrix score_tilde;         // transformed instrument
    std::vector<double> exposure;      // A_i entering the instrument
    std::vector<double> score_prices;  // price path entering the instrument
    bool weak_instrument_warning = false;
    double first_stage_coefficient = 0.0;
    double first_stage_t = 0.0;
};

// beta = sum(Z~ Y~) / sum(Z~ X~), residuals Y~ - X~ beta. Near-orthogonal
// instrument and regressor raise degenerate_error carrying the first-stage
// coefficient.
FitResult fit_2sls(const Panel& panel, const PriceSystem& prices, const EstimatorSpec& spec);

FitResult fit_reduced_form(const Panel& panel, const PriceSystem& prices,
                           const EstimatorSpec& spec);

FitResult fit_first_stage(const Panel& panel, const PriceSystem& prices,
                          const EstimatorSpec& spec);

FitResult fit_ols(const Panel& panel, const PriceSystem& prices, const EstimatorSpec& spec);

// Within form for any T; first-difference form for T = 2 (or pooled
// differences when enabled), demeaning the differenced columns.
FitResult fit_twfe(const Panel& panel, const PriceSystem& prices, const EstimatorSpec& spec);

// Multi-regressor fit: focal instrument plus extra price-exposure controls,
// solved by normal equations over the small regressor block with a
// Gram-Schmidt rank check. Identically-zero columns (e.g. absorbed by the
// fixed effects) are dropped with coefficient zero; genuinely collinear
// columns raise degenerate_error naming the regressor.
struct MultiFitResult {
    std::vector<std::string> names;         // focal first
    std::vector<double> coefficients;
    std::vector<bool> dropped;
    Matrix residuals;
    FixedEffects fixed_effects = FixedEffects::none;
    FitKind kind = FitKind::reduced_form;
};
MultiFitResult fit_multiprice(const Panel& panel, const PriceSystem& prices,
                              const EstimatorSpec& spec);

}  // namespace pexp
