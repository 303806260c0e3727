#pragma once

#include "pexp/dgp.hpp"
#include "pexp/matrix.hpp"

namespace pexp {

// Closed-form decomposition of an estimand conditional on the population:
// total = main + contamination_price + contamination_ge exactly. Weights use
// analytic price moments, never sample moments.
struct EstimandDecomposition {
    double main_term = 0.0;
    double contamination_price = 0.0;
    double contamination_ge = 0.0;
    double total = 0.0;
    double denominator = 0.0;  // sum of first-stage weights
    Matrix weights_main;       // stacked estimand: N x T; two-period trend form: N x 1
    Tensor3 weights_cross;     // N x S x T (focal slice zero); trend form: N x S x 1
    bool convex = false;         // main term is a convex average of focal effects
    bool weakly_causal = false;  // every channel loads with nonnegative weight
};

// Stacked instrument estimand: main weights kappa_iq A_iq^2 V(p_qt), cross
// weights kappa_is A_is A_iq Cov(p_qt, p_st). Population gamma must be absent
// or identically zero here.
EstimandDecomposition iv_estimand(const FinitePopulation& pop, const PriceProcessSpec& spec);

// Adds the cross-price output channel: the numerator gains
// sum_{s != q} A_iq [sum_{s' != s} gamma_iss' Cov(p_qt, p_s't)] beta_is and the
// denominator gains A_iq sum_{s' != q} gamma_iqs' Cov(p_qt, p_s't). Under
// mutually independent prices these collapse to the familiar
// A_iq gamma_isq V(p_qt) beta_is form with an unchanged denominator.
EstimandDecomposition iv_estimand_ge(const FinitePopulation& pop, const PriceProcessSpec& spec);

// Two-period trend regression estimand. Denominator sum_i A_iq^2 V(dp_q)
// carries no kappa, so the main term is a convex average only when the
// A^2-weighted mean of kappa_iq is one (flagged via `convex`). Prices iid over
// time give V(dp) = 2 V(p) and Cov(dp_s, dp_q) = 2 Cov(p_s, p_q).
EstimandDecomposition twfe_estimand(const FinitePopulation& pop, const PriceProcessSpec& spec);

struct WeightAudit {
    double min_weight = 0.0;
    double negative_mass_share = 0.0;  // |negative weight| / total |weight|
    std::size_t negative_count = 0;
    bool convex = false;
    bool weakly_causal = false;
};
WeightAudit weight_audit(const EstimandDecomposition& decomposition);

}  // namespace pexp
