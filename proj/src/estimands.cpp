#include "pexp/estimands.hpp"

#include <cmath>

namespace pexp {

namespace {

bool gamma_is_nonzero(const FinitePopulation& pop) {
    if (!pop.gamma) return false;
    for (std::size_t i = 0; i < pop.n_regions; ++i)
        for (std::size_t s = 0; s < pop.n_sectors; ++s)
            for (std::size_t s2 = 0; s2 < pop.n_sectors; ++s2)
                if ((*pop.gamma)(i, s, s2) != 0.0) return true;
    return false;
}

void check_inputs(const FinitePopulation& pop, const PriceProcessSpec& spec) {
    pop.validate();
    spec.validate();
    if (spec.n_sectors != pop.n_sectors || spec.focal_sector != pop.focal_sector)
        throw input_error("price spec sectors do not match the population");
}

EstimandDecomposition decompose_iv(const FinitePopulation& pop, const PriceProcessSpec& spec,
                                   bool use_gamma) {
    const std::size_t n = pop.n_regions, S = pop.n_sectors, T = pop.n_periods;
    const std::size_t q = pop.focal_sector;
    const double var_q = spec.variance(q);

    EstimandDecomposition d;
    d.weights_main = Matrix(n, T);
    d.weights_cross = Tensor3(n, S, T);

    KahanSum denominator, main_num, price_num, ge_num;
    bool ge_nonnegative = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double a_q = pop.exposure(i, q);
        const double pi_main = pop.kappa(i, q) * a_q * a_q * var_q;
        double ge_denominator_i = 0.0;
        if (use_gamma) {
            for (std::size_t s2 = 0; s2 < S; ++s2)
                if (s2 != q) ge_denominator_i += (*pop.gamma)(i, q, s2) * spec.cov_with_focal(s2);
            ge_denominator_i *= a_q;
        }
        for (std::size_t t = 0; t < T; ++t) {
            d.weights_main(i, t) = pi_main;
            denominator.add(pi_main + ge_denominator_i);
            main_num.add(pi_main * pop.beta(i, q));
            // the extra first-stage response of focal output to other prices
            // loads on beta_iq and is booked as cross-price-output channel
            if (ge_denominator_i != 0.0) ge_num.add(ge_denominator_i * pop.beta(i, q));
        }
        for (std::size_t s = 0; s < S; ++s) {
            if (s == q) continue;
            const double pi_cross =
                pop.kappa(i, s) * pop.exposure(i, s) * a_q * spec.cov_with_focal(s);
            double ge_is = 0.0;
            if (use_gamma) {
                for (std::size_t s2 = 0; s2 < S; ++s2)
                    if (s2 != s) ge_is += (*pop.gamma)(i, s, s2) * spec.cov_with_focal(s2);
                ge_is *= a_q;
                if (ge_is < 0.0) ge_nonnegative = false;
            }
            for (std::size_t t = 0; t < T; ++t) {
                d.weights_cross(i, s, t) = pi_cross;
                price_num.add(pi_cross * pop.beta(i, s));
                if (ge_is != 0.0) ge_num.add(ge_is * pop.beta(i, s));
            }
        }
    }

    d.denominator = denominator.value();
    if (!(d.denominator > 0.0))
        throw degenerate_error("estimand denominator is not positive: monotonicity is globally "
                               "violated or the focal price has zero variance");
    d.main_term = main_num.value() / d.denominator;
    d.contamination_price = price_num.value() / d.denominator;
    d.contamination_ge = ge_num.value() / d.denominator;
    d.total = d.main_term + d.contamination_price + d.contamination_ge;

    d.convex = true;
    for (std::size_t i = 0; i < n && d.convex; ++i)
        if (d.weights_main(i, 0) < 0.0) d.convex = false;
    d.weakly_causal = d.convex && ge_nonnegative;
    for (std::size_t i = 0; i < n && d.weakly_causal; ++i)
        for (std::size_t s = 0; s < S && d.weakly_causal; ++s)
            if (s != q && d.weights_cross(i, s, 0) < 0.0) d.weakly_causal = false;
    return d;
}

}  // namespace

EstimandDecomposition iv_estimand(const FinitePopulation& pop, const PriceProcessSpec& spec) {
    check_inputs(pop, spec);
    if (gamma_is_nonzero(pop))
        throw input_error("population carries nonzero cross-price loadings; use iv_estimand_ge");
    return decompose_iv(pop, spec, false);
}

EstimandDecomposition iv_estimand_ge(const FinitePopulation& pop, const PriceProcessSpec& spec) {
    check_inputs(pop, spec);
    if (!pop.gamma) throw input_error("iv_estimand_ge needs the population's gamma tensor");
    return decompose_iv(pop, spec, true);
}

EstimandDecomposition twfe_estimand(const FinitePopulation& pop, const PriceProcessSpec& spec) {
    check_inputs(pop, spec);
    if (pop.n_periods != 2)
        throw input_error("the trend-form estimand is defined for exactly two periods");

    const std::size_t n = pop.n_regions, S = pop.n_sectors;
    const std::size_t q = pop.focal_sector;
    // iid over time: differences double every variance and covariance
    const double var_dq = 2.0 * spec.variance(q);
    if (!(var_dq > 0.0)) throw degenerate_error("focal price difference has zero variance");

    EstimandDecomposition d;
    d.weights_main = Matrix(n, 1);
    d.weights_cross = Tensor3(n, S, 1);

    KahanSum denominator, main_num, price_num, ge_num, kappa_weighted, a_squared;
    bool ge_nonnegative = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double a_q = pop.exposure(i, q);
        denominator.add(a_q * a_q * var_dq);
        a_squared.add(a_q * a_q);
        kappa_weighted.add(a_q * a_q * pop.kappa(i, q));
        const double w_main = pop.kappa(i, q) * a_q * a_q * var_dq;
        d.weights_main(i, 0) = w_main;
        main_num.add(w_main * pop.beta(i, q));
        for (std::size_t s = 0; s < S; ++s) {
            if (s == q) continue;
            const double cov_ds = 2.0 * spec.cov_with_focal(s);
            const double w_cross = pop.kappa(i, s) * pop.exposure(i, s) * a_q * cov_ds;
            d.weights_cross(i, s, 0) = w_cross;
            price_num.add(w_cross * pop.beta(i, s));
        }
        if (pop.gamma) {
            for (std::size_t s = 0; s < S; ++s) {
                double ge_is = 0.0;
                for (std::size_t s2 = 0; s2 < S; ++s2)
                    if (s2 != s) ge_is += (*pop.gamma)(i, s, s2) * 2.0 * spec.cov_with_focal(s2);
                ge_is *= a_q;
                if (s != q && ge_is < 0.0) ge_nonnegative = false;
                ge_num.add(ge_is * pop.beta(i, s));
            }
        }
    }

    d.denominator = denominator.value();
    if (!(d.denominator > 0.0))
        throw degenerate_error("trend-form denominator is not positive (zero exposures?)");
    d.main_term = main_num.value() / d.denominator;
    d.contamination_price = price_num.value() / d.denominator;
    d.contamination_ge = ge_num.value() / d.denominator;
    d.total = d.main_term + d.contamination_price + d.contamination_ge;

    bool nonnegative = true;
    for (std::size_t i = 0; i < n; ++i)
        if (d.weights_main(i, 0) < 0.0) nonnegative = false;
    double kappa_mean = kappa_weighted.value() / a_squared.value();
    d.convex = nonnegative && std::abs(kappa_mean - 1.0) <= 1e-9;
    d.weakly_causal = nonnegative && ge_nonnegative;
    for (std::size_t i = 0; i < n && d.weakly_causal; ++i)
        for (std::size_t s = 0; s < S && d.weakly_causal; ++s)
            if (s != q && d.weights_cross(i, s, 0) < 0.0) d.weakly_causal = false;
    return d;
}

WeightAudit weight_audit(const EstimandDecomposition& decomposition) {
    WeightAudit audit;
    audit.convex = decomposition.convex;
    audit.weakly_causal = decomposition.weakly_causal;

    double min_weight = 0.0;
    bool first = true;
    KahanSum negative_mass, total_mass;
    auto visit = [&](double w) {
        if (first || w < min_weight) min_weight = w;
        first = false;
        total_mass.add(std::abs(w));
        if (w < 0.0) {
            negative_mass.add(-w);
            ++audit.negative_count;
        }
    };
    const Matrix& wm = decomposition.weights_main;
    for (std::size_t i = 0; i < wm.rows(); ++i)
        for (std::size_t t = 0; t < wm.cols(); ++t) visit(wm(i, t));
    const Tensor3& wc = decomposition.weights_cross;
    for (std::size_t i = 0; i < wc.dim1(); ++i)
        for (std::size_t s = 0; s < wc.dim2(); ++s)
            for (std::size_t t = 0; t < wc.dim3(); ++t)
                if (wc(i, s, t) != 0.0) visit(wc(i, s, t));

    audit.min_weight = first ? 0.0 : min_weight;
    audit.negative_mass_share =
        total_mass.value() > 0.0 ? negative_mass.value() / total_mass.value() : 0.0;
    return audit;
}

}  // namespace pexp
