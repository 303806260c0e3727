#include "pexp/estimators.hpp"

#include <cmath>

namespace pexp {

namespace {

// sum over all cells of a .* b, fixed order (regions outer, periods inner)
double cross_sum(const Matrix& a, const Matrix& b) {
    KahanSum acc;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t t = 0; t < a.cols(); ++t) acc.add(a(i, t) * b(i, t));
    return acc.value();
}

struct SingleFit {
    double coefficient;
    double denominator_sum;  // raw sum z~ x~
    Matrix residuals;
};

SingleFit fit_single(const Matrix& y_tilde, const Matrix& x_tilde, const Matrix& z_tilde) {
    double zx = cross_sum(z_tilde, x_tilde);
    double zz = cross_sum(z_tilde, z_tilde);
    double xx = cross_sum(x_tilde, x_tilde);
    if (std::abs(zx) <= 1e-12 * std::sqrt(zz * xx) || zx == 0.0) {
        double fs = zz > 0.0 ? zx / zz : 0.0;
        throw degenerate_error("instrument and regressor are numerically orthogonal "
                               "(first-stage coefficient " +
                               std::to_string(fs) + ")");
    }
    double zy = cross_sum(z_tilde, y_tilde);
    SingleFit fit;
    fit.coefficient = zy / zx;
    fit.denominator_sum = zx;
    fit.residuals = Matrix(y_tilde.rows(), y_tilde.cols());
    for (std::size_t i = 0; i < y_tilde.rows(); ++i)
        for (std::size_t t = 0; t < y_tilde.cols(); ++t)
            fit.residuals(i, t) = y_tilde(i, t) - x_tilde(i, t) * fit.coefficient;
    return fit;
}

// EHW t-ratio of the regression of x~ on z~; used for the weak-instrument flag.
double first_stage_t_ratio(const Matrix& x_tilde, const Matrix& z_tilde, double* coefficient) {
    double zz = cross_sum(z_tilde, z_tilde);
    if (zz <= 0.0) {
        *coefficient = 0.0;
        return 0.0;
    }
    double zx = cross_sum(z_tilde, x_tilde);
    double coef = zx / zz;
    *coefficient = coef;
    KahanSum meat;
    for (std::size_t i = 0; i < z_tilde.rows(); ++i)
        for (std::size_t t = 0; t < z_tilde.cols(); ++t) {
            double v = x_tilde(i, t) - coef * z_tilde(i, t);
            meat.add(z_tilde(i, t) * z_tilde(i, t) * v * v);
        }
    double var = meat.value() / (zz * zz);
    return var > 0.0 ? coef / std::sqrt(var) : 0.0;
}

FitResult run_fit(FitKind kind, const Panel& panel, const PriceSystem& prices,
                  const EstimatorSpec& spec) {
    panel.validate();
    prices.validate();
    if (prices.n_periods != panel.n_periods)
        throw input_error("price periods do not match panel periods");

    const bool needs_treatment =
        kind == FitKind::two_sls || kind == FitKind::first_stage || kind == FitKind::ols;
    if (needs_treatment && !panel.treatment)
        throw input_error(std::string(to_string(kind)) + " requires a treatment column");

    InstrumentMatrix z = build_instrument(panel, prices);

    FitResult result;
    result.kind = kind;
    result.fixed_effects = spec.fixed_effects;
    result.n_regions = panel.n_regions;
    result.exposure = panel.exposure;

    Matrix y_raw, x_raw, z_raw;
    std::vector<double> score_prices(panel.n_periods);
    for (std::size_t t = 0; t < panel.n_periods; ++t) score_prices[t] = prices.focal_price(t);

    if (kind == FitKind::twfe_first_diff) {
        if (panel.n_periods < 2) throw input_error("first-difference fit needs T >= 2");
        if (panel.n_periods > 2 && !spec.pooled_differences)
            throw input_error("first-difference fit needs T = 2 (set pooled_differences for T > 2)");
        y_raw = first_difference(panel.outcome);
        z_raw = first_difference(z.values);
        x_raw = z_raw;
        result.score_prices.resize(panel.n_periods - 1);
        for (std::size_t t = 0; t + 1 < panel.n_periods; ++t)
            result.score_prices[t] = score_prices[t + 1] - score_prices[t];
        // differencing removed region effects; demean columns to absorb period effects
        result.n_periods = panel.n_periods - 1;
        Matrix y_tilde = apply_fixed_effects(y_raw, FixedEffects::time);
        Matrix z_tilde = apply_fixed_effects(z_raw, FixedEffects::time);
        SingleFit fit = fit_single(y_tilde, z_tilde, z_tilde);
        result.coefficient = fit.coefficient;
        result.denominator =
            fit.denominator_sum / static_cast<double>(result.n_regions * result.n_periods);
        result.residuals = std::move(fit.residuals);
        result.score_raw = std::move(z_raw);
        result.score_tilde = std::move(z_tilde);
        return result;
    }

    result.n_periods = panel.n_periods;
    result.score_prices = std::move(score_prices);

    switch (kind) {
        case FitKind::two_sls:
            y_raw = panel.outcome;
            x_raw = *panel.treatment;
            z_raw = z.values;
            break;
        case FitKind::reduced_form:
        case FitKind::twfe_within:
            y_raw = panel.outcome;
            x_raw = z.values;
            z_raw = z.values;
            break;
        case FitKind::first_stage:
            y_raw = *panel.treatment;
            x_raw = z.values;
            z_raw = z.values;
            break;
        case FitKind::ols:
            y_raw = panel.outcome;
            x_raw = *panel.treatment;
            z_raw = *panel.treatment;
            break;
        case FitKind::twfe_first_diff:
            break;  // handled above
    }

    FixedEffects fe =
        kind == FitKind::twfe_within ? FixedEffects::two_way : spec.fixed_effects;
    result.fixed_effects = fe;
    if ((fe == FixedEffects::two_way || fe == FixedEffects::time) && panel.n_periods < 1)
        throw input_error("time effects need T >= 1");

    Matrix y_tilde = apply_fixed_effects(y_raw, fe);
    Matrix x_tilde = apply_fixed_effects(x_raw, fe);
    Matrix z_tilde = apply_fixed_effects(z_raw, fe);

    SingleFit fit = fit_single(y_tilde, x_tilde, z_tilde);
    result.coefficient = fit.coefficient;
    result.denominator =
        fit.denominator_sum / static_cast<double>(panel.n_regions * panel.n_periods);
    result.residuals = std::move(fit.residuals);

    if (kind == FitKind::two_sls) {
        result.first_stage_t = first_stage_t_ratio(x_tilde, z_tilde, &result.first_stage_coefficient);
        result.weak_instrument_warning = std::abs(result.first_stage_t) < 1.0;
    }

    result.score_raw = std::move(z_raw);
    result.score_tilde = std::move(z_tilde);
    return result;
}

}  // namespace

const char* to_string(FitKind kind) {
    switch (kind) {
        case FitKind::two_sls: return "two_sls";
        case FitKind::reduced_form: return "reduced_form";
        case FitKind::first_stage: return "first_stage";
        case FitKind::ols: return "ols";
        case FitKind::twfe_within: return "twfe_within";
        case FitKind::twfe_first_diff: return "twfe_first_diff";
    }
    return "?";
}

FitKind fit_kind_from_string(const std::string& name) {
    for (FitKind k : {FitKind::two_sls, FitKind::reduced_form, FitKind::first_stage, FitKind::ols,
                      FitKind::twfe_within, FitKind::twfe_first_diff})
        if (name == to_string(k)) return k;
    throw input_error("unknown estimator kind '" + name + "'");
}

FitResult fit_2sls(const Panel& panel, const PriceSystem& prices, const EstimatorSpec& spec) {
    return run_fit(FitKind::two_sls, panel, prices, spec);
}

FitResult fit_reduced_form(const Panel& panel, const PriceSystem& prices,
                           const EstimatorSpec& spec) {
    return run_fit(FitKind::reduced_form, panel, prices, spec);
}

FitResult fit_first_stage(const Panel& panel, const PriceSystem& prices,
                          const EstimatorSpec& spec) {
    return run_fit(FitKind::first_stage, panel, prices, spec);
}

FitResult fit_ols(const Panel& panel, const PriceSystem& prices, const EstimatorSpec& spec) {
    return run_fit(FitKind::ols, panel, prices, spec);
}

FitResult fit_twfe(const Panel& panel, const PriceSystem& prices, const EstimatorSpec& spec) {
    FitKind kind = spec.kind == FitKind::twfe_first_diff ? FitKind::twfe_first_diff
                                                         : FitKind::twfe_within;
    return run_fit(kind, panel, prices, spec);
}

MultiFitResult fit_multiprice(const Panel& panel, const PriceSystem& prices,
                              const EstimatorSpec& spec) {
    panel.validate();
    prices.validate();
    if (spec.extra_exposures.empty())
        throw input_error("multi-price fit needs at least one extra exposure control");
    const std::size_t n = panel.n_regions, T = panel.n_periods;
    const bool is_2sls = spec.kind == FitKind::two_sls;
    if (is_2sls && !panel.treatment) throw input_error("two_sls requires a treatment column");
    if (!is_2sls && spec.kind != FitKind::reduced_form)
        throw input_error("multi-price fit supports two_sls or reduced_form");

    auto control_matrix = [&](const ExposurePriceControl& c) {
        if (c.exposure.size() != n || c.prices.size() != T)
            throw input_error("control '" + c.name + "' has mismatched dimensions");
        Matrix m(n, T);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < T; ++t) m(i, t) = c.exposure[i] * c.prices[t];
        return m;
    };

    InstrumentMatrix z = build_instrument(panel, prices);
    const std::size_t k = spec.extra_exposures.size() + 1;

    std::vector<std::string> names;
    std::vector<Matrix> regressors;  // W columns
    std::vector<Matrix> instruments; // V columns
    names.push_back("focal");
    regressors.push_back(apply_fixed_effects(is_2sls ? *panel.treatment : z.values,
                                             spec.fixed_effects));
    instruments.push_back(apply_fixed_effects(z.values, spec.fixed_effects));
    for (const auto& c : spec.extra_exposures) {
        names.push_back(c.name.empty() ? "control" + std::to_string(names.size()) : c.name);
        Matrix w = apply_fixed_effects(control_matrix(c), spec.fixed_effects);
        regressors.push_back(w);
        instruments.push_back(std::move(w));
    }
    Matrix y_tilde = apply_fixed_effects(panel.outcome, spec.fixed_effects);

    // Modified Gram-Schmidt over instrument columns: zero columns are dropped,
    // dependent nonzero columns are a hard error.
    std::vector<bool> dropped(k, false);
    {
        std::vector<Matrix> basis;
        for (std::size_t c = 0; c < k; ++c) {
            Matrix v = instruments[c];
            double norm0 = std::sqrt(cross_sum(v, v));
            if (norm0 == 0.0) {
                if (c == 0) throw degenerate_error("focal instrument is identically zero");
                dropped[c] = true;
                continue;
            }
            for (const Matrix& b : basis) {
                double proj = cross_sum(b, v);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t t = 0; t < T; ++t) v(i, t) -= proj * b(i, t);
            }
            double norm1 = std::sqrt(cross_sum(v, v));
            if (norm1 <= 1e-10 * norm0)
                throw degenerate_error("regressor '" + names[c] +
                                       "' is collinear with the preceding regressors");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t t = 0; t < T; ++t) v(i, t) /= norm1;
            basis.push_back(std::move(v));
        }
    }

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < k; ++c)
        if (!dropped[c]) kept.push_back(c);
    const std::size_t m = kept.size();

    // normal equations V'W b = V'y over the kept block
    std::vector<std::vector<double>> g(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c)
            g[r][c] = cross_sum(instruments[kept[r]], regressors[kept[c]]);
        g[r][m] = cross_sum(instruments[kept[r]], y_tilde);
    }
    // Gaussian elimination with partial pivoting
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(g[r][col]) > std::abs(g[pivot][col])) pivot = r;
        if (std::abs(g[pivot][col]) == 0.0)
            throw degenerate_error("normal equations are singular at regressor '" +
                                   names[kept[col]] + "'");
        std::swap(g[col], g[pivot]);
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = g[r][col] / g[col][col];
            for (std::size_t c = col; c <= m; ++c) g[r][c] -= f * g[col][c];
        }
    }
    std::vector<double> solution(m, 0.0);
    for (std::size_t r = m; r-- > 0;) {
        double v = g[r][m];
        for (std::size_t c = r + 1; c < m; ++c) v -= g[r][c] * solution[c];
        solution[r] = v / g[r][r];
    }

    MultiFitResult result;
    result.kind = spec.kind;
    result.fixed_effects = spec.fixed_effects;
    result.names = names;
    result.dropped.assign(dropped.begin(), dropped.end());
    result.coefficients.assign(k, 0.0);
    for (std::size_t j = 0; j < m; ++j) result.coefficients[kept[j]] = solution[j];
    result.residuals = y_tilde;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < T; ++t)
                result.residuals(i, t) -= solution[j] * regressors[kept[j]](i, t);
    return result;
}

}  // namespace pexp
