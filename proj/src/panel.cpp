#include "pexp/panel.hpp"

#include <cmath>
#include <iostream>

namespace pexp {

namespace {

void require_finite(const Matrix& m, const std::string& what) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t t = 0; t < m.cols(); ++t)
            if (!std::isfinite(m(i, t)))
                throw input_error(what + " has a non-finite entry at (" + std::to_string(i) +
                                  ", " + std::to_string(t) + ")");
}

}  // namespace

void Panel::validate() const {
    if (n_regions < 1 || n_periods < 1)
        throw input_error("panel needs at least one region and one period");
    outcome.require_shape(n_regions, n_periods, "outcome");
    require_finite(outcome, "outcome");
    if (treatment) {
        treatment->require_shape(n_regions, n_periods, "treatment");
        require_finite(*treatment, "treatment");
    }
    if (exposure.size() != n_regions)
        throw input_error("exposure length " + std::to_string(exposure.size()) +
                          " does not match N=" + std::to_string(n_regions));
    bool warned = false;
    for (std::size_t i = 0; i < n_regions; ++i) {
        if (!std::isfinite(exposure[i]))
            throw input_error("exposure has a non-finite entry for region " + std::to_string(i));
        if (exposure[i] < 0.0 && !warned) {
            std::cerr << "warning: negative exposure for region "
                      << (region_labels.size() == n_regions ? region_labels[i] : std::to_string(i))
                      << "; monotonicity diagnostics assume positive exposures\n";
            warned = true;
        }
    }
    if (cluster_id && cluster_id->size() != n_regions)
        throw input_error("cluster_id length does not match N");
}

void PriceSystem::validate() const {
    if (n_sectors < 1 || n_periods < 1) throw input_error("price system needs S >= 1, T >= 1");
    if (focal_sector >= n_sectors)
        throw input_error("focal sector index " + std::to_string(focal_sector) +
                          " out of range (S=" + std::to_string(n_sectors) + ")");
    log_prices.require_shape(n_sectors, n_periods, "log_prices");
    if (variances) {
        variances->require_shape(n_sectors, n_periods, "variances");
        for (std::size_t s = 0; s < n_sectors; ++s)
            for (std::size_t t = 0; t < n_periods; ++t)
                if ((*variances)(s, t) < 0.0)
                    throw input_error("negative price variance at sector " + std::to_string(s) +
                                      ", period " + std::to_string(t));
    }
    if (covariances_with_focal) {
        covariances_with_focal->require_shape(n_sectors, n_periods, "covariances_with_focal");
        if (variances) {
            for (std::size_t t = 0; t < n_periods; ++t) {
                double v = (*variances)(focal_sector, t);
                double c = (*covariances_with_focal)(focal_sector, t);
                if (std::abs(v - c) > 1e-12 * std::max(1.0, std::abs(v)))
                    throw input_error("focal covariance-with-self must equal focal variance");
            }
        }
    }
}

Matrix center_log_prices(const Matrix& raw_prices) {
    Matrix out(raw_prices.rows(), raw_prices.cols());
    for (std::size_t s = 0; s < raw_prices.rows(); ++s) {
        KahanSum mean;
        for (std::size_t t = 0; t < raw_prices.cols(); ++t) {
            double p = raw_prices(s, t);
            if (!(p > 0.0))
                throw input_error("nonpositive price in sector " + std::to_string(s) +
                                  " at period " + std::to_string(t));
            out(s, t) = std::log(p);
            mean.add(out(s, t));
        }
        double m = mean.value() / static_cast<double>(raw_prices.cols());
        for (std::size_t t = 0; t < raw_prices.cols(); ++t) out(s, t) -= m;
    }
    return out;
}

InstrumentMatrix build_instrument(const Panel& panel, const PriceSystem& prices) {
    if (prices.n_periods != panel.n_periods)
        throw input_error("price periods (" + std::to_string(prices.n_periods) +
                          ") do not match panel periods (" + std::to_string(panel.n_periods) + ")");
    if (panel.exposure.size() != panel.n_regions)
        throw input_error("exposure length does not match panel");
    InstrumentMatrix z{Matrix(panel.n_regions, panel.n_periods)};
    for (std::size_t i = 0; i < panel.n_regions; ++i)
        for (std::size_t t = 0; t < panel.n_periods; ++t)
            z.values(i, t) = panel.exposure[i] * prices.focal_price(t);
    return z;
}

Matrix within_transform(const Matrix& m) {
    const std::size_t n = m.rows(), T = m.cols();
    std::vector<double> row_mean(n), col_mean(T);
    KahanSum grand;
    for (std::size_t i = 0; i < n; ++i) {
        KahanSum acc;
        for (std::size_t t = 0; t < T; ++t) acc.add(m(i, t));
        row_mean[i] = acc.value() / static_cast<double>(T);
        grand.add(acc.value());
    }
    for (std::size_t t = 0; t < T; ++t) {
        KahanSum acc;
        for (std::size_t i = 0; i < n; ++i) acc.add(m(i, t));
        col_mean[t] = acc.value() / static_cast<double>(n);
    }
    double g = grand.value() / static_cast<double>(n * T);
    Matrix out(n, T);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < T; ++t) out(i, t) = m(i, t) - row_mean[i] - col_mean[t] + g;
    return out;
}

Matrix first_difference(const Matrix& m) {
    if (m.cols() < 2) throw input_error("first difference needs at least two periods");
    Matrix out(m.rows(), m.cols() - 1);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t t = 0; t + 1 < m.cols(); ++t) out(i, t) = m(i, t + 1) - m(i, t);
    return out;
}

Matrix apply_fixed_effects(const Matrix& m, FixedEffects fe) {
    switch (fe) {
        case FixedEffects::none:
            return m;
        case FixedEffects::region: {
            Matrix out(m.rows(), m.cols());
            for (std::size_t i = 0; i < m.rows(); ++i) {
                KahanSum acc;
                for (std::size_t t = 0; t < m.cols(); ++t) acc.add(m(i, t));
                double mean = acc.value() / static_cast<double>(m.cols());
                for (std::size_t t = 0; t < m.cols(); ++t) out(i, t) = m(i, t) - mean;
            }
            return out;
        }
        case FixedEffects::time: {
            Matrix out(m.rows(), m.cols());
            for (std::size_t t = 0; t < m.cols(); ++t) {
                KahanSum acc;
                for (std::size_t i = 0; i < m.rows(); ++i) acc.add(m(i, t));
                double mean = acc.value() / static_cast<double>(m.rows());
                for (std::size_t i = 0; i < m.rows(); ++i) out(i, t) = m(i, t) - mean;
            }
            return out;
        }
        case FixedEffects::two_way:
            return within_transform(m);
    }
    throw input_error("unknown fixed-effects mode");
}

const char* to_string(FixedEffects fe) {
    switch (fe) {
        case FixedEffects::none: return "none";
        case FixedEffects::region: return "region";
        case FixedEffects::time: return "time";
        case FixedEffects::two_way: return "two_way";
    }
    return "?";
}

FixedEffects fixed_effects_from_string(const std::string& name) {
    if (name == "none") return FixedEffects::none;
    if (name == "region") return FixedEffects::region;
    if (name == "time") return FixedEffects::time;
    if (name == "two_way" || name == "twoway" || name == "two-way") return FixedEffects::two_way;
    throw input_error("unknown fixed-effects mode '" + name + "'");
}

}  // namespace pexp
