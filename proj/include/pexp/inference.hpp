#pragma once

#include <string>

#include "pexp/dgp.hpp"
#include "pexp/estimators.hpp"

namespace pexp {

enum class VarianceMethod { ehw, cluster_region, cluster_time, price_exposure };

const char* to_string(VarianceMethod method);
VarianceMethod variance_method_from_string(const std::string& name);

// Normal critical value for 95% intervals; the asymptotics are normal, so no
// t correction is applied.
inline constexpr double kCritical95 = 1.959964;

struct VarianceOptions {
    // The robust and clustered meats always use the FE-transformed score
    // z~ * u (the conventional sandwich). The price-exposure meat is written
    // with the untransformed exposure and price, exactly as the plug-in
    // formula reads; pe_transformed_score switches it to z~ * u as well.
    //
    // With sample-centered prices (the canonical pipeline) the two coincide
    // and the price-exposure variance equals CR0 clustered by period exactly;
    // under the variant flag that identity holds on every input.
    bool pe_transformed_score = false;
    bool cr1 = false;  // multiply cluster meat by G/(G-1)
};

struct VarianceReport {
    VarianceMethod method = VarianceMethod::ehw;
    double variance = 0.0;
    double std_error = 0.0;
    std::string dof_adjustment;  // "none (CR0)" or "G/(G-1)"
    double ci_lower = 0.0;
    double ci_upper = 0.0;
};

// (1/NT) sum_t p_t^2 (sum_i A_i u_it)^2, sandwiched with the fit's
// denominator; equals CR0 clustered by period exactly.
VarianceReport pe_variance(const FitResult& fit, const VarianceOptions& options = {});

// Heteroskedasticity-robust sandwich: meat (1/NT) sum (z u)^2.
VarianceReport ehw_variance(const FitResult& fit, const VarianceOptions& options = {});

enum class ClusterBy { region, time };

// CR0 with optional G/(G-1) factor. Region mode uses panel cluster ids when
// present, else the region index; requires at least two clusters.
VarianceReport cluster_variance(const FitResult& fit, const Panel& panel, ClusterBy by,
                                const VarianceOptions& options = {});

// Decomposition of the randomization variance of the score sum into the
// per-period term D1 (what the plug-in estimates), the cross-period term D2,
// and the squared-mean term D3: V = D1 + D2 - D3. Under serially independent
// prices D2 = 0 and the plug-in is conservative by D3 >= 0. Oracle contexts
// only: needs the full population and analytic price moments.
struct HeterogeneityDiagnostic {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    bool conservative = false;  // D2 ~ 0, so the plug-in weakly over-covers
};
HeterogeneityDiagnostic heterogeneity_diagnostic(const FinitePopulation& pop,
                                                 const PriceProcessSpec& spec,
                                                 double beta_target);

}  // namespace pexp
