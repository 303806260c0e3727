#include "pexp/report.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pexp {

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file for hashing: '" + path + "'");
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    char buffer[4096];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize k = 0; k < in.gcount(); ++k) {
            hash ^= static_cast<unsigned char>(buffer[k]);
            hash *= 0x100000001B3ULL;
        }
        if (!in) break;
    }
    std::ostringstream out;
    out << "fnv1a:" << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

Json to_json(const VarianceReport& report) {
    return Json{{"method", to_string(report.method)},
                {"variance", report.variance},
                {"std_error", report.std_error},
                {"dof_adjustment", report.dof_adjustment},
                {"ci_95", Json{{"lower", report.ci_lower}, {"upper", report.ci_upper}}}};
}

Json to_json(const FitResult& fit) {
    Json diagnostics{{"first_stage_coefficient", fit.first_stage_coefficient},
                     {"first_stage_t", fit.first_stage_t},
                     {"weak_instrument_warning", fit.weak_instrument_warning}};
    return Json{{"kind", to_string(fit.kind)},
                {"fixed_effects", to_string(fit.fixed_effects)},
                {"coefficient", fit.coefficient},
                {"n", fit.n_regions},
                {"t", fit.n_periods},
                {"denominator", fit.denominator},
                {"diagnostics", fit.kind == FitKind::two_sls ? diagnostics : Json::object()}};
}

Json to_json(const MultiFitResult& fit) {
    Json coefficients = Json::array();
    for (std::size_t k = 0; k < fit.names.size(); ++k)
        coefficients.push_back(Json{{"name", fit.names[k]},
                                    {"coefficient", fit.coefficients[k]},
                                    {"dropped", static_cast<bool>(fit.dropped[k])}});
    return Json{{"kind", to_string(fit.kind)},
                {"fixed_effects", to_string(fit.fixed_effects)},
                {"coefficients", coefficients}};
}

Json to_json(const SensitivityResult& result) {
    Json breakdown;
    if (result.breakdown_point) breakdown = *result.breakdown_point;
    return Json{{"beta_hat", result.beta_hat},
                {"se", result.se},
                {"alpha", result.alpha},
                {"b_lower", result.b_lower},
                {"b_upper", result.b_upper},
                {"identified_set", Json{{"lower", result.bound_lower}, {"upper", result.bound_upper}}},
                {"im_form", to_string(result.form)},
                {"im_constant", result.im_constant},
                {"im_interval",
                 Json{{"lower", result.im_interval.lower}, {"upper", result.im_interval.upper}}},
                {"breakdown_point", breakdown}};
}

Json to_json(const EstimandDecomposition& decomposition, bool include_weights) {
    Json out{{"main_term", decomposition.main_term},
             {"contamination_price", decomposition.contamination_price},
             {"contamination_ge", decomposition.contamination_ge},
             {"total", decomposition.total},
             {"denominator", decomposition.denominator},
             {"convex", decomposition.convex},
             {"weakly_causal", decomposition.weakly_causal}};
    // weight matrices only below the size guard
    if (include_weights && decomposition.weights_main.size() <= 10000) {
        Json main_rows = Json::array();
        const Matrix& wm = decomposition.weights_main;
        for (std::size_t i = 0; i < wm.rows(); ++i) {
            Json row = Json::array();
            for (std::size_t t = 0; t < wm.cols(); ++t) row.push_back(wm(i, t));
            main_rows.push_back(std::move(row));
        }
        out["weights_main"] = std::move(main_rows);
        const Tensor3& wc = decomposition.weights_cross;
        Json cross = Json::array();
        for (std::size_t s = 0; s < wc.dim2(); ++s) {
            Json sector_rows = Json::array();
            bool nonzero = false;
            for (std::size_t i = 0; i < wc.dim1(); ++i) {
                Json row = Json::array();
                for (std::size_t t = 0; t < wc.dim3(); ++t) {
                    row.push_back(wc(i, s, t));
                    if (wc(i, s, t) != 0.0) nonzero = true;
                }
                sector_rows.push_back(std::move(row));
            }
            if (nonzero)
                cross.push_back(Json{{"sector", s}, {"weights", std::move(sector_rows)}});
        }
        out["weights_cross"] = std::move(cross);
    }
    return out;
}

Json to_json(const WeightAudit& audit) {
    return Json{{"min_weight", audit.min_weight},
                {"negative_mass_share", audit.negative_mass_share},
                {"negative_count", audit.negative_count},
                {"convex", audit.convex},
                {"weakly_causal", audit.weakly_causal}};
}

Json to_json(const FirstStageProfile& profile) {
    auto vec = [](const std::vector<double>& v) { return Json(v); };
    Json monotone = Json::array();
    for (char m : profile.monotone) monotone.push_back(static_cast<bool>(m));
    return Json{{"focal_sector", profile.focal_sector},
                {"delta", vec(profile.delta)},
                {"internal_delta", profile.internal_delta},
                {"lambda", vec(profile.lambda)},
                {"wage_elasticity", vec(profile.wage_elasticity)},
                {"exposure_index", vec(profile.exposure_index)},
                {"kappa", vec(profile.kappa)},
                {"kappa_tilde", vec(profile.kappa_tilde)},
                {"alpha", vec(profile.alpha)},
                {"kappa_efficiency", vec(profile.kappa_efficiency)},
                {"monotone", monotone}};
}

Json to_json(const MCReport& report) {
    Json methods = Json::array();
    for (const auto& m : report.methods)
        methods.push_back(Json{{"method", to_string(m.method)},
                               {"mean_se", m.mean_se},
                               {"coverage", m.coverage},
                               {"coverage_vs_unit", m.coverage_vs_unit},
                               {"coverage_mc_se", m.coverage_mc_se}});
    return Json{{"scenario", report.scenario_name},
                {"n_regions", report.n_regions},
                {"n_periods", report.n_periods},
                {"n_sectors", report.n_sectors},
                {"replications", report.replications},
                {"excluded", report.excluded},
                {"master_seed", report.master_seed},
                {"estimand", report.estimand},
                {"mean_bias", report.mean_bias},
                {"mean_bias_vs_unit", report.mean_bias_vs_unit},
                {"methods", methods},
                {"annotation", report.annotation}};
}

Json to_json(const HeterogeneityDiagnostic& diagnostic) {
    return Json{{"d1", diagnostic.d1},
                {"d2", diagnostic.d2},
                {"d3", diagnostic.d3},
                {"conservative", diagnostic.conservative}};
}

Json EstimateReport::to_json() const {
    Json estimates = Json::object();
    for (const auto& line : lines) {
        Json entry = pexp::to_json(line.fit);
        Json ses = Json::object();
        for (const auto& v : line.variances) ses[to_string(v.method)] = pexp::to_json(v);
        entry["std_errors"] = std::move(ses);
        estimates[line.name] = std::move(entry);
    }
    Json out{{"spec", spec}, {"metadata", metadata}, {"estimates", std::move(estimates)}};
    if (sensitivity) out["sensitivity"] = pexp::to_json(*sensitivity);
    return out;
}

}  // namespace pexp
