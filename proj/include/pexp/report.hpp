#pragma once

#include <json.hpp>

#include "pexp/estimands.hpp"
#include "pexp/estimators.hpp"
#include "pexp/inference.hpp"
#include "pexp/labor_model.hpp"
#include "pexp/montecarlo.hpp"
#include "pexp/sensitivity.hpp"

namespace pexp {

using Json = nlohmann::ordered_json;

// FNV-1a 64-bit over file bytes, hex encoded; recorded for provenance.
std::string hash_file(const std::string& path);

Json to_json(const VarianceReport& report);
Json to_json(const FitResult& fit);
Json to_json(const MultiFitResult& fit);
Json to_json(const SensitivityResult& result);
Json to_json(const EstimandDecomposition& decomposition, bool include_weights);
Json to_json(const WeightAudit& audit);
Json to_json(const FirstStageProfile& profile);
Json to_json(const MCReport& report);  // wall time deliberately excluded
Json to_json(const HeterogeneityDiagnostic& diagnostic);

// Full estimation pipeline output: first-stage, reduced-form, OLS and
// instrumented coefficients with the requested standard errors side by side.
struct EstimateReport {
    Json spec;
    Json metadata;
    struct Line {
        std::string name;
        FitResult fit;
        std::vector<VarianceReport> variances;
    };
    std::vector<Line> lines;
    std::optional<SensitivityResult> sensitivity;

    Json to_json() const;
};

}  // namespace pexp
