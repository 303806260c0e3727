#pragma once

#include <optional>

#include "pexp/errors.hpp"

namespace pexp {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    bool contains(double x) const { return lower <= x && x <= upper; }
};

// Standard normal CDF built on a rational approximation of the complementary
// error function (Cody's coefficients); absolute error is below 1e-15 on the
// whole real line, comfortably inside the 1e-12 contract.
double normal_cdf(double x);

// Inverse of normal_cdf by bisection; p must lie strictly inside (0, 1).
double normal_quantile(double p);

// [beta_hat - b_upper, beta_hat - b_lower]: the set consistent with
// contamination anywhere inside [b_lower, b_upper].
Interval identified_set(double beta_hat, double b_lower, double b_upper);

// The critical value C solving Phi(B/se + C) - Phi(-C) = 1 - alpha, found by
// bisection on the bracket [z_{1-alpha}, z_{1-alpha/2}] where the left side is
// strictly increasing. B is the length of the identified set.
double imbens_manski_constant(double bound_length, double se, double alpha);

// Two interval conventions:
//  - symmetric: [beta_hat - C se, beta_hat + C se], the literal plug-in form;
//  - bounds_bracketing: [beta_hat - b_upper - C se, beta_hat - b_lower + C se],
//    the set-bracketing form whose endpoints expand with the bounds.
enum class ImForm { symmetric, bounds_bracketing };

const char* to_string(ImForm form);
ImForm im_form_from_string(const std::string& name);

struct SensitivityResult {
    double beta_hat = 0.0;
    double se = 0.0;
    double b_lower = 0.0;
    double b_upper = 0.0;
    double bound_lower = 0.0;  // beta_hat - b_upper
    double bound_upper = 0.0;  // beta_hat - b_lower
    double im_constant = 0.0;
    Interval im_interval;
    std::optional<double> breakdown_point;
    double alpha = 0.05;
    ImForm form = ImForm::symmetric;
};

SensitivityResult imbens_manski_interval(double beta_hat, double se_pe, double b_lower,
                                         double b_upper, double alpha,
                                         ImForm form = ImForm::symmetric);

// Smallest b >= 0 such that the bounds-bracketing interval under the symmetric
// contamination set [-b, b] contains null_value. The bracketing form is the
// one whose endpoints are monotone in b, so the search brackets cleanly; the
// symmetric plug-in interval shrinks as b grows and admits no breakdown point.
double breakdown_point(double beta_hat, double se_pe, double alpha, double null_value = 0.0);

}  // namespace pexp
