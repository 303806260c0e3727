#include "pexp/sensitivity.hpp"

#include <cmath>
#include <string>

namespace pexp {

namespace {

// Complementary error function, Cody-style rational approximations on three
// branches. Max relative error is a few ulps; the additive error of the
// resulting CDF is far below 1e-12.
double erfc_rational(double x) {
    static const double a[5] = {3.1611237438705656, 113.864154151050156, 377.485237685302021,
                                3209.37758913846947, 0.185777706184603153};
    static const double b[4] = {23.6012909523441209, 244.024637934444173, 1282.61652607737228,
                                2844.23683343917062};
    static const double c[9] = {0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                                298.635138197400131,  881.95222124176909,  1712.04761263407058,
                                2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
    static const double d[8] = {15.7449261107098347, 117.693950891312499, 537.181101862009858,
                                1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
                                3439.36767414372164, 1230.33935480374942};
    static const double p[6] = {0.305326634961232344, 0.360344899949804439, 0.125781726111229246,
                                0.0160837851487422766, 6.58749161529837803e-4,
                                0.0163153871373020978};
    static const double q[5] = {2.56852019228982242, 1.87295284992346047, 0.527905102951428412,
                                0.0605183413124413191, 0.00233520497626869185};
    static const double inv_sqrt_pi = 0.56418958354775628695;

    const double y = std::fabs(x);
    double result;
    if (y <= 0.46875) {
        double ysq = y > 1.11e-16 ? y * y : 0.0;
        double xnum = a[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + a[i]) * ysq;
            xden = (xden + b[i]) * ysq;
        }
        return 1.0 - x * (xnum + a[3]) / (xden + b[3]);
    } else if (y <= 4.0) {
        double xnum = c[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + c[i]) * y;
            xden = (xden + d[i]) * y;
        }
        result = (xnum + c[7]) / (xden + d[7]);
        double ysq = std::trunc(y * 16.0) / 16.0;
        double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    } else {
        if (y >= 26.543) {
            result = 0.0;
        } else {
            double ysq = 1.0 / (y * y);
            double xnum = p[5] * ysq;
            double xden = ysq;
            for (int i = 0; i < 4; ++i) {
                xnum = (xnum + p[i]) * ysq;
                xden = (xden + q[i]) * ysq;
            }
            result = ysq * (xnum + p[4]) / (xden + q[4]);
            result = (inv_sqrt_pi - result) / y;
            double ysq16 = std::trunc(y * 16.0) / 16.0;
            double del = (y - ysq16) * (y + ysq16);
            result *= std::exp(-ysq16 * ysq16) * std::exp(-del);
        }
    }
    return x < 0.0 ? 2.0 - result : result;
}

constexpr int kMaxBisectionIterations = 200;

}  // namespace

double normal_cdf(double x) {
    if (std::isnan(x)) throw input_error("normal_cdf needs a finite argument");
    return 0.5 * erfc_rational(-x * M_SQRT1_2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw input_error("normal_quantile needs p strictly inside (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int iter = 0; iter < kMaxBisectionIterations && hi - lo > 1e-13; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Interval identified_set(double beta_hat, double b_lower, double b_upper) {
    if (b_lower > b_upper)
        throw input_error("contamination bounds are inverted: b_lower > b_upper");
    return {beta_hat - b_upper, beta_hat - b_lower};
}

double imbens_manski_constant(double bound_length, double se, double alpha) {
    if (!(bound_length >= 0.0)) throw input_error("bound length must be nonnegative");
    if (!(se > 0.0)) throw input_error("standard error must be positive");
    if (!(alpha > 0.0 && alpha < 0.5)) throw input_error("alpha must lie in (0, 0.5)");

    const double ratio = bound_length / se;
    const double target = 1.0 - alpha;
    auto objective = [&](double c) { return normal_cdf(ratio + c) - normal_cdf(-c) - target; };

    double lo = normal_quantile(1.0 - alpha);       // objective <= 0 here
    double hi = normal_quantile(1.0 - alpha / 2.0);  // objective >= 0 here
    if (objective(lo) > 0.0) return lo;
    for (int iter = 0; iter < kMaxBisectionIterations && hi - lo > 1e-12; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (objective(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double c = 0.5 * (lo + hi);
    if (std::abs(objective(c)) > 1e-9)
        throw degenerate_error("critical-value bisection failed to converge");
    return c;
}

const char* to_string(ImForm form) {
    return form == ImForm::symmetric ? "symmetric" : "bounds_bracketing";
}

ImForm im_form_from_string(const std::string& name) {
    if (name == "symmetric") return ImForm::symmetric;
    if (name == "bounds_bracketing" || name == "bracketing") return ImForm::bounds_bracketing;
    throw input_error("unknown interval form '" + name + "'");
}

SensitivityResult imbens_manski_interval(double beta_hat, double se_pe, double b_lower,
                                         double b_upper, double alpha, ImForm form) {
    Interval set = identified_set(beta_hat, b_lower, b_upper);
    SensitivityResult result;
    result.beta_hat = beta_hat;
    result.se = se_pe;
    result.b_lower = b_lower;
    result.b_upper = b_upper;
    result.bound_lower = set.lower;
    result.bound_upper = set.upper;
    result.alpha = alpha;
    result.form = form;
    result.im_constant = imbens_manski_constant(b_upper - b_lower, se_pe, alpha);
    const double slack = result.im_constant * se_pe;
    if (form == ImForm::symmetric)
        result.im_interval = {beta_hat - slack, beta_hat + slack};
    else
        result.im_interval = {set.lower - slack, set.upper + slack};
    return result;
}

double breakdown_point(double beta_hat, double se_pe, double alpha, double null_value) {
    auto interval_at = [&](double b) {
        return imbens_manski_interval(beta_hat, se_pe, -b, b, alpha, ImForm::bounds_bracketing)
            .im_interval;
    };
    if (interval_at(0.0).contains(null_value)) return 0.0;

    // The relevant endpoint moves monotonically toward the null as b grows and
    // crosses it no later than b = |beta_hat - null|.
    double lo = 0.0, hi = std::abs(beta_hat - null_value);
    for (int iter = 0; iter < kMaxBisectionIterations && hi - lo > 1e-10; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (interval_at(mid).contains(null_value))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace pexp
