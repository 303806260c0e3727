#include <doctest.h>

#include <cmath>

#include "pexp/rng.hpp"
#include "pexp/sensitivity.hpp"

using namespace pexp;

TEST_CASE("normal_cdf: anchor values and symmetry") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));
    for (double x : {-8.0, -3.2, -1.0, -0.1, 0.3, 1.7, 2.9, 6.5}) {
        CHECK(normal_cdf(x) + normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("normal_cdf: agrees with the standard-library erfc route") {
    for (double x = -37.0; x <= 37.0; x += 0.0625) {
        double reference = 0.5 * std::erfc(-x * M_SQRT1_2);
        CHECK(std::fabs(normal_cdf(x) - reference) < 1e-14);
    }
    CHECK(normal_cdf(-40.0) == 0.0);
    CHECK(normal_cdf(40.0) == 1.0);
}

TEST_CASE("normal_quantile: inverts the CDF") {
    for (double p : {0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK_THROWS_AS(normal_quantile(0.0), input_error);
    CHECK_THROWS_AS(normal_quantile(1.0), input_error);
}

TEST_CASE("identified_set: point, shifted, and symmetric cases") {
    Interval point = identified_set(0.7, 0.0, 0.0);
    CHECK(point.lower == 0.7);
    CHECK(point.upper == 0.7);

    Interval shifted = identified_set(0.5, -0.1, 0.2);
    CHECK(shifted.lower == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(shifted.upper == doctest::Approx(0.6).epsilon(1e-15));

    Interval symmetric = identified_set(1.2, -0.4, 0.4);
    CHECK(symmetric.lower == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(symmetric.upper == doctest::Approx(1.6).epsilon(1e-15));

    CHECK_THROWS_AS(identified_set(0.0, 0.3, -0.3), input_error);
}

TEST_CASE("imbens_manski_constant: limiting quantiles") {
    CHECK(imbens_manski_constant(0.0, 1.0, 0.05) == doctest::Approx(1.959964).epsilon(1e-6));
    // a huge set length forces the one-sided quantile
    CHECK(imbens_manski_constant(10.0, 1.0, 0.05) == doctest::Approx(1.644854).epsilon(1e-4));
}

TEST_CASE("imbens_manski_constant: residual, bracket, and monotonicity on a grid") {
    for (double alpha : {0.01, 0.05, 0.10, 0.32}) {
        double z_lo = normal_quantile(1.0 - alpha);
        double z_hi = normal_quantile(1.0 - alpha / 2.0);
        double previous = z_hi + 1e-9;
        for (double ratio : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            double c = imbens_manski_constant(ratio, 1.0, alpha);
            CHECK(c >= z_lo - 1e-9);
            CHECK(c <= z_hi + 1e-9);
            double residual = normal_cdf(ratio + c) - normal_cdf(-c) - (1.0 - alpha);
            CHECK(std::fabs(residual) < 1e-10);
            CHECK(c <= previous + 1e-12);  // decreasing in the length/se ratio
            previous = c;
        }
    }
    CHECK_THROWS_AS(imbens_manski_constant(1.0, 0.0, 0.05), input_error);
    CHECK_THROWS_AS(imbens_manski_constant(1.0, 1.0, 0.7), input_error);
}

TEST_CASE("imbens_manski_interval: degenerate set recovers the Wald interval") {
    SensitivityResult result = imbens_manski_interval(0.535, 0.476, 0.0, 0.0, 0.05);
    CHECK(result.im_constant == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(result.im_interval.lower == doctest::Approx(-0.398).epsilon(1e-3));
    CHECK(result.im_interval.upper == doctest::Approx(1.468).epsilon(1e-3));
    CHECK(result.im_interval.contains(0.0));
    CHECK(result.bound_lower == result.bound_upper);
}

TEST_CASE("imbens_manski_interval: bracketing form expands with the bounds") {
    double previous_lower = 1e300, previous_upper = -1e300;
    for (double b : {0.0, 0.1, 0.3, 0.8, 2.0}) {
        SensitivityResult result =
            imbens_manski_interval(1.0, 0.25, -b, b, 0.05, ImForm::bounds_bracketing);
        CHECK(result.im_interval.lower <= previous_lower + 1e-12);
        CHECK(result.im_interval.upper >= previous_upper - 1e-12);
        previous_lower = result.im_interval.lower;
        previous_upper = result.im_interval.upper;
        // invariants on the filled result
        CHECK(result.bound_lower == doctest::Approx(1.0 - b));
        CHECK(result.bound_upper == doctest::Approx(1.0 + b));
    }
    // as se -> 0 the bracketing interval converges to the identified set
    SensitivityResult tight =
        imbens_manski_interval(1.0, 1e-9, -0.2, 0.3, 0.05, ImForm::bounds_bracketing);
    CHECK(tight.im_interval.lower == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(tight.im_interval.upper == doctest::Approx(1.2).epsilon(1e-6));
}

TEST_CASE("breakdown_point: zero when already covered, the limit case, grid oracle") {
    CHECK(breakdown_point(0.1, 1.0, 0.05, 0.0) == 0.0);

    // tiny standard error: contamination must walk the bound to the null
    CHECK(breakdown_point(1.0, 1e-9, 0.05, 0.0) == doctest::Approx(1.0).epsilon(1e-6));

    // grid-search oracle
    const double beta_hat = 1.0, se = 0.1, alpha = 0.05;
    double direct = breakdown_point(beta_hat, se, alpha, 0.0);
    double grid = -1.0;
    for (double b = 0.0; b <= 1.2; b += 1e-6) {
        SensitivityResult r =
            imbens_manski_interval(beta_hat, se, -b, b, alpha, ImForm::bounds_bracketing);
        if (r.im_interval.contains(0.0)) {
            grid = b;
            break;
        }
    }
    REQUIRE(grid >= 0.0);
    CHECK(std::fabs(direct - grid) < 1e-6 + 1e-6);

    // monotone in |beta_hat - null| and in 1/se
    CHECK(breakdown_point(2.0, 0.1, 0.05) >= breakdown_point(1.0, 0.1, 0.05));
    CHECK(breakdown_point(1.0, 0.05, 0.05) >= breakdown_point(1.0, 0.2, 0.05));

    // null above the estimate works symmetrically
    CHECK(breakdown_point(-1.0, 1e-9, 0.05, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
}
