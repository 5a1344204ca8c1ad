// Anti-concentration and Gaussian comparison probes.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hdboot/bootstrap.hpp"
#include "hdboot/diagnostics.hpp"
#include "hdboot/distributions.hpp"
#include "hdboot/sampling.hpp"

using hdboot::CovMatrix;
using hdboot::LpExponent;

TEST_CASE("anti_concentration_scale: finite and logarithmic branches", "[diagnostics]")
{
    CHECK(hdboot::anti_concentration_scale(LpExponent::finite(2.0), 100, 16.0) == Catch::Approx(std::sqrt(8.0)));
    CHECK(hdboot::anti_concentration_scale(LpExponent::finite(4.0), 100, 1.0) == Catch::Approx(2.0));
    CHECK(hdboot::anti_concentration_scale(LpExponent::log_dim(), 100, 7.0) == Catch::Approx(std::sqrt(std::log(100.0))));
    CHECK(hdboot::anti_concentration_scale(LpExponent::infinity(), 50, 7.0) == Catch::Approx(std::sqrt(std::log(50.0))));
    CHECK_THROWS_AS(hdboot::anti_concentration_scale(LpExponent::infinity(), 2, 1.0), std::invalid_argument);
}

TEST_CASE("levy_concentration: sliding window equals a brute-force scan", "[diagnostics][levy]")
{
    const auto s = CovMatrix::identity(10);
    const hdboot::RngSeed seed(3);
    const double eps = 0.3;
    const auto report = hdboot::levy_concentration(s, LpExponent::finite(2.0), eps, 1000, seed);
    const double width = eps * std::sqrt(10.0) / std::sqrt(2.0 * std::sqrt(10.0));
    const auto draws = hdboot::proxy_draws(s, LpExponent::finite(2.0), 1000, seed);
    std::size_t best = 0;
    for (double t : draws.samples()) {
        std::size_t count = 0;
        for (double v : draws.samples()) count += (v >= t && v <= t + width) ? 1 : 0;
        best = std::max(best, count);
    }
    CHECK(report.estimate == Catch::Approx(best / 1000.0));
    CHECK(report.bound == eps);
    CHECK(report.pass == (report.estimate <= 10.0 * eps));
}

TEST_CASE("levy_concentration: one dimension matches the half-normal mass at zero", "[diagnostics][levy]")
{
    // ||X||_2 = |Z| and the densest window starts at 0: P(|Z| <= w) = 2 Phi(w) - 1, w = eps / sqrt(2).
    const double eps = 0.1;
    const auto report = hdboot::levy_concentration(CovMatrix::identity(1), LpExponent::finite(2.0), eps, 100000,
                                                    hdboot::RngSeed(4));
    const double exact = 2.0 * hdboot::normal_cdf(eps / std::sqrt(2.0)) - 1.0;
    CHECK(report.estimate == Catch::Approx(exact).margin(0.005));
}

TEST_CASE("levy_concentration: monotone in eps and bounded by one", "[diagnostics][levy][property]")
{
    const auto s = hdboot::build_block_covariance(60, 3, 0.8, hdboot::RngSeed(1));
    for (const auto& p : {LpExponent::finite(1.0), LpExponent::finite(4.0), LpExponent::log_dim(), LpExponent::infinity()}) {
        double prev = 0.0;
        for (double eps : {0.01, 0.05, 0.1, 0.5, 2.0}) {
            const auto r = hdboot::levy_concentration(s, p, eps, 5000, hdboot::RngSeed(5));
            CHECK(r.estimate >= prev);
            CHECK(r.estimate <= 1.0);
            prev = r.estimate;
        }
    }
}

TEST_CASE("levy_concentration: degenerate inputs", "[diagnostics][levy]")
{
    const auto zero = hdboot::levy_concentration(CovMatrix::identity(5, 0.0), LpExponent::finite(2.0), 0.05, 1000,
                                                 hdboot::RngSeed(1));
    CHECK(zero.estimate == 1.0);
    CHECK_FALSE(zero.pass);
    CHECK_THROWS_AS(hdboot::levy_concentration(CovMatrix::identity(5), LpExponent::finite(2.0), 0.0, 1000,
                                               hdboot::RngSeed(1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(hdboot::levy_concentration(CovMatrix::identity(5), LpExponent::finite(2.0), 0.1, 999,
                                               hdboot::RngSeed(1)),
                    std::invalid_argument);
}

TEST_CASE("comparison_bound: explicit values for scaled identities", "[diagnostics][comparison]")
{
    const auto sx = CovMatrix::identity(4);
    const auto sy = CovMatrix::identity(4, 2.0);
    CHECK(hdboot::comparison_bound(sx, sx, LpExponent::finite(2.0)) == 0.0);
    CHECK(hdboot::comparison_bound(sx, sx, LpExponent::infinity()) == 0.0);
    // Delta_2 = 2, rank 4, d = 4: numerator sqrt(p^2 * 2 * 2 * 2) = sqrt(32); ||sigma||_2 = 2 and 2 sqrt(2).
    CHECK(hdboot::comparison_bound(sx, sy, LpExponent::finite(2.0)) == Catch::Approx(std::sqrt(32.0) / (2.0 * std::sqrt(2.0))));
    // Delta_op = Delta_inf = 1, max ||sigma||_inf = sqrt(2).
    CHECK(hdboot::comparison_bound(sx, sy, LpExponent::infinity()) == Catch::Approx(std::log(4.0) / std::sqrt(2.0)));
    CHECK(hdboot::comparison_bound(sx, sy, LpExponent::log_dim()) == Catch::Approx(std::log(4.0) / std::sqrt(2.0)));
    CHECK(std::isinf(hdboot::comparison_bound(CovMatrix::identity(4, 0.0), CovMatrix::identity(4, 0.0),
                                              LpExponent::infinity())));
    CHECK_THROWS_AS(hdboot::comparison_bound(sx, CovMatrix::identity(3), LpExponent::finite(2.0)),
                    std::invalid_argument);
}

TEST_CASE("comparison_bound: grows with the covariance gap", "[diagnostics][comparison][property]")
{
    const auto base = CovMatrix::identity(50);
    for (const auto& p : {LpExponent::finite(1.0), LpExponent::finite(2.0), LpExponent::log_dim(), LpExponent::infinity()}) {
        double prev = 0.0;
        for (double c : {1.05, 1.1, 1.5, 2.0}) {
            const double b = hdboot::comparison_bound(base, CovMatrix::identity(50, c), p);
            CHECK(std::isfinite(b));
            CHECK(b > prev);
            prev = b;
        }
    }
}

TEST_CASE("comparison_ks: equal laws stay within noise, distant laws separate", "[diagnostics][comparison]")
{
    const auto base = CovMatrix::identity(50);
    const std::size_t n_mc = 20000;
    const auto same = hdboot::comparison_ks(base, base, LpExponent::finite(2.0), n_mc, hdboot::RngSeed(6));
    CHECK(same.estimate <= 1.63 * std::sqrt(2.0 / n_mc));
    CHECK(same.bound == 0.0);
    CHECK(same.slack == Catch::Approx(1.95 * std::sqrt(2.0 / n_mc)));

    double prev = -1.0;
    for (double c : {1.1, 1.5, 2.0}) {
        const auto r = hdboot::comparison_ks(base, CovMatrix::identity(50, c), LpExponent::finite(2.0), n_mc,
                                             hdboot::RngSeed(6));
        CHECK(r.estimate > prev);
        CHECK(r.pass);
        prev = r.estimate;
    }
    CHECK(prev > 0.9);
}

TEST_CASE("ProbeReport: CSV row layout", "[diagnostics]")
{
    const auto r = hdboot::levy_concentration(CovMatrix::identity(5), LpExponent::finite(2.0), 0.1, 1000,
                                              hdboot::RngSeed(2));
    const std::string row = r.csv_row();
    CHECK(std::count(row.begin(), row.end(), ',') == 7);
    CHECK(row.starts_with("levy_concentration,"));
    CHECK(row.ends_with(",1000,1"));
    CHECK(hdboot::ProbeReport::csv_header() == "probe,instance,estimate,bound,C,slack,n_mc,pass");
}
