// Test statistic, bootstrap test decisions, confidence sets and lp-ball volumes.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "hdboot/inference.hpp"
#include "hdboot/sampling.hpp"

using hdboot::LpExponent;

namespace {

Eigen::MatrixXd gaussian_data(Eigen::Index n, Eigen::Index d, const hdboot::RngSeed& seed)
{
    hdboot::RngStream s(seed);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = s.normal();
    return x;
}

}  // namespace

TEST_CASE("test_statistic: worked values and a naive loop", "[inference]")
{
    Eigen::MatrixXd one(1, 2);
    one << 3.0, 4.0;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    CHECK(hdboot::test_statistic(one, id, Eigen::VectorXd::Zero(2), LpExponent::finite(2.0)) == 5.0);
    CHECK(hdboot::test_statistic(one, id, Eigen::Vector2d(3.0, 4.0), LpExponent::infinity()) == 0.0);

    const Eigen::MatrixXd x = gaussian_data(25, 4, hdboot::RngSeed(1));
    const Eigen::MatrixXd m = gaussian_data(3, 4, hdboot::RngSeed(2));
    const Eigen::Vector3d m0(0.1, -0.2, 0.3);
    std::vector<double> v(3, 0.0);
    for (int r = 0; r < 3; ++r) {
        for (int i = 0; i < 25; ++i) {
            double mx = 0.0;
            for (int j = 0; j < 4; ++j) mx += m(r, j) * x(i, j);
            v[r] += (mx - m0(r)) / std::sqrt(25.0);
        }
    }
    for (const auto& p : {LpExponent::finite(1.0), LpExponent::finite(2.5), LpExponent::log_dim(), LpExponent::infinity()}) {
        CHECK(hdboot::test_statistic(x, m, m0, p) == Catch::Approx(hdboot::lp_norm(v, p.resolve(3))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(hdboot::test_statistic(x, m, Eigen::VectorXd::Zero(2), LpExponent::finite(2.0)),
                    std::invalid_argument);
}

TEST_CASE("TestSpec: validation", "[inference]")
{
    auto spec = hdboot::TestSpec::identity(3);
    CHECK_NOTHROW(spec.validate(3));
    CHECK_THROWS_AS(spec.validate(4), std::invalid_argument);
    spec.alpha = 1.0;
    CHECK_THROWS_AS(spec.validate(3), std::invalid_argument);
    spec.alpha = 0.05;
    spec.B = 0;
    CHECK_THROWS_AS(spec.validate(3), std::invalid_argument);
    spec.B = 10;
    spec.m0 = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(spec.validate(3), std::invalid_argument);
}

TEST_CASE("run_test: a single draw is the critical value", "[inference]")
{
    const Eigen::MatrixXd x = gaussian_data(20, 3, hdboot::RngSeed(3));
    auto spec = hdboot::TestSpec::identity(3);
    spec.B = 1;
    const auto r = hdboot::run_test(x, spec);
    REQUIRE(r.distribution.size() == 1);
    CHECK(r.critical_value == r.distribution.samples()[0]);
    CHECK(r.reject == (r.statistic >= r.critical_value));
}

TEST_CASE("run_test: decision and p-value agree with the draw counts", "[inference][property]")
{
    for (std::uint64_t trial = 0; trial < 60; ++trial) {
        const hdboot::RngSeed seed(100 + trial);
        Eigen::MatrixXd x = gaussian_data(30, 5, seed.child(7));
        x.col(0).array() += 0.4 * static_cast<double>(trial % 3);
        auto spec = hdboot::TestSpec::identity(5);
        spec.p = trial % 2 ? LpExponent::infinity() : LpExponent::finite(1.0);
        spec.B = 37 + trial;
        spec.alpha = 0.1;
        spec.seed = seed;
        const auto r = hdboot::run_test(x, spec);
        const std::size_t k = hdboot::quantile_rank(spec.B, 1.0 - spec.alpha);
        CHECK(r.reject == (r.distribution.count_greater(r.statistic) <= spec.B - k));
        CHECK(r.p_value == static_cast<double>(r.distribution.count_at_least(r.statistic)) / spec.B);
        CHECK(r.statistic == hdboot::test_statistic(x, spec.M, spec.m0, spec.p));
    }
}

TEST_CASE("run_test: rescaling the data rescales statistic and critical value", "[inference][property]")
{
    const Eigen::MatrixXd x = gaussian_data(40, 6, hdboot::RngSeed(4));
    for (const char* est : {"naive", "cv"}) {
        auto spec = hdboot::TestSpec::identity(6);
        spec.estimator = hdboot::EstimatorSpec::parse(est);
        spec.B = 200;
        spec.seed = hdboot::RngSeed(5);
        const auto a = hdboot::run_test(x, spec);
        const auto b = hdboot::run_test(3.0 * x, spec);
        CHECK(b.statistic == Catch::Approx(3.0 * a.statistic));
        CHECK(b.critical_value == Catch::Approx(3.0 * a.critical_value));
        CHECK(b.reject == a.reject);
        CHECK(b.p_value == a.p_value);
    }
}

TEST_CASE("run_test: level under the null for Gaussian data", "[inference]")
{
    const int reps = 400;
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const hdboot::RngSeed seed = hdboot::RngSeed(6).child(static_cast<std::uint64_t>(rep));
        const Eigen::MatrixXd x = gaussian_data(60, 4, seed.child(0));
        auto spec = hdboot::TestSpec::identity(4);
        spec.B = 200;
        spec.seed = seed.child(1);
        rejections += hdboot::run_test(x, spec).reject ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate == Catch::Approx(0.05).margin(3.0 * std::sqrt(0.05 * 0.95 / reps) + 0.01));
}

TEST_CASE("TestResult: CSV row layout", "[inference]")
{
    const Eigen::MatrixXd x = gaussian_data(10, 2, hdboot::RngSeed(7));
    auto spec = hdboot::TestSpec::identity(2);
    spec.B = 5;
    spec.seed = hdboot::RngSeed(9);
    const auto r = hdboot::run_test(x, spec);
    const std::string row = r.csv_row();
    CHECK(std::count(row.begin(), row.end(), ',') == 8);
    CHECK(row.ends_with(",naive,5,9"));
    CHECK(hdboot::TestResult::csv_header() == "statistic,critical_value,p_value,reject,p,alpha,estimator,B,seed");
}

TEST_CASE("confidence_set: membership matches test inversion", "[inference]")
{
    const Eigen::MatrixXd x = gaussian_data(50, 3, hdboot::RngSeed(8));
    const hdboot::RngSeed seed(21);
    const auto cs = hdboot::confidence_set(x, LpExponent::finite(2.0), 0.1, hdboot::EstimatorSpec::naive(), 300, seed);
    CHECK(cs.contains(cs.center));
    CHECK(cs.radius > 0.0);
    hdboot::RngStream s(hdboot::RngSeed(22));
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd mu = cs.center;
        for (Eigen::Index j = 0; j < 3; ++j) mu(j) += 0.3 * s.normal();
        auto spec = hdboot::TestSpec::identity(3);
        spec.m0 = mu;
        spec.alpha = 0.1;
        spec.B = 300;
        spec.seed = seed;
        const auto r = hdboot::run_test(x, spec);
        CHECK(cs.contains(mu) == (r.statistic <= r.critical_value));
    }
    CHECK_THROWS_AS(cs.contains(Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("lp_ball_volume: closed forms", "[inference][volume]")
{
    CHECK(*hdboot::lp_ball_volume(2, 2.0, 1.0).volume == Catch::Approx(std::numbers::pi));
    CHECK(*hdboot::lp_ball_volume(3, 2.0, 1.0).volume == Catch::Approx(4.0 / 3.0 * std::numbers::pi));
    CHECK(*hdboot::lp_ball_volume(2, 1.0, 1.0).volume == Catch::Approx(2.0));
    CHECK(*hdboot::lp_ball_volume(3, 1.0, 2.0).volume == Catch::Approx(64.0 / 6.0));
    CHECK(*hdboot::lp_ball_volume(4, std::numeric_limits<double>::infinity(), 0.5).volume == 1.0);
    CHECK(*hdboot::lp_ball_volume(1, 7.0, 1.5).volume == Catch::Approx(3.0));
    const auto huge = hdboot::lp_ball_volume(1000, 1.0, 1.0);
    CHECK_FALSE(huge.volume.has_value());
    CHECK(huge.log_volume == Catch::Approx(1000.0 * std::log(2.0) - std::lgamma(1001.0)));
    CHECK_THROWS_AS(hdboot::lp_ball_volume(0, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(hdboot::lp_ball_volume(2, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(hdboot::lp_ball_volume(2, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("lp_ball_volume: Monte Carlo hit rate in the cube", "[inference][volume]")
{
    hdboot::RngStream s(hdboot::RngSeed(30));
    const int m = 200000;
    for (double p : {1.5, 3.0}) {
        int hits = 0;
        for (int i = 0; i < m; ++i) {
            std::vector<double> u(3);
            for (auto& v : u) v = 2.0 * s.uniform() - 1.0;
            hits += hdboot::lp_norm(u, p) <= 1.0 ? 1 : 0;
        }
        const double frac = static_cast<double>(hits) / m;
        const double exact = *hdboot::lp_ball_volume(3, p, 1.0).volume / 8.0;
        CHECK(frac == Catch::Approx(exact).margin(4.0 * std::sqrt(exact * (1.0 - exact) / m)));
    }
}

TEST_CASE("lp_ball_volume: increasing in p and homogeneous in r", "[inference][volume][property]")
{
    for (std::size_t d : {2u, 10u, 200u}) {
        double prev = -std::numeric_limits<double>::infinity();
        for (double p : {1.0, 1.5, 2.0, 4.0, 10.0, 100.0, std::numeric_limits<double>::infinity()}) {
            const double lv = hdboot::lp_ball_volume(d, p, 1.0).log_volume;
            CHECK(lv > prev);
            prev = lv;
            CHECK(hdboot::lp_ball_volume(d, p, 2.5).log_volume ==
                  Catch::Approx(lv + static_cast<double>(d) * std::log(2.5)));
        }
    }
}
