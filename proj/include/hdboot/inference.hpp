#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "hdboot/bootstrap.hpp"
#include "hdboot/covariance.hpp"
#include "hdboot/lp_norm.hpp"
#include "hdboot/rng.hpp"

namespace hdboot {

/// Test of H0: M mu = m0 with the lp statistic and a Gaussian parametric
/// bootstrap critical value.
struct TestSpec {
    Eigen::MatrixXd M;   ///< d' x d restriction map
    Eigen::VectorXd m0;  ///< length d'
    LpExponent p = LpExponent::finite(2.0);
    double alpha = 0.05;
    EstimatorSpec estimator = EstimatorSpec::naive();
    std::size_t B = 1000;
    RngSeed seed = RngSeed();

    /// M = I_d, m0 = 0.
    static TestSpec identity(Eigen::Index d);

    /// @throws std::invalid_argument on inconsistent shapes, alpha outside (0, 1) or B = 0.
    void validate(Eigen::Index d) const;
};

struct TestResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    bool reject = false;
    double p_value = 1.0;  ///< #{draws >= statistic} / B
    EmpiricalDistribution distribution;
    LpExponent p = LpExponent::finite(2.0);
    double alpha = 0.05;
    std::string estimator;
    std::size_t B = 0;
    RngSeed seed = RngSeed();

    static std::string csv_header();
    /// statistic,critical_value,p_value,reject,p,alpha,estimator,B,seed
    [[nodiscard]] std::string csv_row() const;
};

/// ||n^{-1/2} sum_i (M X_i - m0)||_p. LogDim resolves against d'.
double test_statistic(const DataMatrix& x, const Eigen::MatrixXd& M, const Eigen::VectorXd& m0, const LpExponent& p);

/// Estimates Sigma with spec.estimator (sub-stream 0 of spec.seed), forms
/// Omega = M Sigma M', and takes the 1 - alpha quantile of gpb_draws
/// (sub-stream 1). Rejects iff statistic >= critical value.
TestResult run_test(const DataMatrix& x, const TestSpec& spec);

/// run_test with a precomputed covariance estimate of the rows of x.
TestResult run_test_with(const DataMatrix& x, const TestSpec& spec, const CovMatrix& sigma_hat);

/// {mu : ||center - mu||_p <= radius} with radius = c*(1 - alpha) / sqrt(n).
struct ConfidenceSet {
    Eigen::VectorXd center;
    double radius = 0.0;
    LpExponent p = LpExponent::finite(2.0);

    [[nodiscard]] bool contains(const Eigen::VectorXd& mu) const;
};

ConfidenceSet confidence_set(const DataMatrix& x, const LpExponent& p, double alpha, const EstimatorSpec& estimator,
                             std::size_t B, const RngSeed& seed);

struct BallVolume {
    double log_volume = 0.0;
    std::optional<double> volume;  ///< empty when exp(log_volume) is not a finite positive double
};

/// Volume (2r)^d Gamma(1 + 1/p)^d / Gamma(1 + d/p) of the lp ball of radius r,
/// evaluated in log space. p = +inf gives the cube (2r)^d.
/// @throws std::invalid_argument for d = 0, p < 1 or r <= 0.
BallVolume lp_ball_volume(std::size_t d, double p, double r);

}  // namespace hdboot
