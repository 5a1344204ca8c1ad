#include "hdboot/inference.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace hdboot {

namespace {

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

}  // namespace

TestSpec TestSpec::identity(Eigen::Index d) {
    TestSpec spec;
    spec.M = Eigen::MatrixXd::Identity(d, d);
    spec.m0 = Eigen::VectorXd::Zero(d);
    return spec;
}

void TestSpec::validate(Eigen::Index d) const {
    if (M.cols() != d) throw std::invalid_argument("TestSpec: M must have one column per variable");
    if (M.rows() < 1) throw std::invalid_argument("TestSpec: M must have at least one row");
    if (m0.size() != M.rows()) throw std::invalid_argument("TestSpec: m0 length must equal the rows of M");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("TestSpec: alpha must lie in (0, 1)");
    if (B == 0) throw std::invalid_argument("TestSpec: B must be positive");
    if (!M.allFinite() || !m0.allFinite()) throw std::invalid_argument("TestSpec: non-finite M or m0");
}

std::string TestResult::csv_header() { return "statistic,critical_value,p_value,reject,p,alpha,estimator,B,seed"; }

std::string TestResult::csv_row() const {
    return format_double(statistic) + "," + format_double(critical_value) + "," + format_double(p_value) + "," +
           (reject ? "1" : "0") + "," + p.to_string() + "," + format_double(alpha) + "," + estimator + "," +
           std::to_string(B) + "," + seed.to_string();
}

double test_statistic(const DataMatrix& x, const Eigen::MatrixXd& M, const Eigen::VectorXd& m0, const LpExponent& p) {
    if (x.rows() < 1) throw std::invalid_argument("test_statistic: need at least one observation");
    if (M.cols() != x.cols() || M.rows() != m0.size()) throw std::invalid_argument("test_statistic: dimension mismatch");
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    const Eigen::VectorXd scaled = std::sqrt(n) * (M * mean - m0);
    return lp_norm(std::span<const double>(scaled.data(), static_cast<std::size_t>(scaled.size())), p);
}

TestResult run_test_with(const DataMatrix& x, const TestSpec& spec, const CovMatrix& sigma_hat) {
    spec.validate(x.cols());
    if (sigma_hat.dim() != x.cols()) throw std::invalid_argument("run_test: covariance dimension mismatch");
    const Eigen::MatrixXd omega = spec.M * sigma_hat.entries() * spec.M.transpose();
    const CovMatrix omega_hat = sigma_hat.psd_certified()
                                    ? CovMatrix::assume_psd(omega, {"conjugated", {}})
                                    : CovMatrix(omega, {"conjugated", {}}).certified();

    const double statistic = test_statistic(x, spec.M, spec.m0, spec.p);
    EmpiricalDistribution draws = gpb_draws(omega_hat, spec.p, spec.B, spec.seed.child(1));
    const double critical = empirical_quantile(draws, 1.0 - spec.alpha);
    const double p_value = static_cast<double>(draws.count_at_least(statistic)) / static_cast<double>(spec.B);
    return TestResult{statistic,   critical,   statistic >= critical,       p_value, std::move(draws),
                      spec.p,      spec.alpha, spec.estimator.to_string(), spec.B,  spec.seed};
}

TestResult run_test(const DataMatrix& x, const TestSpec& spec) {
    spec.validate(x.cols());
    return run_test_with(x, spec, estimate_covariance(x, spec.estimator, spec.seed.child(0)));
}

bool ConfidenceSet::contains(const Eigen::VectorXd& mu) const {
    if (mu.size() != center.size()) throw std::invalid_argument("ConfidenceSet: dimension mismatch");
    const Eigen::VectorXd diff = center - mu;
    return lp_norm(std::span<const double>(diff.data(), static_cast<std::size_t>(diff.size())), p) <= radius;
}

ConfidenceSet confidence_set(const DataMatrix& x, const LpExponent& p, double alpha, const EstimatorSpec& estimator,
                             std::size_t B, const RngSeed& seed) {
    TestSpec spec = TestSpec::identity(x.cols());
    spec.p = p;
    spec.alpha = alpha;
    spec.estimator = estimator;
    spec.B = B;
    spec.seed = seed;
    spec.validate(x.cols());
    const CovMatrix sigma_hat = estimate_covariance(x, estimator, seed.child(0));
    const auto draws = gpb_draws(sigma_hat, p, B, seed.child(1));
    const double radius = empirical_quantile(draws, 1.0 - alpha) / std::sqrt(static_cast<double>(x.rows()));
    return ConfidenceSet{x.colwise().mean().transpose(), radius, p};
}

BallVolume lp_ball_volume(std::size_t d, double p, double r) {
    if (d == 0) throw std::invalid_argument("lp_ball_volume: d must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("lp_ball_volume: p must be >= 1");
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("lp_ball_volume: r must be positive and finite");
    const double dd = static_cast<double>(d);
    double log_volume = dd * std::log(2.0 * r);
    if (!std::isinf(p)) log_volume += dd * std::lgamma(1.0 + 1.0 / p) - std::lgamma(1.0 + dd / p);
    BallVolume out{log_volume, std::nullopt};
    const double v = std::exp(log_volume);
    if (std::isfinite(v) && std::isnormal(v)) out.volume = v;
    return out;
}

}  // namespace hdboot
