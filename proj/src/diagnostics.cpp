#include "hdboot/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hdboot/bootstrap.hpp"

namespace hdboot {

namespace {

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

Eigen::VectorXd diagonal_sd(const CovMatrix& s) { return s.entries().diagonal().cwiseMax(0.0).cwiseSqrt(); }

double norm_of(const Eigen::VectorXd& v, const LpExponent& p) {
    return lp_norm(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), p);
}

std::string describe(const CovMatrix& s, const LpExponent& p) {
    return "d=" + std::to_string(s.dim()) + ";p=" + p.to_string() + ";cov=" + s.provenance().to_string();
}

}  // namespace

std::string ProbeReport::csv_header() { return "probe,instance,estimate,bound,C,slack,n_mc,pass"; }

std::string ProbeReport::csv_row() const {
    return probe + "," + instance + "," + format_double(estimate) + "," + format_double(bound) + "," +
           format_double(C) + "," + format_double(slack) + "," + std::to_string(n_mc) + "," + (pass ? "1" : "0");
}

double anti_concentration_scale(const LpExponent& p, std::size_t d, double rank) {
    if (p.kind() == LpExponent::Kind::Finite) {
        const double q = p.resolve(d);
        return std::sqrt(q * std::pow(rank, 1.0 / q));
    }
    if (d < 3) throw std::invalid_argument("anti_concentration_scale: log branch requires d >= 3");
    return std::sqrt(std::log(static_cast<double>(d)));
}

ProbeReport levy_concentration(const CovMatrix& s, const LpExponent& p, double eps, std::size_t n_mc,
                               const RngSeed& seed, double C) {
    if (!(eps > 0.0)) throw std::invalid_argument("levy_concentration: eps must be positive");
    if (n_mc < 1000) throw std::invalid_argument("levy_concentration: n_mc must be at least 1000");
    ProbeReport report;
    report.probe = "levy_concentration";
    report.instance = describe(s, p) + ";eps=" + format_double(eps);
    report.bound = eps;
    report.C = C;
    report.n_mc = n_mc;

    const auto d = static_cast<std::size_t>(s.dim());
    const auto diag = cov_diagnostics(s);
    const double sigma_norm = norm_of(diagonal_sd(s), p);
    if (diag.rank == 0 || sigma_norm == 0.0) {
        report.estimate = 1.0;
        report.pass = report.estimate <= C * report.bound;
        return report;
    }
    const double width = eps * sigma_norm / anti_concentration_scale(p, d, static_cast<double>(diag.rank));
    const auto draws = proxy_draws(s, p, n_mc, seed);
    const auto& x = draws.samples();
    std::size_t best = 0;
    std::size_t hi = 0;
    for (std::size_t lo = 0; lo < x.size(); ++lo) {
        hi = std::max(hi, lo);
        while (hi < x.size() && x[hi] <= x[lo] + width) ++hi;
        best = std::max(best, hi - lo);
    }
    report.estimate = static_cast<double>(best) / static_cast<double>(x.size());
    report.pass = report.estimate <= C * report.bound;
    return report;
}

double comparison_bound(const CovMatrix& sx, const CovMatrix& sy, const LpExponent& p) {
    if (sx.dim() != sy.dim()) throw std::invalid_argument("comparison_bound: dimension mismatch");
    const auto d = static_cast<std::size_t>(sx.dim());
    const Eigen::VectorXd sd_x = diagonal_sd(sx);
    const Eigen::VectorXd sd_y = diagonal_sd(sy);
    const Eigen::MatrixXd diff = sx.entries() - sy.entries();

    if (p.kind() != LpExponent::Kind::Finite) {
        if (d < 3) throw std::invalid_argument("comparison_bound: log branch requires d >= 3");
        const CovError err = cov_error(sx, sy, std::span<const LpExponent>());
        const double delta_inf = diff.cwiseAbs().maxCoeff();
        const double scale = std::max(sd_x.maxCoeff(), sd_y.maxCoeff());
        if (scale == 0.0) return std::numeric_limits<double>::infinity();
        return std::log(static_cast<double>(d)) * std::sqrt(std::min(err.delta_op, delta_inf)) / scale;
    }

    const double q = p.resolve(d);
    const double delta_p = lp_norm(std::span<const double>(diff.data(), static_cast<std::size_t>(diff.size())), q);
    auto side = [&](const CovMatrix& s, const Eigen::VectorXd& sd) {
        const double norm = norm_of(sd, p);
        if (norm == 0.0) return std::numeric_limits<double>::infinity();
        const double rank = static_cast<double>(cov_diagnostics(s).rank);
        return std::sqrt(q * q * std::pow(static_cast<double>(d), 1.0 / q) * std::pow(rank, 1.0 / q) * delta_p) / norm;
    };
    return std::min(side(sx, sd_x), side(sy, sd_y));
}

ProbeReport comparison_ks(const CovMatrix& sx, const CovMatrix& sy, const LpExponent& p, std::size_t n_mc,
                          const RngSeed& seed, double C) {
    if (sx.dim() != sy.dim()) throw std::invalid_argument("comparison_ks: dimension mismatch");
    if (n_mc < 1000) throw std::invalid_argument("comparison_ks: n_mc must be at least 1000");
    ProbeReport report;
    report.probe = "comparison_ks";
    report.instance = describe(sx, p) + ";vs=" + sy.provenance().to_string();
    report.C = C;
    report.n_mc = n_mc;
    // Asymptotic two-sample KS critical value at level 0.001.
    report.slack = 1.95 * std::sqrt(2.0 / static_cast<double>(n_mc));
    report.bound = comparison_bound(sx, sy, p);
    report.estimate = ks_distance(proxy_draws(sx, p, n_mc, seed.child(0)), proxy_draws(sy, p, n_mc, seed.child(1)));
    report.pass = report.estimate <= C * report.bound + report.slack;
    return report;
}

}  // namespace hdboot
