#pragma once

#include <cstddef>
#include <string>

#include "hdboot/covariance.hpp"
#include "hdboot/lp_norm.hpp"
#include "hdboot/rng.hpp"

namespace hdboot {

/// Outcome of a Monte Carlo probe: pass iff estimate <= C * bound + slack.
struct ProbeReport {
    std::string probe;
    std::string instance;
    double estimate = 0.0;
    double bound = 0.0;
    double C = 10.0;
    double slack = 0.0;  ///< Monte Carlo noise allowance added to C * bound
    std::size_t n_mc = 0;
    bool pass = false;

    static std::string csv_header();
    /// probe,instance,estimate,bound,C,slack,n_mc,pass
    [[nodiscard]] std::string csv_row() const;
};

/// omega_p(d, r): sqrt(p r^{1/p}) for a finite exponent, sqrt(log d) for
/// LogDim and Infinity.
double anti_concentration_scale(const LpExponent& p, std::size_t d, double rank);

/// sup_t P(t <= ||X||_p <= t + eps ||sigma||_p / omega_p(d, r)), X ~ N(0, S),
/// from n_mc draws. bound = eps, pass iff estimate <= C * eps.
/// @throws std::invalid_argument for eps <= 0 or n_mc < 1000.
ProbeReport levy_concentration(const CovMatrix& s, const LpExponent& p, double eps, std::size_t n_mc,
                               const RngSeed& seed, double C = 10.0);

/// Right side of the Gaussian comparison bound for ||X||_p vs ||Y||_p.
/// Finite p: min over (X, Y) of sqrt(p^2 d^{1/p} r^{1/p} Delta_p) / ||sigma||_p.
/// LogDim and Infinity: log(d) sqrt(min(Delta_op, Delta_inf)) / max(||sigma_X||_inf, ||sigma_Y||_inf).
double comparison_bound(const CovMatrix& sx, const CovMatrix& sy, const LpExponent& p);

/// KS distance between n_mc draws of ||X||_p and of ||Y||_p (independent
/// sub-streams 0 and 1). Passes iff estimate <= C * bound + 1.95 sqrt(2 / n_mc).
ProbeReport comparison_ks(const CovMatrix& sx, const CovMatrix& sy, const LpExponent& p, std::size_t n_mc,
                          const RngSeed& seed, double C = 10.0);

}  // namespace hdboot
