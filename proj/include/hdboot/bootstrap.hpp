#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hdboot/covariance.hpp"
#include "hdboot/lp_norm.hpp"
#include "hdboot/rng.hpp"

namespace hdboot {

/// Where a set of draws came from.
struct DrawMeta {
    std::string engine;  ///< "gpb", "proxy", "gmb", or a user label
    std::string p;       ///< LpExponent::to_string()
    std::size_t B = 0;
    std::string seed;    ///< RngSeed::to_string()

    friend bool operator==(const DrawMeta&, const DrawMeta&) = default;
};

/// Sorted sample of nonnegative values (bootstrap norms).
class EmpiricalDistribution {
public:
    /// Sorts the input. @throws std::invalid_argument if empty, negative or non-finite.
    explicit EmpiricalDistribution(std::vector<double> samples, DrawMeta meta = {});

    [[nodiscard]] const std::vector<double>& samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] const DrawMeta& meta() const noexcept { return meta_; }

    /// Fraction of samples <= t.
    [[nodiscard]] double cdf(double t) const;
    /// Number of samples strictly greater than t / at least t.
    [[nodiscard]] std::size_t count_greater(double t) const;
    [[nodiscard]] std::size_t count_at_least(double t) const;

    /// One-column CSV: a header "engine=...;p=...;B=...;seed=..." then one value per line.
    void write_csv(std::ostream& out) const;
    static EmpiricalDistribution read_csv(std::istream& in);

    friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;

private:
    std::vector<double> samples_;
    DrawMeta meta_;
};

/// Draws of ||V||_p, V ~ N(0, sigma_hat). Draw b uses the sub-stream seed.child(b).
/// @throws std::domain_error if sigma_hat is not PSD.
EmpiricalDistribution gpb_draws(const CovMatrix& sigma_hat, const LpExponent& p, std::size_t B, const RngSeed& seed);

/// Same Gaussian draws pushed through several norms at once. Entry i equals
/// gpb_draws(sigma_hat, ps[i], B, seed).
std::vector<EmpiricalDistribution> gpb_draws(const CovMatrix& sigma_hat, std::span<const LpExponent> ps,
                                             std::size_t B, const RngSeed& seed);

/// gpb_draws with the true covariance, labeled "proxy".
EmpiricalDistribution proxy_draws(const CovMatrix& sigma_true, const LpExponent& p, std::size_t B, const RngSeed& seed);
std::vector<EmpiricalDistribution> proxy_draws(const CovMatrix& sigma_true, std::span<const LpExponent> ps,
                                               std::size_t B, const RngSeed& seed);

enum class GmbMode {
    Multipliers,      ///< fresh n-vector of N(0,1) multipliers per draw
    ViaCovariance,    ///< gpb_draws(sample_covariance(X)); same conditional law
};

/// Draws of ||n^{-1/2} sum_i g_i (X_i - Xbar)||_p. @throws std::invalid_argument if n < 2.
EmpiricalDistribution gmb_draws(const DataMatrix& x, const LpExponent& p, std::size_t B, const RngSeed& seed,
                                GmbMode mode = GmbMode::Multipliers);
std::vector<EmpiricalDistribution> gmb_draws(const DataMatrix& x, std::span<const LpExponent> ps, std::size_t B,
                                             const RngSeed& seed, GmbMode mode = GmbMode::Multipliers);

/// Order statistic number ceil(alpha * B) (1-based): inf{t : F_B(t) >= alpha}.
/// @throws std::invalid_argument if alpha is outside (0, 1).
double empirical_quantile(const EmpiricalDistribution& d, double alpha);

/// 1-based index ceil(alpha * B). A product within 1e-9 (relative) of an
/// integer counts as that integer, so alpha = 0.05, B = 500 gives 25, not 26.
std::size_t quantile_rank(std::size_t B, double alpha);

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;  ///< divisor B - 1 (0 for a single sample)
};

SampleMoments moments(const EmpiricalDistribution& d);

/// sup_t |F_A(t) - F_B(t)|.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

}  // namespace hdboot
