#pragma once

#include <string>
#include <string_view>

namespace hdboot {

/// Marginal families used by the Gaussian copula generator.
enum class MarginalKind {
    UniformSym,      ///< uniform on [-1, 1]
    StudentT4,       ///< Student t with 4 degrees of freedom
    StandardNormal,
};

MarginalKind parse_marginal(std::string_view text);
std::string to_string(MarginalKind kind);

/// Standard normal cdf, absolute error below 1e-15.
double normal_cdf(double z) noexcept;

/// Standard normal quantile on (0, 1); Acklam's rational approximation
/// polished by one Halley step.
double normal_quantile(double u);

/// F^{-1}(u) for the given marginal; u must lie in (0, 1).
double marginal_quantile(MarginalKind kind, double u);

/// F(x) for the given marginal (closed forms).
double marginal_cdf(MarginalKind kind, double x) noexcept;

/// Variance of the marginal: 1/3, 2, 1.
double marginal_variance(MarginalKind kind) noexcept;

/// F^{-1}(Phi(z)) evaluated without losing precision in the upper tail.
double copula_transform(MarginalKind kind, double z) noexcept;

}  // namespace hdboot
