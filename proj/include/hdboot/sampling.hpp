#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "hdboot/covariance.hpp"
#include "hdboot/distributions.hpp"
#include "hdboot/rng.hpp"

namespace hdboot {

/// Eigen-based square root of a PSD matrix. Eigenvalues below
/// tol * max(largest eigenvalue, 0) are dropped.
/// @throws std::domain_error if the smallest eigenvalue is below -1e-8 * scale.
PsdFactor factorize_psd(const CovMatrix& s, double tol = 1e-10);

/// `count` rows of N(0, L L'), each generated as L g with g ~ N(0, I_rank).
DataMatrix mvn_sample(const PsdFactor& factor, std::size_t count, RngStream& rng);
DataMatrix mvn_sample(const PsdFactor& factor, std::size_t count, const RngSeed& seed);

/// Block-diagonal matrix of rank-one blocks decay^{j+k-2}, rows and columns
/// permuted by a uniform permutation drawn from perm_seed.
/// @throws std::invalid_argument if block does not divide d or decay is outside (0, 1).
CovMatrix build_block_covariance(std::size_t d, std::size_t block, double decay, const RngSeed& perm_seed);

/// Block size used by default: d / 100 when that divides d, otherwise 1.
std::size_t default_block_size(std::size_t d) noexcept;

/// Gaussian copula data X_ij = F^{-1}(Phi(Y_ij)), Y_i ~ N(0, S). With
/// standardize, Y_ij is divided by sqrt(S_jj) first so that every margin is
/// exactly F. All three marginals have mean zero.
/// @throws std::invalid_argument if standardize is set and S has a zero diagonal entry.
DataMatrix copula_sample(const CovMatrix& s, MarginalKind kind, std::size_t n, RngStream& rng,
                         bool standardize = true);

/// Covariance of the copula vector X. Correlations of +-1 map to +-Var(F)
/// exactly; other pairs use closed forms or 2-D Gauss-Hermite quadrature.
/// The result is PSD-certified when the eigenvalue check passes.
CovMatrix copula_covariance(const CovMatrix& s, MarginalKind kind, bool standardize = true);

}  // namespace hdboot
