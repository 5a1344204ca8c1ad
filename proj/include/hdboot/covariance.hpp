#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdboot/lp_norm.hpp"
#include "hdboot/rng.hpp"

namespace hdboot {

/// n x d observations, one sample vector per row.
using DataMatrix = Eigen::MatrixXd;

/// Describes how a covariance matrix was produced.
struct Provenance {
    std::string kind = "raw";
    std::vector<std::pair<std::string, double>> params;

    [[nodiscard]] std::string to_string() const;
};

/// Low-rank square root L (d x r) with L L' = Sigma.
struct PsdFactor {
    Eigen::MatrixXd factor;
    Eigen::Index rank = 0;
    [[nodiscard]] Eigen::Index dim() const noexcept { return factor.rows(); }
};

/// Symmetric d x d matrix with a positive semi-definiteness certificate.
///
/// Entries are symmetrized on construction and never change afterwards, so a
/// CovMatrix can be shared read-only between threads. The PSD factorization is
/// computed lazily once and shared between copies.
class CovMatrix {
public:
    CovMatrix();
    /// Symmetrizes (M + M')/2. Throws std::invalid_argument for non-square or
    /// non-finite input. The result is not PSD-certified.
    explicit CovMatrix(const Eigen::MatrixXd& entries, Provenance provenance = {});

    /// For matrices that are PSD by construction (Gram matrices, spectral
    /// reconstructions with nonnegative eigenvalues). No check is run.
    static CovMatrix assume_psd(const Eigen::MatrixXd& entries, Provenance provenance);
    static CovMatrix identity(Eigen::Index d, double scale = 1.0);

    [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return entries_.rows(); }
    [[nodiscard]] bool psd_certified() const noexcept { return psd_; }
    [[nodiscard]] const Provenance& provenance() const noexcept { return provenance_; }

    /// Eigenvalue check: smallest eigenvalue >= -rel_tol * largest |eigenvalue|.
    [[nodiscard]] bool is_psd(double rel_tol = 1e-8) const;
    /// Copy with the PSD flag set; throws std::domain_error if is_psd fails.
    [[nodiscard]] CovMatrix certified(double rel_tol = 1e-8) const;

    /// Cached eigen-factorization (see factorize_psd). Throws for non-PSD input.
    [[nodiscard]] std::shared_ptr<const PsdFactor> factor() const;

private:
    struct FactorCache;
    Eigen::MatrixXd entries_;
    Provenance provenance_;
    bool psd_ = false;
    std::shared_ptr<FactorCache> cache_;
};

/// Spectral diagnostics of a covariance matrix.
struct CovDiagnostics {
    Eigen::Index rank = 0;
    double sigma_min_sq = 0.0;  ///< smallest diagonal entry
    double sigma_max_sq = 0.0;  ///< largest diagonal entry
    double effective_rank = 0.0;  ///< trace / operator norm (0 for the zero matrix)
};

/// Estimation error of a covariance estimate.
struct CovError {
    double delta_op = 0.0;
    std::vector<std::pair<LpExponent, double>> delta_p;

    /// Entry for the given exponent; throws std::out_of_range if absent.
    [[nodiscard]] double at(const LpExponent& p) const;
};

enum class ThresholdKind { Hard, Soft };

/// Sample covariance with divisor n (not n - 1). Requires n >= 2.
CovMatrix sample_covariance(const DataMatrix& x);

/// Entrywise thresholding of every entry, including the diagonal:
/// hard keeps m iff |m| > lambda, soft maps m to sign(m)(|m| - lambda)_+.
CovMatrix threshold(const CovMatrix& m, double lambda, ThresholdKind kind = ThresholdKind::Hard);

/// Keeps m_jk iff |m_jk| / sqrt(m_jj m_kk) >= lambda; the diagonal always survives.
CovMatrix correlation_threshold(const CovMatrix& m, double lambda);

/// Zeroes every entry with |j - k| > bandwidth.
CovMatrix band(const CovMatrix& m, std::size_t bandwidth);

/// Frobenius-nearest PSD matrix: eigenvalues below tol * max(max |eigenvalue|, 1)
/// are set to zero. Works block by block on the connected components of the
/// sparsity pattern, which gives the same result as a dense decomposition.
/// PSD-certified input is returned unchanged.
CovMatrix psd_project(const CovMatrix& m, double tol = 0.0);

/// Options for cross-validated selection of the correlation-threshold level.
struct CvOptions {
    std::vector<double> grid;  ///< sorted, inside [0, 1]
    std::size_t folds = 10;

    /// `points` equally spaced values covering [0, 1].
    static std::vector<double> uniform_grid(std::size_t points = 40);
    static CvOptions defaults();
};

struct CvResult {
    double lambda_hat = 0.0;
    std::vector<double> risks;  ///< one per grid point
};

/// For each fold, splits the rows at random into ceil(n/3) and n - ceil(n/3),
/// and scores each lambda by the Frobenius distance between the projected
/// correlation-thresholded covariance of the first part and the raw sample
/// covariance of the second. Returns the risk-minimizing lambda (smallest on ties).
CvResult cv_select_lambda(const DataMatrix& x, const CvOptions& options, const RngSeed& seed);

/// Numerical rank counts eigenvalues > rank_tol * largest eigenvalue.
CovDiagnostics cov_diagnostics(const CovMatrix& s, double rank_tol = 1e-10);

/// Operator-norm and vectorized lp errors of est - truth. LogDim resolves to
/// log of the matrix dimension d, not of d^2.
CovError cov_error(const CovMatrix& est, const CovMatrix& truth, std::span<const LpExponent> ps);
CovError cov_error(const CovMatrix& est, const CovMatrix& truth, const LpExponent& p);

/// Covariance estimator used by the bootstrap and the hypothesis test.
struct EstimatorSpec {
    enum class Kind { Naive, HardThreshold, CorrelationThresholdCv, Band };

    Kind kind = Kind::Naive;
    double lambda = 0.0;
    std::size_t bandwidth = 0;
    CvOptions cv = CvOptions::defaults();

    static EstimatorSpec naive();
    static EstimatorSpec hard_threshold(double lambda);
    static EstimatorSpec correlation_cv(CvOptions options = CvOptions::defaults());
    static EstimatorSpec banded(std::size_t bandwidth);

    /// "naive", "hard:<lambda>", "cv", "band:<l>".
    static EstimatorSpec parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
};

/// Runs the estimator on x and returns a PSD-certified matrix.
CovMatrix estimate_covariance(const DataMatrix& x, const EstimatorSpec& spec, const RngSeed& seed);

}  // namespace hdboot
