#include "hdboot/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hdboot {

namespace {

struct HermiteRule {
    Eigen::VectorXd nodes;    // for the standard normal weight
    Eigen::VectorXd weights;  // sum to 1
};

// Golub-Welsch for the probabilists' Hermite weight exp(-x^2/2)/sqrt(2 pi).
const HermiteRule& hermite_rule() {
    static const HermiteRule rule = [] {
        constexpr int n = 80;
        Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
        HermiteRule out;
        out.nodes = solver.eigenvalues();
        out.weights = solver.eigenvectors().row(0).transpose().array().square();
        return out;
    }();
    return rule;
}

// E[h(a Z1) h(b Z2)] with corr(Z1, Z2) = rho.
double gauss_hermite_product(MarginalKind kind, double a, double b, double rho) {
    const auto& rule = hermite_rule();
    const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double u = rule.nodes(i);
        const double hu = copula_transform(kind, a * u);
        double inner = 0.0;
        for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
            inner += rule.weights(j) * copula_transform(kind, b * (rho * u + c * rule.nodes(j)));
        }
        sum += rule.weights(i) * hu * inner;
    }
    return sum;
}

double copula_pair_covariance(MarginalKind kind, double a, double b, double rho, bool standardize) {
    if (rho == 0.0 || a == 0.0 || b == 0.0) return 0.0;
    if (standardize) {
        if (std::abs(rho) == 1.0) return rho * marginal_variance(kind);
        if (kind == MarginalKind::StandardNormal) return rho;
        if (kind == MarginalKind::UniformSym) return 2.0 / std::numbers::pi * std::asin(rho / 2.0);
    } else if (kind == MarginalKind::StandardNormal) {
        return a * b * rho;
    }
    return gauss_hermite_product(kind, a, b, rho);
}

}  // namespace

PsdFactor factorize_psd(const CovMatrix& s, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("factorize_psd: tol must be nonnegative");
    const Eigen::Index d = s.dim();
    PsdFactor out;
    if (d == 0) return out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.entries());
    if (solver.info() != Eigen::Success) throw std::runtime_error("factorize_psd: eigendecomposition failed");
    const auto& ev = solver.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -1e-8 * scale) {
        throw std::domain_error("factorize_psd: matrix is not positive semi-definite");
    }
    const double cutoff = tol * std::max(ev.maxCoeff(), 0.0);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (ev(i) > cutoff && ev(i) > 0.0) kept.push_back(i);
    }
    out.rank = static_cast<Eigen::Index>(kept.size());
    out.factor.resize(d, out.rank);
    for (Eigen::Index c = 0; c < out.rank; ++c) {
        const Eigen::Index i = kept[static_cast<std::size_t>(c)];
        out.factor.col(c) = solver.eigenvectors().col(i) * std::sqrt(ev(i));
    }
    return out;
}

DataMatrix mvn_sample(const PsdFactor& factor, std::size_t count, RngStream& rng) {
    if (count == 0) throw std::invalid_argument("mvn_sample: count must be positive");
    const auto n = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd g(factor.rank, n);
    rng.fill_normal(g.data(), g.data() + g.size());
    if (factor.rank == 0) return DataMatrix::Zero(n, factor.dim());
    return (factor.factor * g).transpose();
}

DataMatrix mvn_sample(const PsdFactor& factor, std::size_t count, const RngSeed& seed) {
    RngStream rng(seed);
    return mvn_sample(factor, count, rng);
}

std::size_t default_block_size(std::size_t d) noexcept {
    return (d >= 100 && d % 100 == 0) ? d / 100 : 1;
}

CovMatrix build_block_covariance(std::size_t d, std::size_t block, double decay, const RngSeed& perm_seed) {
    if (d == 0 || block == 0 || d % block != 0) {
        throw std::invalid_argument("build_block_covariance: block size must be positive and divide d");
    }
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("build_block_covariance: decay must lie in (0, 1)");
    const auto dim = static_cast<Eigen::Index>(d);
    const auto width = static_cast<Eigen::Index>(block);
    Eigen::VectorXd powers(width);
    for (Eigen::Index j = 0; j < width; ++j) powers(j) = std::pow(decay, static_cast<double>(j));
    const Eigen::MatrixXd lambda = powers * powers.transpose();

    Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index start = 0; start < dim; start += width) blocks.block(start, start, width, width) = lambda;

    RngStream stream(perm_seed);
    const auto perm = random_permutation(d, stream);
    Eigen::MatrixXd out(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            out(static_cast<Eigen::Index>(perm[j]), static_cast<Eigen::Index>(perm[k])) = blocks(j, k);
        }
    }
    return CovMatrix::assume_psd(out, {"block", {{"d", static_cast<double>(d)},
                                                 {"block", static_cast<double>(block)},
                                                 {"decay", decay}}});
}

DataMatrix copula_sample(const CovMatrix& s, MarginalKind kind, std::size_t n, RngStream& rng, bool standardize) {
    const auto& diag = s.entries().diagonal();
    if (standardize && (diag.array() <= 0.0).any()) {
        throw std::invalid_argument("copula_sample: standardize requires a positive diagonal");
    }
    DataMatrix y = mvn_sample(*s.factor(), n, rng);
    if (standardize) y = y * diag.cwiseSqrt().cwiseInverse().asDiagonal();
    return y.unaryExpr([kind](double z) { return copula_transform(kind, z); });
}

CovMatrix copula_covariance(const CovMatrix& s, MarginalKind kind, bool standardize) {
    const auto& e = s.entries();
    const Eigen::Index d = s.dim();
    const Eigen::VectorXd sd = e.diagonal().cwiseMax(0.0).cwiseSqrt();
    if (standardize && (sd.array() <= 0.0).any()) {
        throw std::invalid_argument("copula_covariance: standardize requires a positive diagonal");
    }
    Eigen::MatrixXd out(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = k; j < d; ++j) {
            double rho = (sd(j) > 0.0 && sd(k) > 0.0) ? e(j, k) / (sd(j) * sd(k)) : 0.0;
            if (j == k || std::abs(rho) > 1.0 - 1e-12) rho = std::copysign(1.0, rho);
            const double a = standardize ? 1.0 : sd(j);
            const double b = standardize ? 1.0 : sd(k);
            out(j, k) = out(k, j) = copula_pair_covariance(kind, a, b, rho, standardize);
        }
    }
    CovMatrix result(out, {"copula", {{"standardize", standardize ? 1.0 : 0.0}}});
    return result.is_psd() ? result.certified() : result;
}

}  // namespace hdboot
