#include "hdboot/covariance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "hdboot/sampling.hpp"

namespace hdboot {

namespace {

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

/// Connected components of the off-diagonal nonzero pattern.
std::vector<std::vector<Eigen::Index>> pattern_components(const Eigen::MatrixXd& m) {
    const Eigen::Index d = m.rows();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(d));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&parent](Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            auto& up = parent[static_cast<std::size_t>(i)];
            up = parent[static_cast<std::size_t>(up)];
            i = up;
        }
        return i;
    };
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = k + 1; j < d; ++j) {
            if (m(j, k) != 0.0) {
                const auto a = find(j);
                const auto b = find(k);
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
        }
    }
    std::vector<std::vector<Eigen::Index>> groups;
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(d), -1);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto root = find(i);
        auto& s = slot[static_cast<std::size_t>(root)];
        if (s < 0) {
            s = static_cast<Eigen::Index>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(s)].push_back(i);
    }
    return groups;
}

struct BlockSpectrum {
    std::vector<Eigen::Index> index;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

}  // namespace

struct CovMatrix::FactorCache {
    std::once_flag once;
    std::shared_ptr<const PsdFactor> value;
    std::exception_ptr error;
};

std::string Provenance::to_string() const {
    if (params.empty()) return kind;
    std::string out = kind + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += " ";
        out += params[i].first + "=" + format_double(params[i].second);
    }
    return out + ")";
}

CovMatrix::CovMatrix() : cache_(std::make_shared<FactorCache>()) {}

CovMatrix::CovMatrix(const Eigen::MatrixXd& entries, Provenance provenance)
    : provenance_(std::move(provenance)), cache_(std::make_shared<FactorCache>()) {
    if (entries.rows() != entries.cols()) throw std::invalid_argument("CovMatrix: matrix must be square");
    require_finite(entries, "CovMatrix");
    entries_ = 0.5 * (entries + entries.transpose());
}

CovMatrix CovMatrix::assume_psd(const Eigen::MatrixXd& entries, Provenance provenance) {
    CovMatrix out(entries, std::move(provenance));
    out.psd_ = true;
    return out;
}

CovMatrix CovMatrix::identity(Eigen::Index d, double scale) {
    if (d < 1) throw std::invalid_argument("CovMatrix::identity: dimension must be positive");
    if (!(scale >= 0.0)) throw std::invalid_argument("CovMatrix::identity: scale must be nonnegative");
    return assume_psd(scale * Eigen::MatrixXd::Identity(d, d), {"identity", {{"scale", scale}}});
}

bool CovMatrix::is_psd(double rel_tol) const {
    if (dim() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) return false;
    const auto& ev = solver.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    return ev.minCoeff() >= -rel_tol * scale;
}

CovMatrix CovMatrix::certified(double rel_tol) const {
    if (!is_psd(rel_tol)) throw std::domain_error("CovMatrix: matrix is not positive semi-definite");
    CovMatrix out = *this;
    out.psd_ = true;
    return out;
}

std::shared_ptr<const PsdFactor> CovMatrix::factor() const {
    std::call_once(cache_->once, [this] {
        try {
            cache_->value = std::make_shared<const PsdFactor>(factorize_psd(*this));
        } catch (...) {
            cache_->error = std::current_exception();
        }
    });
    if (cache_->error) std::rethrow_exception(cache_->error);
    return cache_->value;
}

double CovError::at(const LpExponent& p) const {
    for (const auto& [key, value] : delta_p) {
        if (key == p) return value;
    }
    throw std::out_of_range("CovError: no entry for exponent " + p.to_string());
}

CovMatrix sample_covariance(const DataMatrix& x) {
    if (x.rows() < 2) throw std::invalid_argument("sample_covariance: need at least two observations");
    if (x.cols() < 1) throw std::invalid_argument("sample_covariance: need at least one variable");
    require_finite(x, "sample_covariance");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(x.rows()));
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
    return CovMatrix::assume_psd(s, {"naive", {{"n", static_cast<double>(x.rows())}}});
}

CovMatrix threshold(const CovMatrix& m, double lambda, ThresholdKind kind) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("threshold: lambda must be nonnegative");
    Eigen::MatrixXd out = m.entries();
    if (kind == ThresholdKind::Hard) {
        out = out.unaryExpr([lambda](double v) { return std::abs(v) > lambda ? v : 0.0; });
    } else {
        out = out.unaryExpr([lambda](double v) {
            const double shrunk = std::abs(v) - lambda;
            return shrunk > 0.0 ? std::copysign(shrunk, v) : 0.0;
        });
    }
    return CovMatrix(out, {kind == ThresholdKind::Hard ? "hard-threshold" : "soft-threshold", {{"lambda", lambda}}});
}

CovMatrix correlation_threshold(const CovMatrix& m, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("correlation_threshold: lambda must lie in [0, 1]");
    const auto& s = m.entries();
    const Eigen::Index d = m.dim();
    Eigen::VectorXd scale(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!(s(j, j) > 0.0)) throw std::invalid_argument("correlation_threshold: diagonal entries must be positive");
        scale(j) = std::sqrt(s(j, j));
    }
    Eigen::MatrixXd out = s;
    bool changed = false;
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j != k && std::abs(s(j, k)) / (scale(j) * scale(k)) < lambda) {
                changed |= out(j, k) != 0.0;
                out(j, k) = 0.0;
            }
        }
    }
    Provenance prov{"correlation-threshold", {{"lambda", lambda}}};
    if (!changed && m.psd_certified()) return CovMatrix::assume_psd(out, std::move(prov));
    return CovMatrix(out, std::move(prov));
}

CovMatrix band(const CovMatrix& m, std::size_t bandwidth) {
    Eigen::MatrixXd out = m.entries();
    const Eigen::Index d = m.dim();
    const auto width = static_cast<Eigen::Index>(std::min<std::size_t>(bandwidth, static_cast<std::size_t>(d)));
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (std::abs(j - k) > width) out(j, k) = 0.0;
        }
    }
    Provenance prov{"band", {{"bandwidth", static_cast<double>(bandwidth)}}};
    if (width >= d - 1 && m.psd_certified()) return CovMatrix::assume_psd(out, std::move(prov));
    return CovMatrix(out, std::move(prov));
}

CovMatrix psd_project(const CovMatrix& m, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("psd_project: tol must be nonnegative");
    if (m.psd_certified()) return m;
    const auto& s = m.entries();
    const Eigen::Index d = m.dim();

    std::vector<BlockSpectrum> blocks;
    double largest = 0.0;
    for (auto& index : pattern_components(s)) {
        const auto size = static_cast<Eigen::Index>(index.size());
        BlockSpectrum block;
        if (size == 1) {
            block.values = Eigen::VectorXd::Constant(1, s(index[0], index[0]));
            block.vectors = Eigen::MatrixXd::Ones(1, 1);
        } else {
            Eigen::MatrixXd sub(size, size);
            for (Eigen::Index b = 0; b < size; ++b) {
                for (Eigen::Index a = 0; a < size; ++a) sub(a, b) = s(index[a], index[b]);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
            if (solver.info() != Eigen::Success) throw std::runtime_error("psd_project: eigendecomposition failed");
            block.values = solver.eigenvalues();
            block.vectors = solver.eigenvectors();
        }
        largest = std::max(largest, block.values.cwiseAbs().maxCoeff());
        block.index = std::move(index);
        blocks.push_back(std::move(block));
    }

    const double cutoff = tol * std::max(largest, 1.0);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (auto& block : blocks) {
        const Eigen::VectorXd clipped = block.values.unaryExpr([cutoff](double v) { return v < cutoff ? 0.0 : v; });
        const Eigen::MatrixXd rebuilt = block.vectors * clipped.asDiagonal() * block.vectors.transpose();
        const auto size = static_cast<Eigen::Index>(block.index.size());
        for (Eigen::Index b = 0; b < size; ++b) {
            for (Eigen::Index a = 0; a < size; ++a) out(block.index[a], block.index[b]) = rebuilt(a, b);
        }
    }
    auto prov = m.provenance();
    prov.kind = "psd(" + prov.kind + ")";
    return CovMatrix::assume_psd(out, std::move(prov));
}

std::vector<double> CvOptions::uniform_grid(std::size_t points) {
    if (points == 0) throw std::invalid_argument("uniform_grid: need at least one point");
    std::vector<double> grid(points);
    if (points == 1) return {0.0};
    for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

CvOptions CvOptions::defaults() { return CvOptions{uniform_grid(40), 10}; }

CvResult cv_select_lambda(const DataMatrix& x, const CvOptions& options, const RngSeed& seed) {
    const auto& grid = options.grid;
    if (grid.empty()) throw std::invalid_argument("cv_select_lambda: empty grid");
    if (options.folds == 0) throw std::invalid_argument("cv_select_lambda: folds must be positive");
    if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0 || grid.back() > 1.0) {
        throw std::invalid_argument("cv_select_lambda: grid must be sorted inside [0, 1]");
    }
    const Eigen::Index n = x.rows();
    if (n < 6) throw std::invalid_argument("cv_select_lambda: need at least 6 observations to split");
    const Eigen::Index n1 = (n + 2) / 3;
    const Eigen::Index n2 = n - n1;

    std::vector<double> risks(grid.size(), 0.0);
    for (std::size_t fold = 0; fold < options.folds; ++fold) {
        RngStream stream(seed.child(fold));
        const auto perm = random_permutation(static_cast<std::size_t>(n), stream);
        DataMatrix first(n1, x.cols());
        DataMatrix second(n2, x.cols());
        for (Eigen::Index i = 0; i < n1; ++i) first.row(i) = x.row(static_cast<Eigen::Index>(perm[i]));
        for (Eigen::Index i = 0; i < n2; ++i) second.row(i) = x.row(static_cast<Eigen::Index>(perm[n1 + i]));
        const CovMatrix pilot = sample_covariance(first);
        const CovMatrix target = sample_covariance(second);

        // Kept sets shrink as lambda grows, so an unchanged count means an
        // unchanged thresholded matrix and the previous risk can be reused.
        const auto& s = pilot.entries();
        const Eigen::VectorXd scale = s.diagonal().cwiseSqrt();
        std::vector<double> corr;
        corr.reserve(static_cast<std::size_t>(x.cols() * (x.cols() - 1) / 2));
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            for (Eigen::Index j = k + 1; j < x.cols(); ++j) corr.push_back(std::abs(s(j, k)) / (scale(j) * scale(k)));
        }
        std::sort(corr.begin(), corr.end());

        std::size_t previous_kept = static_cast<std::size_t>(-1);
        double previous_risk = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto kept = static_cast<std::size_t>(corr.end() - std::lower_bound(corr.begin(), corr.end(), grid[g]));
            double risk = previous_risk;
            if (kept != previous_kept) {
                const CovMatrix projected = psd_project(correlation_threshold(pilot, grid[g]));
                risk = (projected.entries() - target.entries()).norm();
            }
            previous_kept = kept;
            previous_risk = risk;
            risks[g] += risk;
        }
    }
    for (auto& r : risks) r /= static_cast<double>(options.folds);

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (risks[g] < risks[best]) best = g;
    }
    return CvResult{grid[best], std::move(risks)};
}

CovDiagnostics cov_diagnostics(const CovMatrix& s, double rank_tol) {
    if (s.dim() == 0) throw std::invalid_argument("cov_diagnostics: empty matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.entries(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("cov_diagnostics: eigendecomposition failed");
    const auto& ev = solver.eigenvalues();
    const double top = ev.maxCoeff();
    const double op = ev.cwiseAbs().maxCoeff();

    CovDiagnostics out;
    out.rank = top > 0.0 ? static_cast<Eigen::Index>((ev.array() > rank_tol * top).count()) : 0;
    out.sigma_min_sq = s.entries().diagonal().minCoeff();
    out.sigma_max_sq = s.entries().diagonal().maxCoeff();
    out.effective_rank = op > 0.0 ? s.entries().trace() / op : 0.0;
    return out;
}

CovError cov_error(const CovMatrix& est, const CovMatrix& truth, std::span<const LpExponent> ps) {
    if (est.dim() != truth.dim()) throw std::invalid_argument("cov_error: dimension mismatch");
    const Eigen::MatrixXd diff = est.entries() - truth.entries();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(diff, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("cov_error: eigendecomposition failed");

    CovError out;
    out.delta_op = solver.eigenvalues().cwiseAbs().maxCoeff();
    const std::span<const double> vec(diff.data(), static_cast<std::size_t>(diff.size()));
    for (const auto& p : ps) out.delta_p.emplace_back(p, lp_norm(vec, p.resolve(static_cast<std::size_t>(est.dim()))));
    return out;
}

CovError cov_error(const CovMatrix& est, const CovMatrix& truth, const LpExponent& p) {
    return cov_error(est, truth, std::span<const LpExponent>(&p, 1));
}

EstimatorSpec EstimatorSpec::naive() { return EstimatorSpec{}; }

EstimatorSpec EstimatorSpec::hard_threshold(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("hard threshold: lambda must be nonnegative");
    EstimatorSpec spec;
    spec.kind = Kind::HardThreshold;
    spec.lambda = lambda;
    return spec;
}

EstimatorSpec EstimatorSpec::correlation_cv(CvOptions options) {
    EstimatorSpec spec;
    spec.kind = Kind::CorrelationThresholdCv;
    spec.cv = std::move(options);
    return spec;
}

EstimatorSpec EstimatorSpec::banded(std::size_t bandwidth) {
    EstimatorSpec spec;
    spec.kind = Kind::Band;
    spec.bandwidth = bandwidth;
    return spec;
}

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
    if (text == "naive") return naive();
    if (text == "cv" || text == "correlation-threshold") return correlation_cv();
    const auto colon = text.find(':');
    if (colon != std::string_view::npos) {
        const auto head = text.substr(0, colon);
        const auto arg = text.substr(colon + 1);
        if (head == "hard") {
            double lambda = 0.0;
            auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), lambda);
            if (ec == std::errc{} && ptr == arg.data() + arg.size()) return hard_threshold(lambda);
        } else if (head == "band") {
            std::size_t width = 0;
            auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), width);
            if (ec == std::errc{} && ptr == arg.data() + arg.size()) return banded(width);
        }
    }
    throw std::invalid_argument("unknown estimator '" + std::string(text) +
                                "' (expected naive, cv, hard:<lambda> or band:<l>)");
}

std::string EstimatorSpec::to_string() const {
    switch (kind) {
        case Kind::Naive:
            return "naive";
        case Kind::HardThreshold:
            return "hard:" + format_double(lambda);
        case Kind::CorrelationThresholdCv:
            return "cv";
        case Kind::Band:
            return "band:" + std::to_string(bandwidth);
    }
    return "unknown";
}

CovMatrix estimate_covariance(const DataMatrix& x, const EstimatorSpec& spec, const RngSeed& seed) {
    const CovMatrix naive = sample_covariance(x);
    switch (spec.kind) {
        case EstimatorSpec::Kind::Naive:
            return naive;
        case EstimatorSpec::Kind::HardThreshold:
            return psd_project(threshold(naive, spec.lambda, ThresholdKind::Hard));
        case EstimatorSpec::Kind::Band:
            return psd_project(band(naive, spec.bandwidth));
        case EstimatorSpec::Kind::CorrelationThresholdCv: {
            const CvResult cv = cv_select_lambda(x, spec.cv, seed);
            return psd_project(correlation_threshold(naive, cv.lambda_hat));
        }
    }
    throw std::logic_error("estimate_covariance: unknown estimator");
}

}  // namespace hdboot
