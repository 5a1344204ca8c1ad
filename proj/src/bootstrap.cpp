#include "hdboot/bootstrap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hdboot/sampling.hpp"

namespace hdboot {

namespace {

constexpr Eigen::Index kChunk = 256;

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

void require_draw_count(std::size_t B) {
    if (B == 0) throw std::invalid_argument("bootstrap: B must be positive");
}

// Columns of `factor * G` where column b of G holds `inner` normals from seed.child(b).
// Norms of every column go to norms[i][b] for each exponent.
void linear_gaussian_norms(const Eigen::MatrixXd& factor, std::span<const double> exponents, std::size_t B,
                           const RngSeed& seed, std::vector<std::vector<double>>& norms) {
    const Eigen::Index inner = factor.cols();
    const Eigen::Index d = factor.rows();
    norms.assign(exponents.size(), std::vector<double>(B, 0.0));
    if (inner == 0) return;
    Eigen::MatrixXd g(inner, kChunk);
    Eigen::MatrixXd v(d, kChunk);
    const auto total = static_cast<Eigen::Index>(B);
    for (Eigen::Index start = 0; start < total; start += kChunk) {
        const Eigen::Index width = std::min(kChunk, total - start);
        for (Eigen::Index c = 0; c < width; ++c) {
            RngStream stream(seed.child(static_cast<std::uint64_t>(start + c)));
            stream.fill_normal(g.col(c).data(), g.col(c).data() + inner);
        }
        v.leftCols(width).noalias() = factor * g.leftCols(width);
        for (Eigen::Index c = 0; c < width; ++c) {
            const std::span<const double> col(v.col(c).data(), static_cast<std::size_t>(d));
            for (std::size_t i = 0; i < exponents.size(); ++i) {
                norms[i][static_cast<std::size_t>(start + c)] = lp_norm(col, exponents[i]);
            }
        }
    }
}

std::vector<double> resolve_all(std::span<const LpExponent> ps, std::size_t d) {
    std::vector<double> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(p.resolve(d));
    return out;
}

std::vector<EmpiricalDistribution> package(std::vector<std::vector<double>>& norms, std::span<const LpExponent> ps,
                                           const std::string& engine, std::size_t B, const RngSeed& seed) {
    std::vector<EmpiricalDistribution> out;
    out.reserve(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        out.emplace_back(std::move(norms[i]), DrawMeta{engine, ps[i].to_string(), B, seed.to_string()});
    }
    return out;
}

std::vector<EmpiricalDistribution> gaussian_draws(const CovMatrix& sigma, std::span<const LpExponent> ps,
                                                  std::size_t B, const RngSeed& seed, const std::string& engine) {
    require_draw_count(B);
    const auto factor = sigma.factor();
    std::vector<std::vector<double>> norms;
    linear_gaussian_norms(factor->factor, resolve_all(ps, static_cast<std::size_t>(sigma.dim())), B, seed, norms);
    return package(norms, ps, engine, B, seed);
}

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples, DrawMeta meta)
    : samples_(std::move(samples)), meta_(std::move(meta)) {
    if (samples_.empty()) throw std::invalid_argument("EmpiricalDistribution: empty sample");
    for (const double v : samples_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("EmpiricalDistribution: samples must be finite and nonnegative");
        }
    }
    std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDistribution::cdf(double t) const {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), t);
    return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

std::size_t EmpiricalDistribution::count_greater(double t) const {
    return static_cast<std::size_t>(samples_.end() - std::upper_bound(samples_.begin(), samples_.end(), t));
}

std::size_t EmpiricalDistribution::count_at_least(double t) const {
    return static_cast<std::size_t>(samples_.end() - std::lower_bound(samples_.begin(), samples_.end(), t));
}

void EmpiricalDistribution::write_csv(std::ostream& out) const {
    out << "engine=" << meta_.engine << ";p=" << meta_.p << ";B=" << meta_.B << ";seed=" << meta_.seed << '\n';
    for (const double v : samples_) out << format_double(v) << '\n';
}

EmpiricalDistribution EmpiricalDistribution::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("EmpiricalDistribution: missing header");
    DrawMeta meta;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const auto end = std::min(line.find(';', pos), line.size());
        const std::string field = line.substr(pos, end - pos);
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("EmpiricalDistribution: bad header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "engine") {
            meta.engine = value;
        } else if (key == "p") {
            meta.p = value;
        } else if (key == "B") {
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), meta.B);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw std::invalid_argument("EmpiricalDistribution: bad B in header");
            }
        } else if (key == "seed") {
            meta.seed = value;
        } else {
            throw std::invalid_argument("EmpiricalDistribution: unknown header key '" + key + "'");
        }
        pos = end + 1;
    }
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc{} || ptr != line.data() + line.size()) {
            throw std::invalid_argument("EmpiricalDistribution: bad value '" + line + "'");
        }
        values.push_back(v);
    }
    return EmpiricalDistribution(std::move(values), std::move(meta));
}

EmpiricalDistribution gpb_draws(const CovMatrix& sigma_hat, const LpExponent& p, std::size_t B, const RngSeed& seed) {
    return std::move(gpb_draws(sigma_hat, std::span<const LpExponent>(&p, 1), B, seed).front());
}

std::vector<EmpiricalDistribution> gpb_draws(const CovMatrix& sigma_hat, std::span<const LpExponent> ps,
                                             std::size_t B, const RngSeed& seed) {
    return gaussian_draws(sigma_hat, ps, B, seed, "gpb");
}

EmpiricalDistribution proxy_draws(const CovMatrix& sigma_true, const LpExponent& p, std::size_t B,
                                  const RngSeed& seed) {
    return std::move(proxy_draws(sigma_true, std::span<const LpExponent>(&p, 1), B, seed).front());
}

std::vector<EmpiricalDistribution> proxy_draws(const CovMatrix& sigma_true, std::span<const LpExponent> ps,
                                               std::size_t B, const RngSeed& seed) {
    return gaussian_draws(sigma_true, ps, B, seed, "proxy");
}

EmpiricalDistribution gmb_draws(const DataMatrix& x, const LpExponent& p, std::size_t B, const RngSeed& seed,
                                GmbMode mode) {
    return std::move(gmb_draws(x, std::span<const LpExponent>(&p, 1), B, seed, mode).front());
}

std::vector<EmpiricalDistribution> gmb_draws(const DataMatrix& x, std::span<const LpExponent> ps, std::size_t B,
                                             const RngSeed& seed, GmbMode mode) {
    require_draw_count(B);
    if (x.rows() < 2) throw std::invalid_argument("gmb_draws: need at least two observations");
    if (mode == GmbMode::ViaCovariance) return gaussian_draws(sample_covariance(x), ps, B, seed, "gmb");

    // Column b of (X - Xbar)' g_b / sqrt(n) with g_b ~ N(0, I_n).
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd scaled = (x.rowwise() - mean).transpose() / std::sqrt(static_cast<double>(x.rows()));
    std::vector<std::vector<double>> norms;
    linear_gaussian_norms(scaled, resolve_all(ps, static_cast<std::size_t>(x.cols())), B, seed, norms);
    return package(norms, ps, "gmb", B, seed);
}

std::size_t quantile_rank(std::size_t B, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile: alpha must lie in (0, 1)");
    if (B == 0) throw std::invalid_argument("quantile: empty distribution");
    const double x = alpha * static_cast<double>(B);
    const double nearest = std::round(x);
    const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, B);
}

double empirical_quantile(const EmpiricalDistribution& d, double alpha) {
    return d.samples()[quantile_rank(d.size(), alpha) - 1];
}

SampleMoments moments(const EmpiricalDistribution& d) {
    const auto& x = d.samples();
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    return {mean, x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0};
}

double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& x = a.samples();
    const auto& y = b.samples();
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < x.size() || j < y.size()) {
        double t;
        if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
            t = x[i];
        } else {
            t = y[j];
        }
        while (i < x.size() && x[i] <= t) ++i;
        while (j < y.size() && y[j] <= t) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return best;
}

}  // namespace hdboot
