#include "hdboot/lp_norm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hdboot {

namespace {

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (const double v : x) m = std::max(m, std::abs(v));
    return m;
}

void require_positive_orthant(std::span<const double> x, double p) {
    if (x.empty()) throw std::invalid_argument("derivative: empty vector");
    if (!(p > 1.0)) throw std::invalid_argument("derivative: exponent must exceed 1");
    for (const double v : x) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("derivative: every coordinate must be strictly positive");
        }
    }
}

}  // namespace

LpExponent LpExponent::finite(double p) {
    if (!std::isfinite(p) || p < 1.0) {
        throw std::invalid_argument("lp exponent must be a finite real >= 1, got " + format_double(p));
    }
    return LpExponent(Kind::Finite, p);
}

LpExponent LpExponent::parse(std::string_view text) {
    if (text == "logd" || text == "log" || text == "log_d") return log_dim();
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("cannot parse lp exponent '" + std::string(text) + "'");
    }
    return finite(value);
}

double LpExponent::resolve(std::size_t d) const {
    switch (kind_) {
        case Kind::Finite:
            return p_;
        case Kind::Infinity:
            return std::numeric_limits<double>::infinity();
        case Kind::LogDim:
            if (d < 3) throw std::invalid_argument("log(d) exponent requires d >= 3");
            return std::log(static_cast<double>(d));
    }
    return p_;
}

std::string LpExponent::to_string() const {
    switch (kind_) {
        case Kind::LogDim:
            return "logd";
        case Kind::Infinity:
            return "inf";
        case Kind::Finite:
            break;
    }
    return format_double(p_);
}

double lp_norm(std::span<const double> x, const LpExponent& p, std::size_t d_context) {
    if (x.empty()) throw std::invalid_argument("lp_norm: empty vector");
    return lp_norm(x, p.resolve(d_context == 0 ? x.size() : d_context));
}

double lp_norm(std::span<const double> x, double p) {
    if (x.empty()) throw std::invalid_argument("lp_norm: empty vector");
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
    const double m = max_abs(x);
    if (m == 0.0 || std::isinf(p)) return m;
    if (p == 1.0) {
        double s = 0.0;
        for (const double v : x) s += std::abs(v);
        return s;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (const double v : x) {
            const double r = v / m;
            s += r * r;
        }
        return m * std::sqrt(s);
    }
    for (const double v : x) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s, 1.0 / p);
}

void column_norms(const Eigen::MatrixXd& columns, double p, std::span<double> out) {
    if (static_cast<Eigen::Index>(out.size()) != columns.cols()) {
        throw std::invalid_argument("column_norms: output size mismatch");
    }
    const auto rows = static_cast<std::size_t>(columns.rows());
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        out[static_cast<std::size_t>(j)] = lp_norm(std::span<const double>(columns.col(j).data(), rows), p);
    }
}

double smooth_norm(std::span<const double> x, int p, double eta) {
    if (p < 2 || p % 2 != 0) throw std::invalid_argument("smooth_norm: p must be an even integer >= 2");
    if (!(eta > 0.0)) throw std::invalid_argument("smooth_norm: eta must be positive");
    const double m = std::max(eta, max_abs(x));
    double s = std::pow(eta / m, p);
    for (const double v : x) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s, 1.0 / p);
}

double smooth_max_lse(std::span<const double> x, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("smooth_max: beta must be positive");
    if (x.size() < 3) throw std::invalid_argument("smooth_max: requires d >= 3 so that log d >= 1");
    // d^{-1/p} with p = log d is exactly 1/e for every d.
    constexpr double scale = 1.0 / std::numbers::e;
    // Exponents are +-beta*x_k*scale; shift by the largest one.
    const double shift = beta * scale * max_abs(x);
    double sum = 0.0;
    for (const double v : x) {
        const double a = beta * scale * v;
        sum += std::exp(a - shift) + std::exp(-a - shift);
    }
    return (shift + std::log(sum)) / beta;
}

double smooth_max(std::span<const double> x, double beta) {
    return std::numbers::e * smooth_max_lse(x, beta);
}

std::vector<double> mp_gradient(std::span<const double> x, double p) {
    require_positive_orthant(x, p);
    const double norm = lp_norm(x, p);
    std::vector<double> grad(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) grad[k] = std::pow(x[k] / norm, p - 1.0);
    return grad;
}

MpDerivatives mp_higher_derivatives(std::span<const double> x, double p) {
    require_positive_orthant(x, p);
    const auto d = static_cast<Eigen::Index>(x.size());
    const double norm = lp_norm(x, p);

    // Written in terms of ratios r_k = x_k / M so every term stays O(1):
    //   x_k^{a} / M^{b} = r_k^{a} * M^{a-b}.
    Eigen::VectorXd r(d);
    for (Eigen::Index k = 0; k < d; ++k) r(k) = x[static_cast<std::size_t>(k)] / norm;
    const Eigen::VectorXd g = r.array().pow(p - 1.0);  // gradient
    const double pm1 = p - 1.0;
    const double c3 = (2.0 * p - 1.0) * pm1;

    MpDerivatives out;
    out.norm = norm;
    out.p = p;
    out.cross_second = -(pm1 / norm) * (g * g.transpose());
    out.second = out.cross_second;
    for (Eigen::Index k = 0; k < d; ++k) {
        out.second(k, k) = pm1 * std::pow(r(k), p - 2.0) / norm - pm1 * std::pow(r(k), 2.0 * p - 2.0) / norm;
    }

    const double m2 = norm * norm;
    out.third_diag3.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        out.third_diag3(k) = pm1 * (p - 2.0) * std::pow(r(k), p - 3.0) / m2
                             - 3.0 * pm1 * pm1 * std::pow(r(k), 2.0 * p - 3.0) / m2
                             + c3 * std::pow(r(k), 3.0 * p - 3.0) / m2;
    }
    out.third_kkl.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double a = -pm1 * pm1 * std::pow(r(k), p - 2.0) / m2;
        const double b = c3 * std::pow(r(k), 2.0 * p - 2.0) / m2;
        for (Eigen::Index l = 0; l < d; ++l) out.third_kkl(k, l) = (a + b) * g(l);
    }
    out.third_klm = [g, c3, m2](std::size_t k, std::size_t l, std::size_t m) {
        const auto size = static_cast<std::size_t>(g.size());
        if (k >= size || l >= size || m >= size) throw std::out_of_range("third_klm: index out of range");
        return c3 * g(static_cast<Eigen::Index>(k)) * g(static_cast<Eigen::Index>(l)) *
               g(static_cast<Eigen::Index>(m)) / m2;
    };
    return out;
}

}  // namespace hdboot
