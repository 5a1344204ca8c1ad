#include "hdboot/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hdboot {

namespace {

// Lower-tail quantile of t4 for u in (0, 1/2]. Closed form for nu = 4:
// with a = 4u(1-u), q = -2 sqrt(cos(acos(sqrt a)/3)/sqrt a - 1).
// acos(sqrt a) = asin(1 - 2u), and cos(t/3) - cos(t) = 2 sin(2t/3) sin(t/3)
// keeps the difference accurate near the median.
double t4_lower_quantile(double u) noexcept {
    const double sa = std::sqrt(4.0 * u * (1.0 - u));
    const double theta = std::asin(1.0 - 2.0 * u);
    const double inner = 2.0 * std::sin(2.0 * theta / 3.0) * std::sin(theta / 3.0) / sa;
    return -2.0 * std::sqrt(std::max(inner, 0.0));
}

}  // namespace

MarginalKind parse_marginal(std::string_view text) {
    if (text == "uniform" || text == "light") return MarginalKind::UniformSym;
    if (text == "t4" || text == "heavy") return MarginalKind::StudentT4;
    if (text == "normal" || text == "gaussian") return MarginalKind::StandardNormal;
    throw std::invalid_argument("unknown marginal '" + std::string(text) + "' (expected uniform, t4 or normal)");
}

std::string to_string(MarginalKind kind) {
    switch (kind) {
        case MarginalKind::UniformSym:
            return "uniform";
        case MarginalKind::StudentT4:
            return "t4";
        case MarginalKind::StandardNormal:
            return "normal";
    }
    return "unknown";
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("normal_quantile: argument must lie in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double kLow = 0.02425;

    double x;
    if (u < kLow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - kLow) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement; the residual Phi(x) - u is taken on the smaller tail.
    const double err = (x < 0.0) ? normal_cdf(x) - u : (1.0 - u) - normal_cdf(-x);
    const double step = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

double marginal_quantile(MarginalKind kind, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("marginal_quantile: argument must lie in (0, 1)");
    switch (kind) {
        case MarginalKind::UniformSym:
            return 2.0 * u - 1.0;
        case MarginalKind::StudentT4:
            if (u == 0.5) return 0.0;
            return u < 0.5 ? t4_lower_quantile(u) : -t4_lower_quantile(1.0 - u);
        case MarginalKind::StandardNormal:
            return normal_quantile(u);
    }
    return 0.0;
}

double marginal_cdf(MarginalKind kind, double x) noexcept {
    switch (kind) {
        case MarginalKind::UniformSym:
            return std::clamp(0.5 * (x + 1.0), 0.0, 1.0);
        case MarginalKind::StudentT4: {
            const double s = 1.0 + x * x / 4.0;
            return 0.5 + 0.375 * (x / std::sqrt(s)) * (1.0 - x * x / (12.0 * s));
        }
        case MarginalKind::StandardNormal:
            return normal_cdf(x);
    }
    return 0.0;
}

double marginal_variance(MarginalKind kind) noexcept {
    switch (kind) {
        case MarginalKind::UniformSym:
            return 1.0 / 3.0;
        case MarginalKind::StudentT4:
            return 2.0;
        case MarginalKind::StandardNormal:
            return 1.0;
    }
    return 0.0;
}

double copula_transform(MarginalKind kind, double z) noexcept {
    switch (kind) {
        case MarginalKind::UniformSym:
            return std::erf(z / std::numbers::sqrt2);  // 2 Phi(z) - 1
        case MarginalKind::StandardNormal:
            return z;
        case MarginalKind::StudentT4: {
            if (z == 0.0) return 0.0;
            const double lower = normal_cdf(-std::abs(z));
            if (!(lower > 0.0)) return z > 0 ? std::numeric_limits<double>::max() : -std::numeric_limits<double>::max();
            const double q = t4_lower_quantile(lower);
            return z > 0.0 ? -q : q;
        }
    }
    return 0.0;
}

}  // namespace hdboot
