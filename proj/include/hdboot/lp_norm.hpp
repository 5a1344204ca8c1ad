#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hdboot {

/// Exponent of an lp-norm: a finite p >= 1, the dimension-coupled value
/// log(d) (natural log, valid for d >= 3), or infinity.
class LpExponent {
public:
    enum class Kind { Finite, LogDim, Infinity };

    static LpExponent finite(double p);
    static LpExponent log_dim() noexcept { return LpExponent(Kind::LogDim, 0.0); }
    static LpExponent infinity() noexcept { return LpExponent(Kind::Infinity, 0.0); }

    /// Accepts a number, "logd" / "log" or "inf" / "infinity".
    static LpExponent parse(std::string_view text);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_infinite() const noexcept { return kind_ == Kind::Infinity; }

    /// Numeric exponent for vectors of length d; +inf for Infinity.
    [[nodiscard]] double resolve(std::size_t d) const;

    /// "1", "2.5", "logd", "inf".
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const LpExponent&, const LpExponent&) = default;

private:
    LpExponent(Kind kind, double p) : kind_(kind), p_(p) {}
    Kind kind_;
    double p_;
};

/// ||x||_p with the exponent resolved against d_context (0 means x.size()).
/// Uses the max-factored form m * (sum (|x_i|/m)^p)^(1/p).
double lp_norm(std::span<const double> x, const LpExponent& p, std::size_t d_context = 0);

/// Same as above for an already-resolved exponent; p may be +inf.
double lp_norm(std::span<const double> x, double p);

/// lp-norms of every column of `columns`, written to `out`.
void column_norms(const Eigen::MatrixXd& columns, double p, std::span<double> out);

/// M_{p,eta}(x) = (eta^p + sum |x_j|^p)^(1/p) for even integer p >= 2.
/// Satisfies ||x||_p <= M <= ||x||_p + eta and M >= eta.
double smooth_norm(std::span<const double> x, int p, double eta);

/// Raw log-sum-exp surrogate
///   beta^-1 log( sum_k exp(beta x_k d^{-1/p}) + exp(-beta x_k d^{-1/p}) ),  p = log d.
/// Equals log(2d)/beta at the origin.
double smooth_max_lse(std::span<const double> x, double beta);

/// Norm-scaled smooth max d^{1/p} * smooth_max_lse(x, beta) with p = log d,
/// i.e. e * smooth_max_lse. Satisfies
///   ||x||_inf <= F(x) <= ||x||_inf + e log(2d)/beta <= ||x||_p + e log(2d)/beta
/// for every p in [log d, inf]. Requires d = x.size() >= 3.
double smooth_max(std::span<const double> x, double beta);

/// Gradient of x -> ||x||_p on the open positive orthant (p > 1):
/// (x_k / M_p(x))^{p-1}.
std::vector<double> mp_gradient(std::span<const double> x, double p);

/// Closed-form second and third partial derivatives of M_p(x) = ||x||_p on the
/// open positive orthant. Each field holds the displayed expression evaluated
/// at every index combination, whether or not the indices coincide.
struct MpDerivatives {
    double norm = 0.0;
    double p = 0.0;
    /// Hessian: diagonal from the d^2/dx_k^2 formula, off-diagonal from the
    /// mixed formula. Symmetric.
    Eigen::MatrixXd second;
    /// -(p-1) x_k^{p-1} x_l^{p-1} / M^{2p-1} at every (k, l).
    Eigen::MatrixXd cross_second;
    /// d^3/dx_k^3.
    Eigen::VectorXd third_diag3;
    /// d^3/(dx_k^2 dx_l) at every (k, l).
    Eigen::MatrixXd third_kkl;
    /// d^3/(dx_k dx_l dx_m) formula for distinct indices, evaluated on demand.
    std::function<double(std::size_t, std::size_t, std::size_t)> third_klm;
};

/// Derivatives of M_p. For p < 3 the third_diag3 term contains x_k^{p-3};
/// keep x away from zero in that regime.
MpDerivatives mp_higher_derivatives(std::span<const double> x, double p);

}  // namespace hdboot
