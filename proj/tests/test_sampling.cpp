// PSD factorization, Gaussian sampling, block covariance and the Gaussian copula.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hdboot/distributions.hpp"
#include "hdboot/sampling.hpp"

using hdboot::CovMatrix;
using hdboot::MarginalKind;

namespace {

Eigen::MatrixXd random_psd(Eigen::Index d, Eigen::Index rank, std::uint64_t seed)
{
    hdboot::RngStream s{hdboot::RngSeed(seed)};
    Eigen::MatrixXd a(d, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = s.normal();
    return a * a.transpose();
}

double ks_against(std::vector<double> x, MarginalKind kind)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = hdboot::marginal_cdf(kind, x[i]);
        worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return worst;
}

// E[h(a Z1) h(b Z2)] by composite Simpson on a square, as an independent route
// to the Gauss-Hermite product rule.
double simpson_product(MarginalKind kind, double a, double b, double rho)
{
    const int m = 600;
    const double lo = -9.0, hi = 9.0, h = (hi - lo) / m;
    std::vector<double> z(m + 1), w(m + 1), ha(m + 1), hb(m + 1);
    for (int i = 0; i <= m; ++i) {
        z[i] = lo + i * h;
        w[i] = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        ha[i] = hdboot::copula_transform(kind, a * z[i]);
        hb[i] = hdboot::copula_transform(kind, b * z[i]);
    }
    const double det = 1.0 - rho * rho;
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= m; ++j) {
            const double q = (z[i] * z[i] - 2.0 * rho * z[i] * z[j] + z[j] * z[j]) / det;
            sum += w[i] * w[j] * ha[i] * hb[j] * norm * std::exp(-0.5 * q);
        }
    }
    return sum * h * h / 9.0;
}

}  // namespace

TEST_CASE("factorize_psd: reconstruction and rank", "[sampling]")
{
    const auto id = hdboot::factorize_psd(CovMatrix::identity(5));
    CHECK(id.rank == 5);
    CHECK((id.factor * id.factor.transpose() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd s = random_psd(20, 7, 1);
    const auto f = hdboot::factorize_psd(CovMatrix(s));
    CHECK(f.rank == 7);
    CHECK((f.factor * f.factor.transpose() - s).cwiseAbs().maxCoeff() < 1e-8 * s.cwiseAbs().maxCoeff());

    CHECK(hdboot::factorize_psd(CovMatrix::identity(4, 0.0)).rank == 0);
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(hdboot::factorize_psd(CovMatrix(bad)), std::domain_error);
    CHECK_THROWS_AS(CovMatrix(bad).factor(), std::domain_error);
}

TEST_CASE("build_block_covariance: permuted rank-one blocks", "[sampling]")
{
    CHECK(hdboot::default_block_size(200) == 2);
    CHECK(hdboot::default_block_size(1000) == 10);
    CHECK(hdboot::default_block_size(150) == 1);
    CHECK(hdboot::default_block_size(50) == 1);

    const std::size_t d = 200;
    const auto s = hdboot::build_block_covariance(d, 2, 0.8, hdboot::RngSeed(3));
    const auto& e = s.entries();
    CHECK(s.psd_certified());
    CHECK(e == e.transpose());
    // Every row holds exactly one partner with entry 0.8, and the pair has
    // diagonal {1, 0.64}.
    for (Eigen::Index j = 0; j < e.rows(); ++j) {
        Eigen::Index partners = 0, partner = -1;
        for (Eigen::Index k = 0; k < e.cols(); ++k) {
            if (k != j && e(j, k) != 0.0) {
                ++partners;
                partner = k;
            }
        }
        REQUIRE(partners == 1);
        CHECK(e(j, partner) == Catch::Approx(0.8));
        CHECK(std::min(e(j, j), e(partner, partner)) == Catch::Approx(0.64));
        CHECK(std::max(e(j, j), e(partner, partner)) == Catch::Approx(1.0));
    }
    CHECK(s.factor()->rank == 100);
    CHECK(hdboot::factorize_psd(hdboot::build_block_covariance(60, 6, 0.8, hdboot::RngSeed(1))).rank == 10);
    // The identity is the block-one case.
    CHECK(hdboot::build_block_covariance(10, 1, 0.8, hdboot::RngSeed(1)).entries() == Eigen::MatrixXd::Identity(10, 10));
    CHECK(hdboot::build_block_covariance(d, 2, 0.8, hdboot::RngSeed(3)).entries() == e);
    CHECK(hdboot::build_block_covariance(d, 2, 0.8, hdboot::RngSeed(4)).entries() != e);
    CHECK_THROWS_AS(hdboot::build_block_covariance(10, 3, 0.8, hdboot::RngSeed(1)), std::invalid_argument);
    CHECK_THROWS_AS(hdboot::build_block_covariance(10, 2, 1.0, hdboot::RngSeed(1)), std::invalid_argument);
}

TEST_CASE("mvn_sample: second moments, zero covariance and determinism", "[sampling]")
{
    Eigen::MatrixXd s(2, 2);
    s << 2.0, 1.0, 1.0, 1.0;
    const auto f = hdboot::factorize_psd(CovMatrix(s));
    const std::size_t n = 100000;
    const Eigen::MatrixXd x = hdboot::mvn_sample(f, n, hdboot::RngSeed(5));
    REQUIRE(x.rows() == static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd emp = x.transpose() * x / static_cast<double>(n);
    CHECK((emp - s).cwiseAbs().maxCoeff() < 0.04);
    CHECK(x.colwise().mean().cwiseAbs().maxCoeff() < 0.02);

    const auto zero = hdboot::factorize_psd(CovMatrix::identity(3, 0.0));
    CHECK(hdboot::mvn_sample(zero, 4, hdboot::RngSeed(1)) == Eigen::MatrixXd::Zero(4, 3));
    CHECK(hdboot::mvn_sample(f, 10, hdboot::RngSeed(9)) == hdboot::mvn_sample(f, 10, hdboot::RngSeed(9)));
    CHECK(hdboot::mvn_sample(f, 10, hdboot::RngSeed(9)) != hdboot::mvn_sample(f, 10, hdboot::RngSeed(10)));
    CHECK_THROWS_AS(hdboot::mvn_sample(f, 0, hdboot::RngSeed(1)), std::invalid_argument);
}

TEST_CASE("copula_sample: margins follow F", "[sampling][copula]")
{
    Eigen::MatrixXd s(2, 2);
    s << 4.0, 1.0, 1.0, 1.0;
    const std::size_t n = 100000;
    for (auto kind : {MarginalKind::UniformSym, MarginalKind::StudentT4, MarginalKind::StandardNormal}) {
        hdboot::RngStream rng(hdboot::RngSeed(11));
        const Eigen::MatrixXd x = hdboot::copula_sample(CovMatrix(s), kind, n, rng);
        for (Eigen::Index j = 0; j < 2; ++j) {
            const std::vector<double> col(x.col(j).data(), x.col(j).data() + x.rows());
            CHECK(ks_against(col, kind) < 0.01);
        }
        if (kind == MarginalKind::UniformSym) CHECK(x.cwiseAbs().maxCoeff() <= 1.0);
    }
}

TEST_CASE("copula_sample: perfectly dependent coordinates coincide", "[sampling][copula]")
{
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(3, 3, 2.0);
    hdboot::RngStream rng(hdboot::RngSeed(12));
    const Eigen::MatrixXd x = hdboot::copula_sample(CovMatrix(ones).certified(), MarginalKind::StudentT4, 100, rng);
    CHECK((x.col(0) - x.col(1)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((x.col(0) - x.col(2)).cwiseAbs().maxCoeff() < 1e-9);

    Eigen::MatrixXd zero_diag = Eigen::MatrixXd::Identity(2, 2);
    zero_diag(1, 1) = 0.0;
    CHECK_THROWS_AS(hdboot::copula_sample(CovMatrix(zero_diag), MarginalKind::StudentT4, 10, rng),
                    std::invalid_argument);
}

TEST_CASE("copula_covariance: closed forms and exact perfect dependence", "[sampling][copula]")
{
    Eigen::MatrixXd s(3, 3);
    s << 1.0, 0.5, -1.0, 0.5, 1.0, -0.5, -1.0, -0.5, 1.0;
    const auto u = hdboot::copula_covariance(CovMatrix(s), MarginalKind::UniformSym);
    CHECK(u.entries()(0, 0) == Catch::Approx(1.0 / 3.0));
    CHECK(u.entries()(0, 1) == Catch::Approx(2.0 / std::numbers::pi * std::asin(0.25)));
    CHECK(u.entries()(0, 2) == Catch::Approx(-1.0 / 3.0));
    const auto t = hdboot::copula_covariance(CovMatrix(s), MarginalKind::StudentT4);
    CHECK(t.entries()(0, 0) == 2.0);
    CHECK(t.entries()(0, 2) == -2.0);
    CHECK(t.psd_certified());
    const auto g = hdboot::copula_covariance(CovMatrix(s), MarginalKind::StandardNormal);
    CHECK(g.entries() == s);
}

TEST_CASE("copula_covariance: quadrature agrees with an independent 2-D Simpson rule", "[sampling][copula]")
{
    for (double rho : {-0.7, 0.3, 0.9}) {
        Eigen::MatrixXd s(2, 2);
        s << 1.0, rho, rho, 1.0;
        const double gh = hdboot::copula_covariance(CovMatrix(s), MarginalKind::StudentT4).entries()(0, 1);
        CHECK(gh == Catch::Approx(simpson_product(MarginalKind::StudentT4, 1.0, 1.0, rho)).epsilon(2e-4));
        // The uniform case has a closed form, which checks the Simpson rule itself.
        CHECK(simpson_product(MarginalKind::UniformSym, 1.0, 1.0, rho) ==
              Catch::Approx(2.0 / std::numbers::pi * std::asin(rho / 2.0)).margin(1e-7));
    }
    // Unstandardized scales enter the quadrature directly.
    Eigen::MatrixXd s(2, 2);
    s << 4.0, 0.6, 0.6, 0.25;  // sd 2 and 0.5, rho 0.6
    const auto c = hdboot::copula_covariance(CovMatrix(s), MarginalKind::UniformSym, false);
    CHECK(c.entries()(0, 1) == Catch::Approx(simpson_product(MarginalKind::UniformSym, 2.0, 0.5, 0.6)).epsilon(1e-6));
    double diag = 0.0;
    const int m = 4000;
    const double h = 18.0 / m;
    for (int i = 0; i <= m; ++i) {
        const double z = -9.0 + i * h;
        const double v = hdboot::copula_transform(MarginalKind::UniformSym, 2.0 * z);
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        diag += w * v * v * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    }
    CHECK(c.entries()(0, 0) == Catch::Approx(diag * h / 3.0).epsilon(1e-6));
    const auto g = hdboot::copula_covariance(CovMatrix(s), MarginalKind::StandardNormal, false);
    CHECK(g.entries()(0, 1) == Catch::Approx(0.6));
}

TEST_CASE("copula_covariance: agrees with Monte Carlo for bounded margins", "[sampling][copula]")
{
    const auto s = hdboot::build_block_covariance(10, 5, 0.8, hdboot::RngSeed(2));
    const auto truth = hdboot::copula_covariance(s, MarginalKind::UniformSym);
    hdboot::RngStream rng(hdboot::RngSeed(13));
    const std::size_t n = 200000;
    const Eigen::MatrixXd x = hdboot::copula_sample(s, MarginalKind::UniformSym, n, rng);
    const Eigen::MatrixXd emp = x.transpose() * x / static_cast<double>(n);
    // Entry variance is at most E[X^4] <= 1/5, so 5 standard errors is about 0.005.
    CHECK((emp - truth.entries()).cwiseAbs().maxCoeff() < 0.005);
}
