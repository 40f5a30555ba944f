#include "orpco/gaussian.hpp"

#include "orpco/errors.hpp"
#include "orpco/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace orpco;

namespace {

// independent oracle: 1-D squared Hellinger by trapezoid integration of
// sqrt(p q) over a wide bracket
double hellinger2_1d_numeric(double m1, double v1, double m2, double v2) {
    const double lo = std::min(m1 - 12 * std::sqrt(v1), m2 - 12 * std::sqrt(v2));
    const double hi = std::max(m1 + 12 * std::sqrt(v1), m2 + 12 * std::sqrt(v2));
    const int n = 200000;
    const double h = (hi - lo) / n;
    auto pdf = [](double x, double m, double v) {
        return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2.0 * std::numbers::pi * v);
    };
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * std::sqrt(pdf(x, m1, v1) * pdf(x, m2, v2));
    }
    return 1.0 - acc * h;
}

GaussianMoments g1(double mean, double var) {
    return {Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var)};
}

} // namespace

TEST_SUITE("gaussian") {

TEST_CASE("moments: degenerate and hand-computed cases") {
    Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 3) * 2.5;
    auto m = empirical_moments(same);
    CHECK(m.mean.isApprox(Eigen::VectorXd::Constant(3, 2.5)));
    CHECK(m.cov.cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 2, 2;
    auto m2 = empirical_moments(two);
    CHECK(m2.mean.isApprox(Eigen::Vector2d(1, 1)));
    // divisor N-1 = 1
    CHECK(m2.cov(0, 0) == doctest::Approx(2.0));
    CHECK(m2.cov(0, 1) == doctest::Approx(2.0));
    CHECK(m2.cov(1, 1) == doctest::Approx(2.0));

    CHECK_THROWS(static_cast<void>(empirical_moments(Eigen::MatrixXd::Ones(1, 2))));
}

TEST_CASE("moments: law of large numbers on a standard normal") {
    Rng rng = make_rng(42);
    const int n = 100000;
    Eigen::MatrixXd draws(n, 2);
    for (int i = 0; i < n; ++i) {
        draws(i, 0) = normal(rng);
        draws(i, 1) = normal(rng);
    }
    auto m = empirical_moments(draws);
    CHECK(m.mean.norm() <= 0.02);
    CHECK((m.cov - Eigen::Matrix2d::Identity()).norm() <= 0.05);
}

TEST_CASE("squared hellinger: identity and frozen 1-D values") {
    auto a = g1(0.3, 1.7);
    CHECK(squared_hellinger(a, a) == doctest::Approx(0.0).epsilon(1e-9));

    // equal unit variances, means 0 and 1: 1 - exp(-1/8)
    const double h_means = squared_hellinger(g1(0, 1), g1(1, 1), 0.0);
    CHECK(h_means == doctest::Approx(1.0 - std::exp(-1.0 / 8.0)).epsilon(1e-9));
    CHECK(h_means == doctest::Approx(0.11750).epsilon(1e-4));
    CHECK(h_means == doctest::Approx(hellinger2_1d_numeric(0, 1, 1, 1)).epsilon(1e-6));

    // equal means, variances 1 and 4: 1 - sqrt(4/5)
    const double h_vars = squared_hellinger(g1(0, 1), g1(0, 4), 0.0);
    CHECK(h_vars == doctest::Approx(1.0 - std::sqrt(0.8)).epsilon(1e-9));
    CHECK(h_vars == doctest::Approx(0.10557).epsilon(1e-4));
    CHECK(h_vars == doctest::Approx(hellinger2_1d_numeric(0, 1, 0, 4)).epsilon(1e-6));
}

TEST_CASE("squared hellinger: symmetry, range and far-apart saturation") {
    Rng rng = make_rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 5);
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= i; ++j) l(i, j) = normal(rng) * 0.5;
            l(i, i) = 0.3 + std::fabs(l(i, i));
        }
        GaussianMoments a{Eigen::VectorXd::Random(d), l * l.transpose()};
        Eigen::MatrixXd l2 = l;
        l2.diagonal().array() += 0.2;
        GaussianMoments b{Eigen::VectorXd::Random(d), l2 * l2.transpose()};
        const double hab = squared_hellinger(a, b);
        const double hba = squared_hellinger(b, a);
        CHECK(hab == doctest::Approx(hba).epsilon(1e-12));
        CHECK(hab >= 0.0);
        CHECK(hab <= 1.0);
    }

    CHECK(squared_hellinger(g1(0, 1), g1(1000, 1)) == doctest::Approx(1.0));
}

TEST_CASE("squared hellinger: jitter rescues near-singular covariances") {
    GaussianMoments flat{Eigen::Vector2d(0, 0), Eigen::Matrix2d::Zero()};
    GaussianMoments other{Eigen::Vector2d(0.1, 0), Eigen::Matrix2d::Identity()};
    CHECK_NOTHROW(static_cast<void>(squared_hellinger(flat, other)));
    const double h = squared_hellinger(flat, flat);
    CHECK(h == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mvn log density against the 1-D closed form") {
    const double v = 2.3, m = -0.7, x = 0.4;
    const double expect =
        -0.5 * (std::log(2 * std::numbers::pi * v) + (x - m) * (x - m) / v);
    CHECK(mvn_log_density(Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, m),
                          Eigen::MatrixXd::Constant(1, 1, v)) == doctest::Approx(expect).epsilon(1e-12));
}

} // TEST_SUITE
