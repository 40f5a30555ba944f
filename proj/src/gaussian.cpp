#include "orpco/gaussian.hpp"

#include "orpco/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace orpco {

GaussianMoments empirical_moments(const Eigen::MatrixXd& samples) {
    const auto n = samples.rows();
    if (n < 2) throw std::invalid_argument("empirical_moments: need at least 2 samples");
    GaussianMoments m;
    m.mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
    m.cov = centered.transpose() * centered / static_cast<double>(n - 1);
    return m;
}

namespace {

// log determinant via Cholesky; returns false when not SPD
bool cholesky_logdet(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& llt, double& logdet) {
    llt.compute(m);
    if (llt.info() != Eigen::Success) return false;
    logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return logdet == logdet; // NaN guard
}

} // namespace

double squared_hellinger(const GaussianMoments& a, const GaussianMoments& b, double jitter) {
    if (a.mean.size() != b.mean.size())
        throw std::invalid_argument("squared_hellinger: dimension mismatch");
    const auto d = a.mean.size();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd si = a.cov + jitter * eye;
    const Eigen::MatrixXd sj = b.cov + jitter * eye;
    const Eigen::MatrixXd sm = 0.5 * (si + sj);

    Eigen::LLT<Eigen::MatrixXd> llt_i, llt_j, llt_m;
    double ld_i = 0, ld_j = 0, ld_m = 0;
    if (!cholesky_logdet(sm, llt_m, ld_m))
        throw NumericalError("squared_hellinger: midpoint covariance not positive definite after jitter");
    if (!cholesky_logdet(si, llt_i, ld_i) || !cholesky_logdet(sj, llt_j, ld_j))
        throw NumericalError("squared_hellinger: member covariance not positive definite after jitter");

    const Eigen::VectorXd diff = a.mean - b.mean;
    const double maha = diff.dot(llt_m.solve(diff));
    double log_term = 0.25 * ld_i + 0.25 * ld_j - 0.5 * ld_m - 0.125 * maha;
    if (log_term < -50.0) log_term = -50.0;
    double h2 = 1.0 - std::exp(std::min(log_term, 0.0));
    if (h2 < 0.0) h2 = 0.0;
    if (h2 > 1.0) h2 = 1.0;
    return h2;
}

double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov) {
    const auto d = x.size();
    Eigen::LLT<Eigen::MatrixXd> llt;
    double logdet = 0;
    if (!cholesky_logdet(cov, llt, logdet))
        throw NumericalError("mvn_log_density: covariance not positive definite");
    const Eigen::VectorXd diff = x - mean;
    const double maha = diff.dot(llt.solve(diff));
    return -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet + maha);
}

} // namespace orpco
