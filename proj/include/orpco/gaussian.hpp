#ifndef ORPCO_GAUSSIAN_HPP
#define ORPCO_GAUSSIAN_HPP

#include <Eigen/Core>

namespace orpco {

struct GaussianMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Unbiased sample mean and covariance (divisor N-1). Rows are observations;
/// throws std::invalid_argument for fewer than two rows.
GaussianMoments empirical_moments(const Eigen::MatrixXd& samples);

/// Closed-form squared Hellinger distance between two Gaussians,
///   H2 = 1 - det(Si)^{1/4} det(Sj)^{1/4} / det((Si+Sj)/2)^{1/2}
///            * exp(-1/8 (mi-mj)' ((Si+Sj)/2)^{-1} (mi-mj)),
/// evaluated in log space with `jitter`*I added to both covariances. The
/// exponent is clamped at -50 before exponentiation and the result clamped
/// into [0, 1]. Throws NumericalError if the midpoint covariance stays
/// non-positive-definite after jitter.
double squared_hellinger(const GaussianMoments& a, const GaussianMoments& b, double jitter = 1e-6);

/// Log density of a multivariate normal at x.
double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov);

} // namespace orpco

#endif
