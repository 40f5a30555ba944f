#ifndef ORPCO_STATS_HPP
#define ORPCO_STATS_HPP

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace orpco {

double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v); // sample std, divisor n-1

// Spearman rank correlation with midrank tie handling.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

// AUROC for "pos scores higher than neg": Mann-Whitney with tie midranks.
double auroc(const std::vector<double>& pos, const std::vector<double>& neg);

// Two-sided paired t-test. Returns {t statistic, p value}.
std::pair<double, double> paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided p value for a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Energy distance between two samples (rows = observations).
double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace orpco

#endif
