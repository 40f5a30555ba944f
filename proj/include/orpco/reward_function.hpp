#ifndef ORPCO_REWARD_FUNCTION_HPP
#define ORPCO_REWARD_FUNCTION_HPP

#include <Eigen/Core>

#include <functional>
#include <string>
#include <utility>

namespace orpco {

/// Known scalar reward over an observed result vector (raw units). Pure.
struct RewardFunction {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> fn;
    double operator()(const Eigen::VectorXd& y) const { return fn(y); }
};

/// 1 when every component of y lies inside [lower, upper], else 0.
RewardFunction box_indicator_reward(Eigen::VectorXd lower, Eigen::VectorXd upper);

/// y'Ay + b'y + c; expectation under a Gaussian mixture is closed-form,
/// which makes this the analytic test oracle for generator moments.
RewardFunction quadratic_reward(Eigen::MatrixXd a, Eigen::VectorXd b, double c);

} // namespace orpco

#endif
