#include "orpco/reward_function.hpp"

namespace orpco {

RewardFunction box_indicator_reward(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    return {"box_indicator", [lo = std::move(lower), hi = std::move(upper)](const Eigen::VectorXd& y) {
                for (Eigen::Index i = 0; i < y.size(); ++i)
                    if (y[i] < lo[i] || y[i] > hi[i]) return 0.0;
                return 1.0;
            }};
}

RewardFunction quadratic_reward(Eigen::MatrixXd a, Eigen::VectorXd b, double c) {
    return {"quadratic", [a = std::move(a), b = std::move(b), c](const Eigen::VectorXd& y) {
                return y.dot(a * y) + b.dot(y) + c;
            }};
}

} // namespace orpco
