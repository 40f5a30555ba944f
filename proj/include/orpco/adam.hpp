#ifndef ORPCO_ADAM_HPP
#define ORPCO_ADAM_HPP

#include "orpco/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace orpco {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Eigen::VectorXd m, v;
    long step = 0;
};

/// Adaptive-moment update in place. Throws TrainingError (with the step
/// index) on a non-finite gradient component.
inline void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
                      const AdamConfig& cfg) {
    if (params.size() != grad.size()) throw std::invalid_argument("adam_step: size mismatch");
    if (state.m.size() != params.size()) {
        state.m = Eigen::VectorXd::Zero(params.size());
        state.v = Eigen::VectorXd::Zero(params.size());
        state.step = 0;
    }
    if (!grad.allFinite())
        throw TrainingError("non-finite gradient at optimizer step " + std::to_string(state.step + 1));
    state.step += 1;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    params -= (cfg.lr / c1) *
              (state.m.array() / ((state.v.array() / c2).sqrt() + cfg.eps)).matrix();
}

} // namespace orpco

#endif
