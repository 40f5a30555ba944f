#ifndef ORPCO_GPN_HPP
#define ORPCO_GPN_HPP

#include "orpco/dataset.hpp"
#include "orpco/ensemble.hpp"
#include "orpco/mlp.hpp"

#include <cstdint>
#include <vector>

namespace orpco {

struct GpnConfig {
    std::vector<int> hidden = {64, 64};
    int epochs = 200;
    int batch_size = 256;
    double lr = 1e-3;
    double var_floor = 1e-4;

    nlohmann::json to_json() const;
    static GpnConfig from_json(const nlohmann::json& j);
};

/// Gaussian probabilistic network: one MLP predicting a mean vector and raw
/// variances over the targets; the predictive covariance is diagonal with
/// variance softplus(raw) + floor.
class GpnModel : public DynamicsMember {
public:
    GpnModel() = default;
    GpnModel(Mlp net, int target_dim, double var_floor);

    Eigen::MatrixXd sample(const Eigen::VectorXd& xn, const Eigen::VectorXd& un, int n,
                           std::uint64_t seed) const override;
    nlohmann::json checkpoint() const override;
    std::string kind() const override { return "gpn"; }
    static std::shared_ptr<GpnModel> restore(const nlohmann::json& j);

    /// Predictive (mean, stddev) rows for a batch of inputs.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> predict(const Eigen::MatrixXd& input) const;
    Eigen::MatrixXd sample_at(const Eigen::MatrixXd& input, std::uint64_t seed) const;
    double mean_nll(const Eigen::MatrixXd& input, const Eigen::MatrixXd& target) const;
    bool trained() const { return trained_; }

private:
    Mlp net_;
    int target_dim_ = 0;
    double var_floor_ = 1e-4;
    bool trained_ = false;
};

/// Minimizes Gaussian negative log likelihood of targets given inputs.
/// Optional validation matrices get a per-epoch NLL entry in `val_nll`.
GpnModel train_gpn(const Eigen::MatrixXd& input, const Eigen::MatrixXd& target,
                   const GpnConfig& cfg, std::uint64_t seed,
                   const Eigen::MatrixXd* val_input = nullptr,
                   const Eigen::MatrixXd* val_target = nullptr,
                   std::vector<double>* val_nll = nullptr);

struct GpnGrid {
    std::vector<int> depths = {1, 2, 3, 4};
    std::vector<int> widths = {8, 16, 32, 64, 128, 256};
    std::vector<int> epochs = {50, 100, 200};
};

struct GpnGridResult {
    GpnConfig best;
    double best_val_nll = 0.0;
    std::vector<std::pair<GpnConfig, double>> trials;
};

/// Exhaustive search over the grid selecting lowest held-out NLL.
GpnGridResult gpn_grid_search(const Eigen::MatrixXd& train_in, const Eigen::MatrixXd& train_out,
                              const Eigen::MatrixXd& val_in, const Eigen::MatrixXd& val_out,
                              const GpnGrid& grid, const GpnConfig& base, std::uint64_t seed);

DynamicsEnsemble train_gpn_ensemble(const ProcessDataset& train, int m, const GpnConfig& cfg,
                                    std::uint64_t seed);

} // namespace orpco

#endif
