#ifndef ORPCO_CGAN_HPP
#define ORPCO_CGAN_HPP

#include "orpco/dataset.hpp"
#include "orpco/ensemble.hpp"
#include "orpco/mlp.hpp"

#include <cstdint>
#include <vector>

namespace orpco {

struct CganConfig {
    int epochs = 3000;
    int batch_size = 256;
    double gp_lambda = 10.0;      // gradient-penalty coefficient
    int noise_dim = -1;           // core noise width; -1: dim(y) + 2
    int critic_steps = 5;         // discriminator updates per generator update
    double lr = 1e-4;             // critic rate
    double gen_lr = 1e-4;         // generator rate
    int critic_warmup = 200;      // critic-only steps before the first generator update
    int pac = 4;                  // tuples scored jointly by the critic
    double scale_floor = 1e-3;    // lower bound on the conditional scale diag
    double scale_init_sd = 0.08;  // initial per-dim scale (normalized units)
    double gen_init_gain = 1.0;   // shrink factor on generator init weights
    double beta1 = 0.5, beta2 = 0.9;
    std::vector<int> hidden = {64, 64};
    std::vector<int> scale_hidden = {48, 48};

    nlohmann::json to_json() const;
    static CganConfig from_json(const nlohmann::json& j);
};

struct EpochLoss {
    int epoch = 0;
    double discriminator = 0.0;
    double generator = 0.0;
};

/// Conditional Wasserstein GAN with gradient penalty. The generator is a
/// location-scale map
///   y = core(z_core | x, u) + L(x, u) * eps(z_eps),
/// with z uniform on (0,1), eps a standardized transform of its tail block
/// and L a conditional lower-triangular scale factor. The core carries the
/// mixture/mode structure; the scale head carries the conditional spread and
/// extrapolates its learned volatility trends off-distribution. The critic
/// scores pac (y, x, u) tuples jointly (anti-collapse packing).
class CganModel : public DynamicsMember {
public:
    CganModel() = default;
    CganModel(Mlp core, Mlp scale_head, Mlp discriminator, int noise_dim, int cond_dim,
              int result_dim, int pac, double scale_floor);

    Eigen::MatrixXd sample(const Eigen::VectorXd& xn, const Eigen::VectorXd& un, int n,
                           std::uint64_t seed) const override;
    nlohmann::json checkpoint() const override;
    std::string kind() const override { return "cgan"; }
    static std::shared_ptr<CganModel> restore(const nlohmann::json& j);

    const Mlp& core() const { return core_; }
    const Mlp& scale_head() const { return scale_; }
    const Mlp& discriminator() const { return disc_; }
    int noise_dim() const { return noise_dim_; }
    int pac() const { return pac_; }
    bool trained() const { return trained_; }

private:
    Mlp core_, scale_, disc_;
    int noise_dim_ = 0, cond_dim_ = 0, result_dim_ = 0, pac_ = 1;
    double scale_floor_ = 1e-3;
    bool trained_ = false;
    friend struct CganTrainAccess;
};

/// Trains one member on normalized inputs XU (rows) and results Y.
CganModel train_cgan(const Eigen::MatrixXd& xu, const Eigen::MatrixXd& y, const CganConfig& cfg,
                     std::uint64_t seed, std::vector<EpochLoss>* log = nullptr);

/// Trains M independently seeded members (parallel over members).
DynamicsEnsemble train_cgan_ensemble(const ProcessDataset& train, int m, const CganConfig& cfg,
                                     std::uint64_t seed);

} // namespace orpco

#endif
