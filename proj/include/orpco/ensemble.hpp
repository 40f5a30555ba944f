#ifndef ORPCO_ENSEMBLE_HPP
#define ORPCO_ENSEMBLE_HPP

#include "orpco/dataset.hpp"
#include "orpco/schema.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <memory>
#include <string>
#include <vector>

namespace orpco {

/// One trained conditional sampler of the ensemble. Implementations are
/// immutable after training; sample() is pure given the seed.
class DynamicsMember {
public:
    virtual ~DynamicsMember() = default;

    /// N draws of normalized result vectors conditioned on normalized (x, u).
    virtual Eigen::MatrixXd sample(const Eigen::VectorXd& xn, const Eigen::VectorXd& un, int n,
                                   std::uint64_t seed) const = 0;
    virtual nlohmann::json checkpoint() const = 0;
    virtual std::string kind() const = 0;
};

/// M trained samplers sharing one schema and normalization. Everything above
/// this type (reward evaluation, policy search) is agnostic to the backing
/// model family.
struct DynamicsEnsemble {
    std::string kind; // "cgan" or "gpn"
    Schema schema;
    Normalizer norm;
    std::vector<std::shared_ptr<const DynamicsMember>> members;
    std::string train_config_json; // recorded verbatim in the manifest

    int size() const { return static_cast<int>(members.size()); }

    /// Sample member i at raw-unit (x, u); returns normalized result rows.
    Eigen::MatrixXd sample_normalized(int member, const Eigen::VectorXd& x_raw,
                                      const Eigen::VectorXd& u_raw, int n,
                                      std::uint64_t seed) const;

    void save(const std::string& dir) const;
    static DynamicsEnsemble load(const std::string& dir);
};

} // namespace orpco

#endif
