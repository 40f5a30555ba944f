#ifndef ORPCO_DATASET_HPP
#define ORPCO_DATASET_HPP

#include "orpco/rng.hpp"
#include "orpco/schema.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace orpco {

/// One logged tuple of conditional, control and result parameters, raw units.
struct ProcessRecord {
    Eigen::VectorXd x;
    Eigen::VectorXd u;
    Eigen::VectorXd y;
    std::optional<long> t;
};

/// Per-variable affine map taking raw values to [0, 1]:
/// normalized = (raw - shift) / scale.
class Normalizer {
public:
    Normalizer() = default;
    bool fitted() const { return fitted_; }

    static Normalizer fit_min_max(const Schema& schema, const std::vector<ProcessRecord>& records);

    double normalize(int var_index, double raw) const;
    double denormalize(int var_index, double normalized) const;
    Eigen::VectorXd normalize_x(const Eigen::VectorXd& x) const;
    Eigen::VectorXd normalize_u(const Eigen::VectorXd& u) const;
    Eigen::VectorXd normalize_y(const Eigen::VectorXd& y) const;
    Eigen::VectorXd denormalize_y(const Eigen::VectorXd& yn) const;
    Eigen::VectorXd denormalize_u(const Eigen::VectorXd& un) const;
    Eigen::VectorXd denormalize_x(const Eigen::VectorXd& xn) const;

    const Eigen::VectorXd& shift() const { return shift_; }
    const Eigen::VectorXd& scale() const { return scale_; }

    nlohmann::json to_json() const;
    static Normalizer from_json(const nlohmann::json& j);

private:
    Eigen::VectorXd shift_, scale_; // one entry per schema variable
    int dim_x_ = 0, dim_u_ = 0, dim_y_ = 0;
    bool fitted_ = false;
    Eigen::VectorXd norm_segment(const Eigen::VectorXd& v, int offset) const;
    Eigen::VectorXd denorm_segment(const Eigen::VectorXd& v, int offset) const;
};

/// Immutable-after-load collection of validated records plus the fitted
/// normalization. All accessors are pure; safe to share across workers.
class ProcessDataset {
public:
    ProcessDataset() = default;
    ProcessDataset(Schema schema, std::vector<ProcessRecord> records);

    const Schema& schema() const { return schema_; }
    const std::vector<ProcessRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const Normalizer& normalization() const { return norm_; }
    void fit_normalization();                 // min/max over own records
    void set_normalization(const Normalizer& n) { norm_ = n; }

    // Normalized design matrices (rows = records).
    Eigen::MatrixXd normalized_x() const;
    Eigen::MatrixXd normalized_u() const;
    Eigen::MatrixXd normalized_y() const;
    Eigen::MatrixXd normalized_xu() const;

    // Disjoint covering partition, deterministic given seed.
    std::vector<ProcessDataset> split(const std::vector<double>& ratios, std::uint64_t seed) const;

    void save_csv(const std::string& path) const;
    static ProcessDataset load_csv(const std::string& path, const Schema& schema);

private:
    Schema schema_;
    std::vector<ProcessRecord> records_;
    Normalizer norm_;
};

void validate_record(const Schema& schema, const ProcessRecord& r, long row_index = -1);

/// Copy of `record` with `n_dims` uniformly chosen input dimensions (x and u
/// pooled) resampled uniformly over their declared spaces; y untouched.
ProcessRecord randomize_dims(const ProcessRecord& record, const Schema& schema, int n_dims,
                             std::uint64_t seed);

struct TrajectoryStep {
    Eigen::VectorXd x;
    Eigen::VectorXd u;
    double reward = 0.0;
    Eigen::VectorXd x_next;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::size_t length() const { return steps.size(); }
    void validate() const; // x_next at t equals x at t+1
    nlohmann::json to_json() const;
    static Trajectory from_json(const nlohmann::json& j);
};

} // namespace orpco

#endif
