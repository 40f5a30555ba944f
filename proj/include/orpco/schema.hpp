#ifndef ORPCO_SCHEMA_HPP
#define ORPCO_SCHEMA_HPP

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace orpco {

enum class VarKind { conditional, control, result };

std::string to_string(VarKind k);
VarKind var_kind_from_string(const std::string& s);

/// One declared process variable with its value space.
struct VariableSpace {
    std::string name;
    VarKind kind = VarKind::conditional;
    double lower = 0.0;
    double upper = 1.0;

    void validate() const; // lower < upper, non-empty name
};

/// Ordered variable declaration for a dataset: conditionals, then controls,
/// then results. Column order in CSV files follows this order.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<VariableSpace> vars);

    int dim_x() const { return dim_x_; }
    int dim_u() const { return dim_u_; }
    int dim_y() const { return dim_y_; }
    int dim_total() const { return dim_x_ + dim_u_ + dim_y_; }
    int dim_input() const { return dim_x_ + dim_u_; }

    const std::vector<VariableSpace>& vars() const { return vars_; }
    const VariableSpace& var(int i) const { return vars_.at(static_cast<std::size_t>(i)); }
    const VariableSpace& x_var(int i) const { return vars_.at(static_cast<std::size_t>(i)); }
    const VariableSpace& u_var(int i) const { return vars_.at(static_cast<std::size_t>(dim_x_ + i)); }
    const VariableSpace& y_var(int i) const { return vars_.at(static_cast<std::size_t>(dim_x_ + dim_u_ + i)); }

    // For continuous control: result index feeding each conditional on rollout,
    // or empty when the dataset is one-step (discrete control).
    const std::vector<int>& y_to_x() const { return y_to_x_; }
    void set_y_to_x(std::vector<int> mapping);
    bool has_y_to_x() const { return !y_to_x_.empty(); }

    std::uint64_t hash() const; // FNV-1a over the canonical JSON form

    nlohmann::json to_json() const;
    static Schema from_json(const nlohmann::json& j);
    static Schema load(const std::string& path);
    void save(const std::string& path) const;

private:
    std::vector<VariableSpace> vars_;
    std::vector<int> y_to_x_;
    int dim_x_ = 0, dim_u_ = 0, dim_y_ = 0;
    void index_and_validate();
};

} // namespace orpco

#endif
