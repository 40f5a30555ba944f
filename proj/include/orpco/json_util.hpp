#ifndef ORPCO_JSON_UTIL_HPP
#define ORPCO_JSON_UTIL_HPP

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace orpco {

inline nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    if (rows == 0) return {};
    const auto cols = j.at(0).size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j.at(i).at(c).get<double>();
    return m;
}

} // namespace orpco

#endif
