#include "orpco/schema.hpp"

#include "orpco/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace orpco {

std::string to_string(VarKind k) {
    switch (k) {
    case VarKind::conditional: return "conditional";
    case VarKind::control: return "control";
    case VarKind::result: return "result";
    }
    return "?";
}

VarKind var_kind_from_string(const std::string& s) {
    if (s == "conditional") return VarKind::conditional;
    if (s == "control") return VarKind::control;
    if (s == "result") return VarKind::result;
    throw ConfigError("unknown variable kind: " + s);
}

void VariableSpace::validate() const {
    if (name.empty()) throw ConfigError("variable with empty name");
    if (!(lower < upper))
        throw ConfigError("variable '" + name + "': lower bound must be below upper bound");
}

Schema::Schema(std::vector<VariableSpace> vars) : vars_(std::move(vars)) { index_and_validate(); }

void Schema::index_and_validate() {
    dim_x_ = dim_u_ = dim_y_ = 0;
    // enforce x..., u..., y... block order and unique names
    int phase = 0;
    std::vector<std::string> seen;
    for (const auto& v : vars_) {
        v.validate();
        for (const auto& s : seen)
            if (s == v.name) throw ConfigError("duplicate variable name: " + v.name);
        seen.push_back(v.name);
        int p = v.kind == VarKind::conditional ? 0 : v.kind == VarKind::control ? 1 : 2;
        if (p < phase)
            throw ConfigError("schema variables must be ordered conditional, control, result");
        phase = p;
        (p == 0 ? dim_x_ : p == 1 ? dim_u_ : dim_y_) += 1;
    }
    if (dim_u_ == 0 || dim_y_ == 0)
        throw ConfigError("schema needs at least one control and one result variable");
}

void Schema::set_y_to_x(std::vector<int> mapping) {
    if (static_cast<int>(mapping.size()) != dim_x_)
        throw ConfigError("y_to_x mapping must list one result index per conditional");
    for (int yi : mapping)
        if (yi < 0 || yi >= dim_y_) throw ConfigError("y_to_x index out of range");
    y_to_x_ = std::move(mapping);
}

nlohmann::json Schema::to_json() const {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : vars_)
        vars.push_back({{"name", v.name},
                        {"kind", to_string(v.kind)},
                        {"lower", v.lower},
                        {"upper", v.upper}});
    nlohmann::json j{{"variables", vars}};
    if (!y_to_x_.empty()) j["y_to_x"] = y_to_x_;
    return j;
}

Schema Schema::from_json(const nlohmann::json& j) {
    std::vector<VariableSpace> vars;
    for (const auto& v : j.at("variables")) {
        vars.push_back(VariableSpace{v.at("name").get<std::string>(),
                                     var_kind_from_string(v.at("kind").get<std::string>()),
                                     v.at("lower").get<double>(), v.at("upper").get<double>()});
    }
    Schema s(std::move(vars));
    if (j.contains("y_to_x")) s.set_y_to_x(j.at("y_to_x").get<std::vector<int>>());
    return s;
}

std::uint64_t Schema::hash() const {
    const std::string canon = to_json().dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed schema JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

void Schema::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema file: " + path);
    out << to_json().dump(2) << "\n";
}

} // namespace orpco
