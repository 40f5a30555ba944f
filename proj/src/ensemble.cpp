#include "orpco/ensemble.hpp"

#include "orpco/cgan.hpp"
#include "orpco/errors.hpp"
#include "orpco/gpn.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace orpco {

namespace fs = std::filesystem;

Eigen::MatrixXd DynamicsEnsemble::sample_normalized(int member, const Eigen::VectorXd& x_raw,
                                                    const Eigen::VectorXd& u_raw, int n,
                                                    std::uint64_t seed) const {
    const Eigen::VectorXd xn = norm.normalize_x(x_raw);
    const Eigen::VectorXd un = norm.normalize_u(u_raw);
    return members.at(static_cast<std::size_t>(member))->sample(xn, un, n, seed);
}

void DynamicsEnsemble::save(const std::string& dir) const {
    fs::create_directories(dir);
    nlohmann::json manifest{{"kind", kind},
                            {"members", size()},
                            {"schema", schema.to_json()},
                            {"schema_hash", schema.hash()},
                            {"normalization", norm.to_json()},
                            {"train_config", train_config_json}};
    {
        std::ofstream out(fs::path(dir) / "manifest.json");
        if (!out) throw DataError("cannot write ensemble manifest in " + dir);
        out << manifest.dump(2) << "\n";
    }
    for (int i = 0; i < size(); ++i) {
        const fs::path mdir = fs::path(dir) / ("member_" + std::to_string(i));
        fs::create_directories(mdir);
        std::ofstream out(mdir / "model.json");
        if (!out) throw DataError("cannot write member checkpoint in " + mdir.string());
        out << members[static_cast<std::size_t>(i)]->checkpoint().dump() << "\n";
    }
}

DynamicsEnsemble DynamicsEnsemble::load(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw DataError("cannot open ensemble manifest in " + dir);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed ensemble manifest: " + std::string(e.what()));
    }
    DynamicsEnsemble ens;
    ens.kind = manifest.at("kind").get<std::string>();
    ens.schema = Schema::from_json(manifest.at("schema"));
    ens.norm = Normalizer::from_json(manifest.at("normalization"));
    ens.train_config_json = manifest.value("train_config", std::string{});
    const int m = manifest.at("members").get<int>();
    for (int i = 0; i < m; ++i) {
        std::ifstream min(fs::path(dir) / ("member_" + std::to_string(i)) / "model.json");
        if (!min) throw DataError("missing member checkpoint " + std::to_string(i) + " in " + dir);
        nlohmann::json j;
        min >> j;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "cgan") ens.members.push_back(CganModel::restore(j));
        else if (kind == "gpn") ens.members.push_back(GpnModel::restore(j));
        else throw DataError("unknown member kind: " + kind);
    }
    return ens;
}

} // namespace orpco
