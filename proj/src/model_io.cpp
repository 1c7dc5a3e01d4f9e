#include "sill/model_io.hpp"

#include <json.hpp>

#include "sill/text_io.hpp"

namespace sill {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw ConfigError(path, "expected a 2-D array");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
            throw ConfigError(path, "ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ConfigError(path, "expected numeric entries");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(path, "expected numeric entries");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

} // namespace

ModelFile make_model_file(const SILLDictionary& dict, const WeightMatrix& W,
                          const KoopmanGenerator& gen, const std::string& config_hash) {
    ModelFile model;
    model.state_dim = dict.state_dim();
    model.alpha = dict.alpha().value();
    model.centers = dict.centers();
    model.W = W.W;
    model.K = gen.K;
    model.domain_lo = dict.domain_lo();
    model.domain_hi = dict.domain_hi();
    model.mesh_spacing = dict.mesh_spacing();
    model.config_hash = config_hash;
    return model;
}

void save_model(const ModelFile& model, const std::string& path) {
    json doc;
    doc["format_version"] = model.format_version;
    doc["state_dim"] = model.state_dim;
    doc["alpha"] = model.alpha;
    doc["centers"] = matrix_to_json(model.centers);
    doc["W"] = matrix_to_json(model.W);
    doc["K"] = matrix_to_json(model.K);
    doc["mesh"] = {{"domain_lo", vector_to_json(model.domain_lo)},
                   {"domain_hi", vector_to_json(model.domain_hi)},
                   {"spacing", vector_to_json(model.mesh_spacing)}};
    doc["provenance"] = {{"config_hash", model.config_hash},
                         {"build_version", model.build_version}};
    write_file(path, doc.dump(2) + "\n");
}

ModelFile load_model(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path, std::string("JSON parse error: ") + e.what());
    }
    ModelFile model;
    if (!doc.contains("format_version") || !doc["format_version"].is_string()) {
        throw ConfigError(path, "missing format_version");
    }
    model.format_version = doc["format_version"].get<std::string>();
    if (model.format_version != kModelFormatVersion) {
        throw ConfigError(path, "unsupported format_version '" + model.format_version + "'");
    }
    model.state_dim = doc.at("state_dim").get<int>();
    model.alpha = doc.at("alpha").get<double>();
    model.centers = matrix_from_json(doc.at("centers"), path + ":centers");
    model.W = matrix_from_json(doc.at("W"), path + ":W");
    model.K = matrix_from_json(doc.at("K"), path + ":K");
    const json& mesh = doc.at("mesh");
    model.domain_lo = vector_from_json(mesh.at("domain_lo"), path + ":mesh.domain_lo");
    model.domain_hi = vector_from_json(mesh.at("domain_hi"), path + ":mesh.domain_hi");
    model.mesh_spacing = vector_from_json(mesh.at("spacing"), path + ":mesh.spacing");
    if (doc.contains("provenance")) {
        const json& prov = doc["provenance"];
        if (prov.contains("config_hash")) {
            model.config_hash = prov["config_hash"].get<std::string>();
        }
        if (prov.contains("build_version")) {
            model.build_version = prov["build_version"].get<std::string>();
        }
    }

    const int n = model.state_dim;
    const int NL = static_cast<int>(model.centers.rows());
    const int m = 1 + n + NL;
    if (model.centers.cols() != n || model.W.rows() != n || model.W.cols() != NL ||
        model.K.rows() != m || model.K.cols() != m) {
        throw ConfigError(path, "inconsistent matrix shapes");
    }
    return model;
}

SILLDictionary dictionary_from_model(const ModelFile& model) {
    return SILLDictionary(model.centers, Steepness(model.alpha), model.domain_lo,
                          model.domain_hi, model.mesh_spacing);
}

WeightMatrix weights_from_model(const ModelFile& model) { return WeightMatrix{model.W}; }

KoopmanGenerator generator_from_model(const ModelFile& model) {
    KoopmanGenerator gen;
    gen.K = model.K;
    gen.state_dim = model.state_dim;
    gen.mode = AssemblyMode::projection;
    return gen;
}

} // namespace sill
