#pragma once

#include <string>

#include <Eigen/Dense>

#include "sill/dictionary.hpp"
#include "sill/generator.hpp"
#include "sill/regression.hpp"

namespace sill {

inline constexpr const char* kBuildVersion = "0.1.0";
inline constexpr const char* kModelFormatVersion = "1";

/// Serialized model: dictionary geometry, regression weights, generator
/// matrix, and provenance. Matrices survive a save/load round trip bitwise.
struct ModelFile {
    std::string format_version = kModelFormatVersion;
    int state_dim = 0;
    double alpha = 1.0;
    Eigen::MatrixXd centers;      // N_L x n
    Eigen::MatrixXd W;            // n x N_L
    Eigen::MatrixXd K;            // m x m
    Eigen::VectorXd domain_lo, domain_hi, mesh_spacing;
    std::string config_hash;
    std::string build_version = kBuildVersion;
};

ModelFile make_model_file(const SILLDictionary& dict, const WeightMatrix& W,
                          const KoopmanGenerator& gen, const std::string& config_hash);

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

SILLDictionary dictionary_from_model(const ModelFile& model);
WeightMatrix weights_from_model(const ModelFile& model);
KoopmanGenerator generator_from_model(const ModelFile& model);

} // namespace sill
