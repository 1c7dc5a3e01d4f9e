#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sill/dictionary.hpp"
#include "sill/regression.hpp"
#include "sill/vector_field.hpp"

namespace sill {

struct SystemConfig {
    std::string name; // "vdp" or "toggle"
    std::map<std::string, double> params;
};

struct DomainConfig {
    Eigen::VectorXd lo, hi;
};

struct DictionaryConfig {
    Eigen::VectorXd spacing;
    double alpha = 1.0;
};

struct RegressionSection {
    int per_dim = 0; // 0 = size for about 4 N_L samples
    GridMode mode = GridMode::lattice;
    std::uint64_t seed = 0;
    double ridge = 0.0;
};

struct EnsembleSpec {
    int count = 0;
    std::uint64_t seed = 0;
};

struct SimulationSection {
    double dt = 0.0;
    double horizon = 0.0;
    std::vector<Eigen::VectorXd> initial_conditions;
    std::optional<EnsembleSpec> ensemble;
};

struct AnalysisSection {
    std::vector<double> alphas;
    int sup_search_density = 24;
    int sample_count = 100;
    double min_offset_fraction = 0.48; // of the smallest mesh spacing
    std::uint64_t seed = 2024;
};

struct OutputSection {
    std::string directory;
};

struct ExperimentConfig {
    SystemConfig system;
    DomainConfig domain;
    DictionaryConfig dictionary;
    RegressionSection regression;
    SimulationSection simulation;
    AnalysisSection analysis;
    OutputSection output;
    std::string config_hash; // FNV-1a of the raw config bytes
};

/// Parses and fully validates a config document. Unknown keys are rejected;
/// parse failures and validation failures throw ConfigError with a line or
/// JSON-path anchor.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Instantiates the benchmark system named in the config.
VectorField make_system(const SystemConfig& system);

/// Lattice dictionary per the config's domain/dictionary sections.
SILLDictionary make_dictionary(const ExperimentConfig& config);

/// The configured sample grid (regression section), sized by
/// default_grid_per_dim when per_dim is 0.
SampleGrid make_grid(const ExperimentConfig& config, const SILLDictionary& dict);

/// Initial conditions: the explicit list, or `count` uniform draws over the
/// domain for an ensemble spec.
std::vector<Eigen::VectorXd> initial_conditions(const ExperimentConfig& config);

} // namespace sill
