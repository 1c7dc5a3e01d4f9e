#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sill/dictionary.hpp"
#include "sill/vector_field.hpp"

namespace sill {

enum class GridMode { lattice, random };

/// Sampling points used to fit and evaluate models. `description` records how
/// the grid was generated so reports stay reproducible.
struct SampleGrid {
    Eigen::MatrixXd points; // S x n
    std::string description;

    int size() const noexcept { return static_cast<int>(points.rows()); }
};

/// Regression weights: f(x) ~ W * Lambda(x), rows indexed by state component,
/// columns by dictionary center.
struct WeightMatrix {
    Eigen::MatrixXd W; // n x N_L
};

struct RegressionReport {
    Eigen::VectorXd rel_l2_error;     // per component, ||f_i - W_i Lambda||_2 / ||f_i||_2 on the grid
    Eigen::VectorXd max_abs_residual; // per component, sup |delta_i| on the grid
    double ridge = 0.0;
    bool rank_deficient = false;
    // Components whose grid L2 norm of f_i is zero; for these rel_l2_error
    // holds the absolute L2 error instead.
    std::vector<int> zero_norm_components;
};

/// Lattice mode: per_dim^n uniform grid over the dictionary domain (per_dim >= 2).
/// Random mode: per_dim^n i.i.d. uniform points, deterministic in `seed`.
/// Throws ResourceError above 1e7 points.
SampleGrid make_sample_grid(const SILLDictionary& dict, int per_dim, GridMode mode,
                            std::uint64_t seed);

/// per_dim for a lattice grid with roughly `factor * N_L` points (default
/// sizing used by the CLI when a config does not override it).
int default_grid_per_dim(const SILLDictionary& dict, double factor = 4.0);

/// Least-squares fit of W minimizing sum_s ||f(x_s) - W Lambda(x_s)||^2 +
/// ridge ||W||_F^2 via one rank-revealing orthogonal factorization shared by
/// all n right-hand sides. A rank-deficient design with ridge = 0 yields the
/// minimum-norm solution and sets the report flag.
std::pair<WeightMatrix, RegressionReport> fit_weights(const VectorField& f,
                                                      const SILLDictionary& dict,
                                                      const SampleGrid& grid,
                                                      double ridge);

/// Pointwise regression residual delta(x) = f(x) - W Lambda(x).
Eigen::VectorXd residual_at(const VectorField& f, const WeightMatrix& W,
                            const SILLDictionary& dict, const Eigen::VectorXd& x);

/// Lambda-block design matrix over the grid (row s = Lambda(x_s)); shared by
/// the regression and generator assembly paths.
Eigen::MatrixXd lambda_design_matrix(const SILLDictionary& dict, const SampleGrid& grid);

} // namespace sill
