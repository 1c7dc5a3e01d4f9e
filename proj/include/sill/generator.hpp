#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sill/dictionary.hpp"
#include "sill/regression.hpp"
#include "sill/vector_field.hpp"

namespace sill {

enum class AssemblyMode { projection, state_only };

/// Constant lifted-dynamics matrix over psi = [1; x; Lambda]. Row 0 is the
/// constant observable (identically zero), rows 1..n are the state
/// observables ([0 | 0 | W]), the remaining rows drive the Lambda block.
struct KoopmanGenerator {
    Eigen::MatrixXd K; // m x m
    int state_dim = 0;
    AssemblyMode mode = AssemblyMode::projection;
    bool rank_deficient = false;

    int lift_dim() const noexcept { return static_cast<int>(K.rows()); }
    int num_lambda_rows() const noexcept { return lift_dim() - 1 - state_dim; }
};

/// Builds the generator: row 0 zero, state rows [0 | 0 | W], and each Lambda
/// row the least-squares projection of the exact derivative
/// dLambda_{v_l}/dt(x_s) onto span(psi) over the grid (optional ridge, shared
/// factorization). state_only mode leaves the Lambda rows zero.
KoopmanGenerator assemble_generator(const SILLDictionary& dict, const WeightMatrix& W,
                                    const VectorField& f, const SampleGrid& grid,
                                    double ridge,
                                    AssemblyMode mode = AssemblyMode::projection);

/// The join-collapsed pointwise approximation to dLambda_{v_l}/dt:
///   sum_i sum_k alpha (1 - lambda_{mu_i^l}(x_i)) w_ik Lambda_{v_max(l,k)}(x),
/// with the x-dependent coefficient kept exact.
double join_collapsed_rhs(const Eigen::VectorXd& x, int l, const SILLDictionary& dict,
                        const WeightMatrix& W);

/// Grid statistics of eps(x) = ||dpsi/dt(x) - K psi(x)||_2 with dpsi/dt
/// computed exactly (0 for the constant row, f(x) for the state rows, the
/// chain-rule derivative for each Lambda row).
struct ClosureResidualReport {
    Eigen::VectorXd lambda_row_rms; // per Lambda row, RMS over the grid
    Eigen::VectorXd lambda_row_sup; // per Lambda row, sup over the grid
    Eigen::VectorXd epsilon_samples; // per grid point
    double epsilon_rms = 0.0;
    double epsilon_sup = 0.0;
};

ClosureResidualReport closure_residual(const SILLDictionary& dict, const WeightMatrix& W,
                                       const VectorField& f, const KoopmanGenerator& gen,
                                       const SampleGrid& grid);

/// Discrete-time EDMD (snapshot matrices are m x T, one lifted state per
/// column). zeta = 0 solves the classical least squares through the
/// pseudoinverse; zeta > 0 minimizes ||next - K prev||_F^2 + zeta ||K||_{2,1}
/// by monotone accelerated proximal gradient with column-wise soft
/// thresholding, stopping at relative objective change < 1e-10 or 1e4
/// iterations.
struct EdmdResult {
    Eigen::MatrixXd K;
    bool converged = true;
    int iterations = 0;
    double objective = 0.0;
    std::vector<double> objective_trace; // accepted objective per iteration (zeta > 0)
};

EdmdResult edmd_discrete(const Eigen::MatrixXd& snapshots_prev,
                         const Eigen::MatrixXd& snapshots_next, double zeta);

} // namespace sill
