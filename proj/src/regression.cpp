#include "sill/regression.hpp"

#include <cmath>
#include <random>

namespace sill {

namespace {

// Uniform double in [0, 1) built from the top 53 bits of the engine output;
// identical across platforms, unlike std::uniform_real_distribution.
double canonical_u01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace

SampleGrid make_sample_grid(const SILLDictionary& dict, int per_dim, GridMode mode,
                            std::uint64_t seed) {
    const int n = dict.state_dim();
    if (mode == GridMode::lattice && per_dim < 2) {
        throw ContractError("make_sample_grid: lattice mode needs per_dim >= 2");
    }
    if (per_dim < 1) {
        throw ContractError("make_sample_grid: per_dim must be >= 1");
    }
    const double log_count = n * std::log10(static_cast<double>(per_dim));
    if (log_count > 7.0) {
        throw ResourceError("make_sample_grid: grid would exceed 1e7 points");
    }
    std::size_t count = 1;
    for (int i = 0; i < n; ++i) count *= static_cast<std::size_t>(per_dim);

    const Eigen::VectorXd& lo = dict.domain_lo();
    const Eigen::VectorXd& hi = dict.domain_hi();
    SampleGrid grid;
    grid.points.resize(static_cast<Eigen::Index>(count), n);

    if (mode == GridMode::lattice) {
        std::vector<int> idx(n, 0);
        for (std::size_t row = 0; row < count; ++row) {
            for (int i = 0; i < n; ++i) {
                grid.points(static_cast<Eigen::Index>(row), i) =
                    lo[i] + (hi[i] - lo[i]) * idx[i] / (per_dim - 1);
            }
            for (int i = n - 1; i >= 0; --i) {
                if (++idx[i] < per_dim) break;
                idx[i] = 0;
            }
        }
        grid.description = "lattice per_dim=" + std::to_string(per_dim);
    } else {
        std::mt19937_64 eng(seed);
        for (std::size_t row = 0; row < count; ++row) {
            for (int i = 0; i < n; ++i) {
                grid.points(static_cast<Eigen::Index>(row), i) =
                    lo[i] + (hi[i] - lo[i]) * canonical_u01(eng);
            }
        }
        grid.description =
            "random per_dim=" + std::to_string(per_dim) + " seed=" + std::to_string(seed);
    }
    return grid;
}

int default_grid_per_dim(const SILLDictionary& dict, double factor) {
    const double target = factor * dict.num_centers();
    const int per_dim =
        static_cast<int>(std::ceil(std::pow(target, 1.0 / dict.state_dim())));
    return std::max(per_dim, 2);
}

Eigen::MatrixXd lambda_design_matrix(const SILLDictionary& dict, const SampleGrid& grid) {
    const int S = grid.size();
    Eigen::MatrixXd L(S, dict.num_centers());
    for (int s = 0; s < S; ++s) {
        L.row(s) = dict.lambda_values(grid.points.row(s).transpose()).transpose();
    }
    return L;
}

std::pair<WeightMatrix, RegressionReport> fit_weights(const VectorField& f,
                                                      const SILLDictionary& dict,
                                                      const SampleGrid& grid,
                                                      double ridge) {
    if (ridge < 0.0 || !std::isfinite(ridge)) {
        throw ContractError("fit_weights: ridge must be finite and >= 0");
    }
    const int n = dict.state_dim();
    const int NL = dict.num_centers();
    const int S = grid.size();
    if (grid.points.cols() != n) {
        throw ContractError("fit_weights: grid dimension mismatch");
    }

    Eigen::MatrixXd L = lambda_design_matrix(dict, grid);
    Eigen::MatrixXd F(S, n);
    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd fx = f(grid.points.row(s).transpose());
        if (!fx.allFinite()) {
            throw DomainError("fit_weights: f returned non-finite values at a grid point");
        }
        F.row(s) = fx.transpose();
    }

    // Ridge via the stacked system [L; sqrt(ridge) I]; one factorization for
    // all right-hand sides. CompleteOrthogonalDecomposition is rank-revealing
    // and yields the minimum-norm solution when the design is deficient.
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    if (ridge > 0.0) {
        A.resize(S + NL, NL);
        A.topRows(S) = L;
        A.bottomRows(NL) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(NL, NL);
        B.resize(S + NL, n);
        B.topRows(S) = F;
        B.bottomRows(NL).setZero();
    } else {
        A = L;
        B = F;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::MatrixXd Wt = cod.solve(B); // NL x n

    WeightMatrix weights{Wt.transpose()};
    RegressionReport report;
    report.ridge = ridge;
    report.rank_deficient = cod.rank() < NL;

    Eigen::MatrixXd R = F - L * Wt; // S x n residuals on the grid
    report.rel_l2_error.resize(n);
    report.max_abs_residual.resize(n);
    for (int i = 0; i < n; ++i) {
        const double fnorm = F.col(i).norm();
        const double rnorm = R.col(i).norm();
        if (fnorm == 0.0) {
            report.rel_l2_error[i] = rnorm;
            report.zero_norm_components.push_back(i);
        } else {
            report.rel_l2_error[i] = rnorm / fnorm;
        }
        report.max_abs_residual[i] = R.col(i).cwiseAbs().maxCoeff();
    }
    return {std::move(weights), std::move(report)};
}

Eigen::VectorXd residual_at(const VectorField& f, const WeightMatrix& W,
                            const SILLDictionary& dict, const Eigen::VectorXd& x) {
    if (W.W.cols() != dict.num_centers() || W.W.rows() != dict.state_dim()) {
        throw ContractError("residual_at: weight matrix shape mismatch");
    }
    return f(x) - W.W * dict.lambda_values(x);
}

} // namespace sill
