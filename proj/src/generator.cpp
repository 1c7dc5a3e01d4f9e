#include "sill/generator.hpp"

#include <cmath>
#include <limits>

namespace sill {

KoopmanGenerator assemble_generator(const SILLDictionary& dict, const WeightMatrix& W,
                                    const VectorField& f, const SampleGrid& grid,
                                    double ridge, AssemblyMode mode) {
    const int n = dict.state_dim();
    const int NL = dict.num_centers();
    const int m = dict.lift_dim();
    if (W.W.rows() != n || W.W.cols() != NL) {
        throw ContractError("assemble_generator: weight matrix shape mismatch");
    }
    if (ridge < 0.0 || !std::isfinite(ridge)) {
        throw ContractError("assemble_generator: ridge must be finite and >= 0");
    }

    KoopmanGenerator gen;
    gen.state_dim = n;
    gen.mode = mode;
    gen.K = Eigen::MatrixXd::Zero(m, m);
    gen.K.block(1, 1 + n, n, NL) = W.W;
    if (mode == AssemblyMode::state_only) {
        return gen;
    }

    const int S = grid.size();
    Eigen::MatrixXd Psi(S, m);
    Eigen::MatrixXd D(S, NL); // exact dLambda/dt per sample and center
    for (int s = 0; s < S; ++s) {
        const Eigen::VectorXd x = grid.points.row(s).transpose();
        const Eigen::VectorXd fx = f(x);
        Psi.row(s) = lift(x, dict).transpose();
        for (int l = 0; l < NL; ++l) {
            D(s, l) = exact_lambda_derivative(x, fx, dict.center(l), dict.alpha());
        }
    }

    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    if (ridge > 0.0) {
        A.resize(S + m, m);
        A.topRows(S) = Psi;
        A.bottomRows(m) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(m, m);
        B.resize(S + m, NL);
        B.topRows(S) = D;
        B.bottomRows(m).setZero();
    } else {
        A = Psi;
        B = D;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::MatrixXd rows = cod.solve(B); // m x NL, column l = coefficients of row l
    gen.rank_deficient = cod.rank() < m;
    gen.K.block(1 + n, 0, NL, m) = rows.transpose();
    return gen;
}

double join_collapsed_rhs(const Eigen::VectorXd& x, int l, const SILLDictionary& dict,
                        const WeightMatrix& W) {
    const int n = dict.state_dim();
    const int NL = dict.num_centers();
    if (l < 0 || l >= NL) {
        throw ContractError("join_collapsed_rhs: center index out of range");
    }
    if (x.size() != n) {
        throw ContractError("join_collapsed_rhs: dimension mismatch");
    }
    const double a = dict.alpha().value();
    const Eigen::VectorXd lam = dict.lambda_values(x);
    double out = 0.0;
    for (int i = 0; i < n; ++i) {
        const double coeff = a * (1.0 - logistic_eval(x[i], dict.centers()(l, i), dict.alpha()));
        double acc = 0.0;
        for (int k = 0; k < NL; ++k) {
            acc += W.W(i, k) * lam[dict.join(l, k)];
        }
        out += coeff * acc;
    }
    return out;
}

ClosureResidualReport closure_residual(const SILLDictionary& dict, const WeightMatrix& W,
                                       const VectorField& f, const KoopmanGenerator& gen,
                                       const SampleGrid& grid) {
    const int n = dict.state_dim();
    const int NL = dict.num_centers();
    const int m = dict.lift_dim();
    if (gen.K.rows() != m || gen.K.cols() != m || gen.state_dim != n) {
        throw ContractError("closure_residual: generator shape mismatch");
    }
    if (W.W.rows() != n || W.W.cols() != NL) {
        throw ContractError("closure_residual: weight matrix shape mismatch");
    }

    const int S = grid.size();
    ClosureResidualReport rep;
    rep.lambda_row_rms = Eigen::VectorXd::Zero(NL);
    rep.lambda_row_sup = Eigen::VectorXd::Zero(NL);
    rep.epsilon_samples.resize(S);

    double sum_sq = 0.0;
    for (int s = 0; s < S; ++s) {
        const Eigen::VectorXd x = grid.points.row(s).transpose();
        const Eigen::VectorXd fx = f(x);
        const Eigen::VectorXd psi = lift(x, dict);
        Eigen::VectorXd dpsi(m);
        dpsi[0] = 0.0;
        dpsi.segment(1, n) = fx;
        for (int l = 0; l < NL; ++l) {
            dpsi[1 + n + l] = exact_lambda_derivative(x, fx, dict.center(l), dict.alpha());
        }
        const Eigen::VectorXd r = dpsi - gen.K * psi;
        const double eps = r.norm();
        rep.epsilon_samples[s] = eps;
        sum_sq += eps * eps;
        for (int l = 0; l < NL; ++l) {
            const double rl = r[1 + n + l];
            rep.lambda_row_rms[l] += rl * rl;
            rep.lambda_row_sup[l] = std::max(rep.lambda_row_sup[l], std::abs(rl));
        }
    }
    rep.lambda_row_rms = (rep.lambda_row_rms / S).cwiseSqrt();
    rep.epsilon_rms = std::sqrt(sum_sq / S);
    rep.epsilon_sup = rep.epsilon_samples.maxCoeff();
    return rep;
}

namespace {

double edmd_objective(const Eigen::MatrixXd& K, const Eigen::MatrixXd& prev,
                      const Eigen::MatrixXd& next, double zeta) {
    double obj = (next - K * prev).squaredNorm();
    for (int j = 0; j < K.cols(); ++j) obj += zeta * K.col(j).norm();
    return obj;
}

// Column-wise soft threshold: the proximal map of t * zeta * ||.||_{2,1}.
void prox_columns(Eigen::MatrixXd& K, double thresh) {
    for (int j = 0; j < K.cols(); ++j) {
        const double nrm = K.col(j).norm();
        if (nrm <= thresh) {
            K.col(j).setZero();
        } else {
            K.col(j) *= (1.0 - thresh / nrm);
        }
    }
}

} // namespace

EdmdResult edmd_discrete(const Eigen::MatrixXd& snapshots_prev,
                         const Eigen::MatrixXd& snapshots_next, double zeta) {
    if (snapshots_prev.rows() != snapshots_next.rows() ||
        snapshots_prev.cols() != snapshots_next.cols()) {
        throw ContractError("edmd_discrete: snapshot shape mismatch");
    }
    if (snapshots_prev.cols() < 1) {
        throw ContractError("edmd_discrete: need at least one snapshot pair");
    }
    if (zeta < 0.0 || !std::isfinite(zeta)) {
        throw ContractError("edmd_discrete: zeta must be finite and >= 0");
    }

    EdmdResult result;
    if (zeta == 0.0) {
        // Minimum-Frobenius-norm least squares: K = next * pinv(prev).
        Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots_prev,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cutoff = sv.size() > 0
                                  ? sv[0] * std::max(snapshots_prev.rows(), snapshots_prev.cols()) *
                                        std::numeric_limits<double>::epsilon()
                                  : 0.0;
        Eigen::VectorXd inv = sv;
        for (int i = 0; i < inv.size(); ++i) inv[i] = sv[i] > cutoff ? 1.0 / sv[i] : 0.0;
        result.K = snapshots_next * svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
        result.objective = edmd_objective(result.K, snapshots_prev, snapshots_next, zeta);
        return result;
    }

    const int m = static_cast<int>(snapshots_prev.rows());
    const Eigen::MatrixXd G = snapshots_prev * snapshots_prev.transpose(); // m x m

    // Lipschitz constant of the smooth part's gradient: 2 lambda_max(G),
    // estimated by power iteration with a safety margin.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m).normalized();
    double lam_max = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd w = G * v;
        lam_max = w.norm();
        if (lam_max == 0.0) break;
        v = w / lam_max;
    }
    const double L = std::max(2.0 * lam_max * 1.05, 1e-30);
    const double step = 1.0 / L;

    // Monotone FISTA: accept the accelerated candidate only when it does not
    // increase the objective, otherwise fall back to the previous iterate and
    // restart momentum.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd Y = K;
    double t = 1.0;
    double obj = edmd_objective(K, snapshots_prev, snapshots_next, zeta);

    const int max_iter = 10'000;
    const double rel_tol = 1e-10;
    result.converged = false;
    result.objective_trace.push_back(obj);
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::MatrixXd grad = 2.0 * (Y * snapshots_prev - snapshots_next) *
                               snapshots_prev.transpose();
        Eigen::MatrixXd cand = Y - step * grad;
        prox_columns(cand, step * zeta);
        const double cand_obj = edmd_objective(cand, snapshots_prev, snapshots_next, zeta);

        Eigen::MatrixXd K_prev = K;
        double obj_prev = obj;
        if (cand_obj <= obj) {
            K = std::move(cand);
            obj = cand_obj;
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            Y = K + ((t - 1.0) / t_next) * (K - K_prev);
            t = t_next;
        } else {
            // Momentum overshoot: restart from the current iterate.
            Y = K;
            t = 1.0;
        }
        result.objective_trace.push_back(obj);
        if (obj_prev - obj <= rel_tol * std::max(obj_prev, 1e-30) && cand_obj <= obj_prev) {
            result.converged = true;
            ++it;
            break;
        }
    }
    result.K = std::move(K);
    result.iterations = it;
    result.objective = obj;
    return result;
}

} // namespace sill
