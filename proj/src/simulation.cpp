#include "sill/simulation.hpp"

#include <cmath>

namespace sill {

namespace {

// Shared RK4 loop; `deriv` is the right-hand side in the integrated space.
template <typename Deriv>
void rk4_run(const Deriv& deriv, const Eigen::VectorXd& y0, double dt, double horizon,
             Eigen::VectorXd& times, Eigen::MatrixXd& samples, bool& diverged) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ContractError("integrate: dt must be finite and positive");
    }
    if (!(horizon >= dt) || !std::isfinite(horizon)) {
        throw ContractError("integrate: horizon must be finite and >= dt");
    }
    if (!y0.allFinite()) {
        throw DomainError("integrate: non-finite initial state");
    }

    const long steps = std::lround(horizon / dt);
    const int dim = static_cast<int>(y0.size());
    times.resize(steps + 1);
    samples.resize(steps + 1, dim);
    times[0] = 0.0;
    samples.row(0) = y0.transpose();

    Eigen::VectorXd y = y0;
    diverged = false;
    long filled = 0;
    for (long s = 0; s < steps; ++s) {
        const Eigen::VectorXd k1 = deriv(y);
        const Eigen::VectorXd k2 = deriv(y + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = deriv(y + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = deriv(y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite()) {
            diverged = true;
            break;
        }
        times[s + 1] = (s + 1) * dt;
        samples.row(s + 1) = y.transpose();
        filled = s + 1;
    }
    if (diverged) {
        times.conservativeResize(filled + 1);
        samples.conservativeResize(filled + 1, dim);
    }
}

} // namespace

TrajectoryRecord integrate_nonlinear(const VectorField& f, const Eigen::VectorXd& x0,
                                     double dt, double horizon) {
    if (static_cast<int>(x0.size()) != f.state_dim) {
        throw ContractError("integrate_nonlinear: initial state dimension mismatch");
    }
    TrajectoryRecord rec;
    rk4_run([&](const Eigen::VectorXd& x) { return f(x); }, x0, dt, horizon, rec.times,
            rec.states, rec.diverged);
    return rec;
}

TrajectoryRecord integrate_lifted(const KoopmanGenerator& gen, const Eigen::VectorXd& z0,
                                  double dt, double horizon) {
    if (z0.size() != gen.K.rows()) {
        throw ContractError("integrate_lifted: z0 length must equal the lift dimension");
    }
    TrajectoryRecord rec;
    rk4_run([&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return gen.K * z; }, z0, dt,
            horizon, rec.times, rec.lifted, rec.diverged);
    return rec;
}

TrajectoryRecord extract_state(const TrajectoryRecord& lifted_record, int state_dim) {
    if (lifted_record.lifted.cols() < 1 + state_dim) {
        throw ContractError("extract_state: lifted record has fewer than 1+n columns");
    }
    TrajectoryRecord rec;
    rec.times = lifted_record.times;
    rec.states = lifted_record.lifted.middleCols(1, state_dim);
    rec.diverged = lifted_record.diverged;
    return rec;
}

VectorField benchmark_vdp(double a1) {
    VectorField f;
    f.name = "vdp";
    f.state_dim = 2;
    f.params = {{"a1", a1}};
    f.eval = [a1](const Eigen::VectorXd& x) {
        Eigen::VectorXd dx(2);
        dx[0] = x[1];
        dx[1] = -x[0] + a1 * (1.0 - x[0] * x[0]) * x[1];
        return dx;
    };
    return f;
}

VectorField benchmark_toggle(double a1, double a2, double n1, double n2, double delta) {
    if (!(n1 >= 1.0) || !(n2 >= 1.0)) {
        throw ContractError("benchmark_toggle: Hill exponents must be >= 1");
    }
    if (!(delta > 0.0)) {
        throw ContractError("benchmark_toggle: delta must be > 0");
    }
    VectorField f;
    f.name = "toggle";
    f.state_dim = 2;
    f.params = {{"a1", a1}, {"a2", a2}, {"n1", n1}, {"n2", n2}, {"delta", delta}};
    f.clamp_events = std::make_shared<std::atomic<std::uint64_t>>(0);
    auto counter = f.clamp_events;
    f.eval = [a1, a2, n1, n2, delta, counter](const Eigen::VectorXd& x) {
        double x1 = x[0];
        double x2 = x[1];
        if (x1 < 0.0 || x2 < 0.0) {
            counter->fetch_add(1, std::memory_order_relaxed);
            x1 = std::max(x1, 0.0);
            x2 = std::max(x2, 0.0);
        }
        Eigen::VectorXd dx(2);
        dx[0] = a1 / (1.0 + std::pow(x2, n1)) - delta * x[0];
        dx[1] = a2 / (1.0 + std::pow(x1, n2)) - delta * x[1];
        return dx;
    };
    return f;
}

TrajectoryComparison compare_trajectories(const TrajectoryRecord& reference,
                                          const TrajectoryRecord& predicted) {
    if (reference.times.size() != predicted.times.size() ||
        reference.times != predicted.times) {
        throw ContractError("compare_trajectories: time grids differ");
    }
    if (reference.states.cols() != predicted.states.cols()) {
        throw ContractError("compare_trajectories: state dimensions differ");
    }
    const int T = reference.length();
    const int n = static_cast<int>(reference.states.cols());

    TrajectoryComparison cmp;
    cmp.err_l2.resize(T);
    Eigen::MatrixXd diff = predicted.states - reference.states;
    for (int t = 0; t < T; ++t) cmp.err_l2[t] = diff.row(t).norm();
    cmp.rmse_per_component.resize(n);
    cmp.sup_per_component.resize(n);
    for (int i = 0; i < n; ++i) {
        cmp.rmse_per_component[i] = std::sqrt(diff.col(i).squaredNorm() / T);
        cmp.sup_per_component[i] = diff.col(i).cwiseAbs().maxCoeff();
    }
    cmp.rmse = std::sqrt(cmp.err_l2.squaredNorm() / T);
    cmp.sup = cmp.err_l2.maxCoeff();
    return cmp;
}

} // namespace sill
