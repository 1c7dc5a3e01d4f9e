#pragma once

#include <Eigen/Dense>

#include "sill/generator.hpp"
#include "sill/vector_field.hpp"

namespace sill {

/// Time-stamped samples from one integration. `states` is T x n; lifted
/// trajectories carry the full T x m history in `lifted` instead. When the
/// integrator hits a non-finite state it truncates the record and sets
/// `diverged`.
struct TrajectoryRecord {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;
    Eigen::MatrixXd lifted;
    bool diverged = false;

    int length() const noexcept { return static_cast<int>(times.size()); }
};

/// Classical fixed-step RK4 on xdot = f(x), sampling at {0, dt, 2dt, ...} up
/// to the horizon.
TrajectoryRecord integrate_nonlinear(const VectorField& f, const Eigen::VectorXd& x0,
                                     double dt, double horizon);

/// Same RK4 scheme on the linear lifted system zdot = K z; z0 must be a
/// lifted state (length m).
TrajectoryRecord integrate_lifted(const KoopmanGenerator& gen, const Eigen::VectorXd& z0,
                                  double dt, double horizon);

/// Predicted state trajectory: columns 1..n of a lifted record.
TrajectoryRecord extract_state(const TrajectoryRecord& lifted_record, int state_dim);

/// Van der Pol oscillator: x1dot = x2, x2dot = -x1 + a1 (1 - x1^2) x2.
VectorField benchmark_vdp(double a1 = -0.2);

/// Two-state mutual-repression toggle switch:
///   x1dot = a1 / (1 + x2^n1) - delta x1,
///   x2dot = a2 / (1 + x1^n2) - delta x2.
/// Negative Hill arguments (slight integrator undershoot) are clamped to zero
/// and counted on the field's clamp_events.
VectorField benchmark_toggle(double a1, double a2, double n1, double n2, double delta);

struct TrajectoryComparison {
    Eigen::VectorXd err_l2;             // per time step, ||xhat - x||_2
    Eigen::VectorXd rmse_per_component; // per state component
    Eigen::VectorXd sup_per_component;
    double rmse = 0.0; // sqrt(mean ||err||^2)
    double sup = 0.0;  // max ||err||
};

/// Pointwise comparison over identical time grids.
TrajectoryComparison compare_trajectories(const TrajectoryRecord& reference,
                                          const TrajectoryRecord& predicted);

} // namespace sill
