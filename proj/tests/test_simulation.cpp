#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "sill/simulation.hpp"

using namespace sill;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

VectorField linear_decay_1d() {
    VectorField f;
    f.name = "decay";
    f.state_dim = 1;
    f.eval = [](const Eigen::VectorXd& x) { return (-x).eval(); };
    return f;
}

// Root of g on [lo, hi] by bisection; requires a sign change.
template <typename G>
double bisect(const G& g, double lo, double hi) {
    double flo = g(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if (flo * fm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_SUITE("simulation") {

TEST_CASE("zero field holds the state constant") {
    VectorField f;
    f.name = "zero";
    f.state_dim = 2;
    f.eval = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
    const TrajectoryRecord rec = integrate_nonlinear(f, vec2(0.3, -1.2), 0.1, 5.0);
    REQUIRE(rec.length() == 51);
    CHECK_FALSE(rec.diverged);
    for (int t = 0; t < rec.length(); ++t) {
        CHECK(rec.states(t, 0) == 0.3);
        CHECK(rec.states(t, 1) == -1.2);
    }
}

TEST_CASE("RK4 nails the linear decay endpoint") {
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    const TrajectoryRecord rec = integrate_nonlinear(linear_decay_1d(), x0, 1e-3, 1.0);
    CHECK(std::abs(rec.states(rec.length() - 1, 0) - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("RK4 endpoint error shrinks about sixteenfold when dt halves") {
    const VectorField f = benchmark_vdp(-0.2);
    const Eigen::VectorXd x0 = vec2(1.0, 1.0);
    const double T = 2.0;
    auto endpoint = [&](double dt) {
        const TrajectoryRecord rec = integrate_nonlinear(f, x0, dt, T);
        return rec.states.row(rec.length() - 1).transpose().eval();
    };
    const Eigen::VectorXd ref = endpoint(0.1 / 16.0);
    const double e1 = (endpoint(0.1) - ref).norm();
    const double e2 = (endpoint(0.05) - ref).norm();
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
}

TEST_CASE("demo step size is resolved: halving dt barely moves the endpoints") {
    auto endpoint_shift = [](const VectorField& f, const Eigen::VectorXd& x0) {
        const TrajectoryRecord a = integrate_nonlinear(f, x0, 0.01, 10.0);
        const TrajectoryRecord b = integrate_nonlinear(f, x0, 0.005, 10.0);
        const Eigen::VectorXd ea = a.states.row(a.length() - 1).transpose();
        const Eigen::VectorXd eb = b.states.row(b.length() - 1).transpose();
        return (ea - eb).norm() / eb.norm();
    };
    CHECK(endpoint_shift(benchmark_vdp(-0.2), vec2(0.4, 0.4)) < 1e-6);
    CHECK(endpoint_shift(benchmark_toggle(2, 2, 3, 3, 1), vec2(0.8, 1.9)) < 1e-6);
}

TEST_CASE("integrator contracts are enforced") {
    const VectorField f = linear_decay_1d();
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    CHECK_THROWS_AS(integrate_nonlinear(f, x0, 0.0, 1.0), ContractError);
    CHECK_THROWS_AS(integrate_nonlinear(f, x0, 0.5, 0.2), ContractError);
    CHECK_THROWS_AS(integrate_nonlinear(f, vec2(1, 1), 0.1, 1.0), ContractError);
}

TEST_CASE("finite-time blowup truncates the record and sets the flag") {
    VectorField f;
    f.name = "blowup";
    f.state_dim = 1;
    f.eval = [](const Eigen::VectorXd& x) { return (x.array().square()).matrix().eval(); };
    Eigen::VectorXd x0(1);
    x0 << 1.0; // xdot = x^2 escapes at t = 1
    const TrajectoryRecord rec = integrate_nonlinear(f, x0, 0.01, 5.0);
    CHECK(rec.diverged);
    CHECK(rec.length() < 501);
    CHECK(rec.states.allFinite());
}

TEST_CASE("Van der Pol: hand-evaluated field values and bounded oscillation") {
    const VectorField f = benchmark_vdp(-0.2);
    CHECK(f(vec2(0, 0)) == vec2(0, 0));
    CHECK(f(vec2(1, 1)) == vec2(1, -1));
    CHECK((f(vec2(0, 1)) - vec2(1, -0.2)).cwiseAbs().maxCoeff() < 1e-15);

    const TrajectoryRecord rec = integrate_nonlinear(f, vec2(1, 1), 0.01, 20.0);
    CHECK_FALSE(rec.diverged);
    CHECK(rec.states.cwiseAbs().maxCoeff() < 3.0);
    int sign_changes = 0;
    for (int t = 1; t < rec.length(); ++t) {
        if (rec.states(t, 0) * rec.states(t - 1, 0) < 0.0) ++sign_changes;
    }
    CHECK(sign_changes >= 4);
}

TEST_CASE("lifted integration: constant under K = 0, scalar decay on a diagonal") {
    KoopmanGenerator gen;
    gen.state_dim = 2;
    gen.K = Eigen::MatrixXd::Zero(5, 5);
    Eigen::VectorXd z0(5);
    z0 << 1.0, 0.5, -0.25, 0.8, 0.1;
    const TrajectoryRecord constant = integrate_lifted(gen, z0, 0.01, 1.0);
    CHECK((constant.lifted.row(constant.length() - 1).transpose() - z0)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    gen.K(1, 1) = -1.0;
    const TrajectoryRecord decay = integrate_lifted(gen, z0, 1e-3, 1.0);
    CHECK(std::abs(decay.lifted(decay.length() - 1, 1) - 0.5 * std::exp(-1.0)) < 1e-8);
    CHECK(decay.lifted(decay.length() - 1, 0) == 1.0);

    Eigen::VectorXd bad(4);
    bad.setZero();
    CHECK_THROWS_AS(integrate_lifted(gen, bad, 0.01, 1.0), ContractError);
}

TEST_CASE("lifted RK4 matches the matrix-exponential oracle for stable K") {
    std::mt19937_64 eng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    const int m = 8;
    Eigen::MatrixXd A(m, m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) A(r, c) = g(eng);
    }
    // symmetric negative definite part keeps every eigenvalue in the left half plane
    KoopmanGenerator gen;
    gen.state_dim = m - 2;
    gen.K = -(A * A.transpose()) / m - 0.1 * Eigen::MatrixXd::Identity(m, m);

    Eigen::VectorXd z0(m);
    for (int i = 0; i < m; ++i) z0[i] = g(eng);

    const double T = 5.0;
    const TrajectoryRecord rec = integrate_lifted(gen, z0, 0.01, T);
    const Eigen::VectorXd rk4_end = rec.lifted.row(rec.length() - 1).transpose();
    const Eigen::VectorXd expm_end = (gen.K * T).exp() * z0; // scaling-and-squaring oracle
    CHECK((rk4_end - expm_end).norm() / expm_end.norm() < 1e-6);
}

TEST_CASE("extract_state: slices columns 1..n; constant trajectory round-trips") {
    KoopmanGenerator gen;
    gen.state_dim = 2;
    gen.K = Eigen::MatrixXd::Zero(6, 6);
    Eigen::VectorXd z0(6);
    z0 << 1.0, 0.7, -0.3, 0.5, 0.6, 0.9;
    const TrajectoryRecord lifted = integrate_lifted(gen, z0, 0.1, 1.0);
    const TrajectoryRecord state = extract_state(lifted, 2);
    REQUIRE(state.states.cols() == 2);
    for (int t = 0; t < state.length(); ++t) {
        CHECK(state.states(t, 0) == 0.7);
        CHECK(state.states(t, 1) == -0.3);
    }
    CHECK_THROWS_AS(extract_state(state, 2), ContractError);
}

TEST_CASE("toggle: value at the origin, preconditions, clamp accounting") {
    const VectorField f = benchmark_toggle(2, 2, 3, 3, 1);
    CHECK(f(vec2(0, 0)) == vec2(2, 2));
    CHECK_THROWS_AS(benchmark_toggle(2, 2, 0.5, 3, 1), ContractError);
    CHECK_THROWS_AS(benchmark_toggle(2, 2, 3, 3, 0.0), ContractError);

    REQUIRE(f.clamp_events);
    CHECK(f.clamp_events->load() == 0);
    const Eigen::VectorXd at_neg = f(vec2(-0.01, 0.5));
    CHECK(f.clamp_events->load() == 1);
    // Hill term clamped at zero argument; linear decay keeps the raw state
    CHECK(at_neg[1] == doctest::Approx(2.0 / (1.0 + 0.0) - 0.5).epsilon(1e-15));
    CHECK(at_neg[0] == doctest::Approx(2.0 / (1.0 + std::pow(0.5, 3)) + 0.01).epsilon(1e-15));
}

TEST_CASE("toggle equilibria from a bisection oracle satisfy f = 0") {
    const double a1 = 2, a2 = 2, n1 = 3, n2 = 3, delta = 1;
    const VectorField f = benchmark_toggle(a1, a2, n1, n2, delta);
    auto reduced = [&](double x1) {
        const double x2 = a2 / (delta * (1.0 + std::pow(x1, n2)));
        return a1 / (1.0 + std::pow(x2, n1)) - delta * x1;
    };
    // three sign changes over [0, 2.2]: low, saddle, high
    const double r1 = bisect(reduced, 0.05, 0.6);
    const double r2 = bisect(reduced, 0.6, 1.5);
    const double r3 = bisect(reduced, 1.5, 2.2);
    CHECK(r1 == doctest::Approx(0.2294368597824254).epsilon(1e-10));
    CHECK(r2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r3 == doctest::Approx(1.9761325706181649).epsilon(1e-10));
    for (double r : {r1, r2, r3}) {
        const double x2 = a2 / (delta * (1.0 + std::pow(r, n2)));
        CHECK(f(vec2(r, x2)).norm() < 1e-8);
    }
}

TEST_CASE("toggle is bistable: random starts settle onto two distinct equilibria") {
    const VectorField f = benchmark_toggle(2, 2, 3, 3, 1);
    const Eigen::VectorXd eq_high = vec2(1.9761325706181649, 0.2294368597824254);
    const Eigen::VectorXd eq_low = vec2(0.2294368597824254, 1.9761325706181649);
    std::mt19937_64 eng(13);
    std::uniform_real_distribution<double> u(0.0, 2.2);
    int basin_high = 0, basin_low = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd x0 = vec2(u(eng), u(eng));
        const TrajectoryRecord rec = integrate_nonlinear(f, x0, 0.01, 60.0);
        REQUIRE_FALSE(rec.diverged);
        const Eigen::VectorXd end = rec.states.row(rec.length() - 1).transpose();
        if ((end - eq_high).norm() < 1e-3) {
            ++basin_high;
        } else if ((end - eq_low).norm() < 1e-3) {
            ++basin_low;
        }
    }
    CHECK(basin_high + basin_low == 100);
    CHECK(basin_high > 10);
    CHECK(basin_low > 10);
}

TEST_CASE("toggle trajectories stay nonnegative from nonnegative starts") {
    const VectorField f = benchmark_toggle(2, 2, 3, 3, 1);
    std::mt19937_64 eng(29);
    std::uniform_real_distribution<double> u(0.0, 2.2);
    for (int trial = 0; trial < 20; ++trial) {
        const TrajectoryRecord rec =
            integrate_nonlinear(f, vec2(u(eng), u(eng)), 0.01, 10.0);
        CHECK(rec.states.minCoeff() >= 0.0);
    }
}

TEST_CASE("assembled toggle generator: constant observable holds, equilibrium stays put") {
    const VectorField f = benchmark_toggle(2, 2, 3, 3, 1);
    const SILLDictionary d = build_lattice(vec2(0, 0), vec2(2.2, 2.2), vec2(0.44, 0.44),
                                           Steepness(1.4));
    const SampleGrid grid = make_sample_grid(d, 12, GridMode::lattice, 0);
    auto [W, report] = fit_weights(f, d, grid, 0.0);
    const KoopmanGenerator gen = assemble_generator(d, W, f, grid, 0.0);

    const Eigen::VectorXd eq = vec2(1.9761325706181649, 0.2294368597824254);
    const TrajectoryRecord ref = integrate_nonlinear(f, eq, 0.01, 10.0);
    const TrajectoryRecord lifted = integrate_lifted(gen, lift(eq, d), 0.01, 10.0);
    const TrajectoryRecord pred = extract_state(lifted, 2);

    // constant-observable drift over the demo horizon
    CHECK((lifted.lifted.col(0).array() - 1.0).abs().maxCoeff() < 1e-3);

    // the reference barely moves; the prediction drifts open-loop at a rate
    // set by the local regression residual delta(eq)
    const TrajectoryComparison cmp = compare_trajectories(ref, pred);
    for (int t = 0; t < ref.length(); ++t) {
        CHECK((ref.states.row(t).transpose() - eq).norm() < 1e-6);
    }
    const double delta_eq = residual_at(f, W, d, eq).norm();
    CHECK(cmp.err_l2[100] <= 3.0 * delta_eq); // t = 1: rate ~ ||delta(eq)||
    CHECK(cmp.err_l2[200] < 0.1);             // t = 2: still near-constant
    CHECK(cmp.sup < 1.0);                     // bounded over the full horizon
}

TEST_CASE("trajectory comparison: zeros, uniform shift, grid mismatch") {
    const VectorField f = benchmark_vdp(-0.2);
    const TrajectoryRecord rec = integrate_nonlinear(f, vec2(0.5, 0.5), 0.01, 2.0);
    const TrajectoryComparison same = compare_trajectories(rec, rec);
    CHECK(same.rmse == 0.0);
    CHECK(same.sup == 0.0);
    CHECK(same.err_l2.maxCoeff() == 0.0);

    TrajectoryRecord shifted = rec;
    shifted.states.array() += 0.2;
    const TrajectoryComparison shift = compare_trajectories(rec, shifted);
    CHECK(shift.sup == doctest::Approx(0.2 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(shift.rmse == doctest::Approx(0.2 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(shift.err_l2.minCoeff() >= 0.0);

    TrajectoryRecord other = integrate_nonlinear(f, vec2(0.5, 0.5), 0.01, 1.0);
    CHECK_THROWS_AS(compare_trajectories(rec, other), ContractError);
}

} // TEST_SUITE
