// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run against the library API plus the demo configurations
// the CLI ships.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sill/commands.hpp"
#include "sill/error_analysis.hpp"
#include "sill/generator.hpp"
#include "sill/model_io.hpp"
#include "sill/regression.hpp"
#include "sill/simulation.hpp"
#include "sill/text_io.hpp"

using namespace sill;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title)
        : number_(number), title_(std::move(title)),
          start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) {
            failed_ = true;
            details_ += (details_.empty() ? "" : "; ") + detail;
        }
    }

    void note(const std::string& text) { notes_ += (notes_.empty() ? "" : "; ") + text; }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

    ~Criterion() {
        const double secs = elapsed();
        if (failed_) {
            ++g_failures;
            std::printf("[FAIL] criterion %d: %s (%.2f s) -- %s\n", number_,
                        title_.c_str(), secs, details_.c_str());
        } else {
            std::printf("[PASS] criterion %d: %s (%.2f s)%s%s\n", number_, title_.c_str(),
                        secs, notes_.empty() ? "" : " -- ", notes_.c_str());
        }
        std::fflush(stdout);
    }

private:
    int number_;
    std::string title_;
    std::chrono::steady_clock::time_point start_;
    bool failed_ = false;
    std::string details_;
    std::string notes_;
};

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

std::string fmt(double v) { return format_double(v); }

// Demo configurations, mirrored from the CLI's canned configs.
struct DemoSetup {
    VectorField field;
    SILLDictionary dict;
    SampleGrid grid;
    double ridge;
};

DemoSetup toggle_demo() {
    VectorField f = benchmark_toggle(2, 2, 3, 3, 1);
    SILLDictionary d =
        build_lattice(vec2(0, 0), vec2(2.2, 2.2), vec2(0.44, 0.44), Steepness(1.4));
    SampleGrid g = make_sample_grid(d, 12, GridMode::lattice, 1234);
    return {std::move(f), std::move(d), std::move(g), 0.0};
}

DemoSetup vdp_demo() {
    VectorField f = benchmark_vdp(-0.2);
    SILLDictionary d = build_lattice(vec2(-0.8, -0.8), vec2(0.8, 0.8), vec2(0.32, 0.32),
                                     Steepness(2.0));
    SampleGrid g = make_sample_grid(d, 12, GridMode::lattice, 1234);
    return {std::move(f), std::move(d), std::move(g), 1e-10};
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = g(eng);
    }
    return m;
}

void criterion_1_toggle_regression() {
    Criterion c(1, "toggle-switch regression fidelity, order-36 basis");
    DemoSetup demo = toggle_demo();
    c.expect(demo.dict.num_centers() == 36, "basis size is not 36");
    auto [W, report] = fit_weights(demo.field, demo.dict, demo.grid, demo.ridge);
    const double worst = report.rel_l2_error.maxCoeff();
    c.note("rel_l2_error = " + fmt(worst));
    c.expect(worst < 0.02, "rel L2 error " + fmt(worst) + " not below 0.02");
    if (worst >= 0.01) c.note("above the 1% headline, inside the 2% allowance");
    c.expect(c.elapsed() < 5.0, "runtime exceeded 5 s");
}

void criterion_2_alpha_convergence() {
    Criterion c(2, "pair-error convergence in the steepness parameter");
    const SILLDictionary d =
        build_lattice(vec2(0, 0), vec2(2, 2), vec2(1, 1), Steepness(2.0));
    const Eigen::MatrixXd pts = sample_off_center_points(d, 100, 0.3, 2024);
    const Eigen::MatrixXi joins = d.join_table();
    const std::vector<double> alphas{1, 2, 5, 10, 20, 50};
    std::vector<double> max_e;
    for (double a : alphas) {
        double worst = 0.0;
        for (int l = 0; l < d.num_centers(); ++l) {
            for (int k = l; k < d.num_centers(); ++k) {
                for (int s = 0; s < pts.rows(); ++s) {
                    worst = std::max(worst, std::abs(join_collapse_error(
                                                pts.row(s).transpose(), d, l, k, a)));
                }
            }
        }
        max_e.push_back(worst);
    }
    c.note("maxE(1) = " + fmt(max_e.front()) + ", maxE(50) = " + fmt(max_e.back()));
    c.expect(max_e.back() < 1e-3 * max_e.front(),
             "maxE(50)/maxE(1) = " + fmt(max_e.back() / max_e.front()) + " not below 1e-3");
    for (std::size_t i = 2; i + 1 < alphas.size(); ++i) { // tail: alpha >= 5
        c.expect(max_e[i + 1] <= max_e[i],
                 "tail not monotone at alpha = " + fmt(alphas[i + 1]));
    }
    c.expect(c.elapsed() < 10.0, "runtime exceeded 10 s");
}

void criterion_3_sup_error_oracle() {
    Criterion c(3, "1-D sup-error estimate equals alpha/4");
    for (double a : {1.0, 4.0, 10.0}) {
        Eigen::VectorXd lo(1), hi(1), eps(1);
        lo << 0.0;
        hi << 0.5;
        eps << 1.0;
        const SILLDictionary d = build_lattice(lo, hi, eps, Steepness(a));
        const PairErrorSpec spec = make_pair_error_spec(d, 0, 0);
        const double m = estimate_sup_error(d, spec, a, 32);
        c.expect(std::abs(m - a / 4.0) < 1e-6,
                 "alpha = " + fmt(a) + ": |" + fmt(m) + " - " + fmt(a / 4.0) + "| >= 1e-6");
    }
}

void criterion_4_derivative_exactness() {
    Criterion c(4, "chain-rule derivative matches trajectory finite differences");
    const double h = 1e-5;
    struct Case {
        VectorField field;
        Eigen::VectorXd lo, hi;
        double alpha;
    };
    std::vector<Case> cases;
    cases.push_back({benchmark_vdp(-0.2), vec2(-0.8, -0.8), vec2(0.8, 0.8), 2.0});
    cases.push_back({benchmark_toggle(2, 2, 3, 3, 1), vec2(0, 0), vec2(2.2, 2.2), 1.4});

    for (const Case& kase : cases) {
        std::mt19937_64 eng(kase.field.name == "vdp" ? 101 : 202);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto draw = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
            return vec2(lo[0] + (hi[0] - lo[0]) * u(eng), lo[1] + (hi[1] - lo[1]) * u(eng));
        };
        double worst_rel = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::VectorXd x = draw(kase.lo, kase.hi);
            const Eigen::VectorXd v = draw(kase.lo, kase.hi);
            const Steepness alpha(kase.alpha);

            // one RK4 step of +-h along the flow
            auto rk4_step = [&](const Eigen::VectorXd& x0, double dt) {
                const Eigen::VectorXd k1 = kase.field(x0);
                const Eigen::VectorXd k2 = kase.field(x0 + 0.5 * dt * k1);
                const Eigen::VectorXd k3 = kase.field(x0 + 0.5 * dt * k2);
                const Eigen::VectorXd k4 = kase.field(x0 + dt * k3);
                return (x0 + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)).eval();
            };
            const double fwd = conjunctive_eval(rk4_step(x, h), v, alpha);
            const double bwd = conjunctive_eval(rk4_step(x, -h), v, alpha);
            const double fd = (fwd - bwd) / (2.0 * h);
            const double exact = exact_lambda_derivative(x, kase.field(x), v, alpha);
            const double rel = std::abs(fd - exact) / std::max(std::abs(exact), 1e-8);
            worst_rel = std::max(worst_rel, rel);
        }
        c.note(kase.field.name + " worst rel = " + fmt(worst_rel));
        c.expect(worst_rel < 1e-5,
                 kase.field.name + ": worst rel " + fmt(worst_rel) + " >= 1e-5");
    }
}

void criterion_5_edmd_baseline() {
    Criterion c(5, "discrete EDMD matches the pseudoinverse oracle");
    const int m = 20, T = 200;
    const Eigen::MatrixXd prev = random_matrix(m, T, 31);
    const Eigen::MatrixXd next = random_matrix(m, T, 32);
    const EdmdResult fit = edmd_discrete(prev, next, 0.0);
    const Eigen::MatrixXd oracle =
        next * prev.transpose() * (prev * prev.transpose()).inverse();
    const double dev = (fit.K - oracle).cwiseAbs().maxCoeff();
    c.note("pinv deviation = " + fmt(dev));
    c.expect(dev < 1e-10, "pseudoinverse deviation " + fmt(dev) + " >= 1e-10");

    const Eigen::MatrixXd target = random_matrix(m, m, 33);
    const EdmdResult rec = edmd_discrete(prev, target * prev, 0.0);
    const double rec_dev = (rec.K - target).cwiseAbs().maxCoeff();
    c.expect(rec_dev < 1e-8, "linear-map recovery deviation " + fmt(rec_dev) + " >= 1e-8");
}

void criterion_6_vdp_reproduction() {
    Criterion c(6, "Van der Pol lifted prediction from a positive-quadrant start");
    DemoSetup demo = vdp_demo();
    auto [W, report] = fit_weights(demo.field, demo.dict, demo.grid, demo.ridge);
    const KoopmanGenerator gen =
        assemble_generator(demo.dict, W, demo.field, demo.grid, demo.ridge);

    const double dt = 0.01, T = 10.0;
    auto ratio_for = [&](const Eigen::VectorXd& x0, bool* diverged) {
        const TrajectoryRecord ref = integrate_nonlinear(demo.field, x0, dt, T);
        TrajectoryRecord lifted = integrate_lifted(gen, lift(x0, demo.dict), dt, T);
        TrajectoryRecord pred = extract_state(lifted, 2);
        if (diverged) *diverged = ref.diverged || pred.diverged;
        const int n = std::min(ref.length(), pred.length());
        TrajectoryRecord rtrim = ref, ptrim = pred;
        rtrim.times.conservativeResize(n);
        rtrim.states.conservativeResize(n, Eigen::NoChange);
        ptrim.times.conservativeResize(n);
        ptrim.states.conservativeResize(n, Eigen::NoChange);
        const TrajectoryComparison cmp = compare_trajectories(rtrim, ptrim);
        double amp = 0.0;
        for (int t = 0; t < n; ++t) amp += rtrim.states.row(t).squaredNorm();
        amp = std::sqrt(amp / n);
        return cmp.rmse / amp;
    };

    bool diverged = false;
    const double interior = ratio_for(vec2(0.4, 0.4), &diverged);
    c.note("interior RMSE/amplitude = " + fmt(interior));
    c.expect(!diverged, "interior prediction diverged");
    c.expect(interior < 0.25,
             "interior RMSE ratio " + fmt(interior) + " not below 0.25");

    // constant observable along the interior run
    const TrajectoryRecord lifted =
        integrate_lifted(gen, lift(vec2(0.4, 0.4), demo.dict), dt, T);
    const double drift = (lifted.lifted.col(0).array() - 1.0).abs().maxCoeff();
    c.expect(drift < 1e-3, "constant-observable drift " + fmt(drift) + " >= 1e-3");

    // Documented negative: a start against the lattice boundary degrades and
    // carries no threshold (the trajectory leaves the mesh).
    const double boundary = ratio_for(vec2(0.75, 0.75), nullptr);
    c.note("boundary RMSE/amplitude = " + fmt(boundary) + " (reported, not gated)");
    c.expect(std::isfinite(boundary), "boundary run did not produce a finite report");
}

void criterion_7_budget_soundness() {
    Criterion c(7, "measured toggle error stays under the t-linear budget");
    DemoSetup demo = toggle_demo();
    auto [W, report] = fit_weights(demo.field, demo.dict, demo.grid, demo.ridge);
    const KoopmanGenerator gen =
        assemble_generator(demo.dict, W, demo.field, demo.grid, demo.ridge);
    const ErrorBoundReport bounds = compute_error_bounds(demo.dict, W, 24);

    Eigen::VectorXd delta_sup = Eigen::VectorXd::Zero(2);
    for (int s = 0; s < demo.grid.size(); ++s) {
        delta_sup = delta_sup.cwiseMax(
            residual_at(demo.field, W, demo.dict, demo.grid.points.row(s).transpose())
                .cwiseAbs());
    }
    const double delta_rate =
        demo.dict.num_centers() * delta_propagation_bound(delta_sup, demo.dict.alpha()) +
        delta_sup.norm();

    const double dt = 0.01, T = 10.0;
    std::vector<Eigen::VectorXd> starts{vec2(0.8, 1.9), vec2(1.6, 0.5)};
    std::mt19937_64 eng(71);
    std::uniform_real_distribution<double> u(0.3, 1.9); // mesh interior
    for (int i = 0; i < 5; ++i) starts.push_back(vec2(u(eng), u(eng)));

    double worst_margin = std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& x0 : starts) {
        const TrajectoryRecord ref = integrate_nonlinear(demo.field, x0, dt, T);
        const TrajectoryRecord pred =
            extract_state(integrate_lifted(gen, lift(x0, demo.dict), dt, T), 2);
        c.expect(!ref.diverged && !pred.diverged, "integration diverged");
        const TrajectoryComparison cmp = compare_trajectories(ref, pred);
        for (int t = 1; t < cmp.err_l2.size(); ++t) {
            const double budget =
                trajectory_error_budget(bounds, t * dt) + (t * dt) * delta_rate;
            worst_margin = std::min(worst_margin, budget - cmp.err_l2[t]);
            if (cmp.err_l2[t] > budget) {
                c.expect(false, "error " + fmt(cmp.err_l2[t]) + " exceeds budget " +
                                    fmt(budget) + " at t = " + fmt(t * dt));
                break;
            }
        }
    }
    c.note("worst margin = " + fmt(worst_margin));
    c.expect(c.elapsed() < 30.0, "runtime exceeded 30 s");
}

void criterion_8_structural_invariants() {
    Criterion c(8, "structural invariants and bitwise model round-trip");
    DemoSetup demo = toggle_demo();
    auto [W, report] = fit_weights(demo.field, demo.dict, demo.grid, demo.ridge);
    const KoopmanGenerator gen =
        assemble_generator(demo.dict, W, demo.field, demo.grid, demo.ridge);

    const int n = 2, NL = demo.dict.num_centers();
    c.expect(gen.K.row(0).cwiseAbs().maxCoeff() == 0.0, "constant row is not zero");
    c.expect(gen.K.block(1, 0, n, 1 + n).cwiseAbs().maxCoeff() == 0.0,
             "state rows have nonzero entries left of the Lambda block");
    c.expect(gen.K.block(1, 1 + n, n, NL) == W.W, "state rows do not equal W");

    // join closure, exhaustive at N_L = 100
    const SILLDictionary lattice100 =
        build_lattice(vec2(0, 0), vec2(0.9, 0.9), vec2(0.1, 0.1), Steepness(2.0));
    c.expect(lattice100.num_centers() == 100, "lattice is not 10x10");
    bool joins_ok = true;
    for (int l = 0; l < 100 && joins_ok; ++l) {
        for (int k = 0; k < 100 && joins_ok; ++k) {
            const Eigen::VectorXd vmax =
                lattice100.center(l).cwiseMax(lattice100.center(k));
            const int j = lattice100.join(l, k);
            joins_ok = j >= 0 && lattice100.center(j) == vmax;
        }
    }
    c.expect(joins_ok, "a pairwise join is missing or wrong");

    // model round trip, bitwise
    const fs::path dir = fs::temp_directory_path() / "sill_acceptance_model";
    fs::create_directories(dir);
    const ModelFile model = make_model_file(demo.dict, W, gen, "deadbeefdeadbeef");
    const std::string path = (dir / "model.json").string();
    save_model(model, path);
    const ModelFile loaded = load_model(path);
    c.expect(loaded.W == model.W && loaded.K == model.K &&
                 loaded.centers == model.centers &&
                 loaded.domain_lo == model.domain_lo &&
                 loaded.domain_hi == model.domain_hi &&
                 loaded.mesh_spacing == model.mesh_spacing && loaded.alpha == model.alpha,
             "round trip is not bitwise exact");
    const std::string path2 = (dir / "model2.json").string();
    save_model(loaded, path2);
    c.expect(read_file(path) == read_file(path2), "re-serialization changed bytes");
    fs::remove_all(dir);
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1_toggle_regression();
    criterion_2_alpha_convergence();
    criterion_3_sup_error_oracle();
    criterion_4_derivative_exactness();
    criterion_5_edmd_baseline();
    criterion_6_vdp_reproduction();
    criterion_7_budget_soundness();
    criterion_8_structural_invariants();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
