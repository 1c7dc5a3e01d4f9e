#include "sill/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "sill/config.hpp"
#include "sill/error_analysis.hpp"
#include "sill/generator.hpp"
#include "sill/model_io.hpp"
#include "sill/parallel.hpp"
#include "sill/simulation.hpp"
#include "sill/text_io.hpp"

namespace sill {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Exit-code policy: config/contract problems are 2, numerical failures 3.
template <typename Fn>
int run_command(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

struct Pipeline {
    ExperimentConfig config;
    VectorField field;
    SILLDictionary dict;
    SampleGrid grid;
};

Pipeline build_pipeline(const std::string& config_path) {
    ExperimentConfig config = load_config(config_path);
    VectorField field = make_system(config.system);
    if (field.state_dim != static_cast<int>(config.domain.lo.size())) {
        throw ConfigError("$.domain", "dimension does not match system '" +
                                          config.system.name + "'");
    }
    SILLDictionary dict = make_dictionary(config);
    SampleGrid grid = make_grid(config, dict);
    if (grid.size() < dict.num_centers()) {
        std::cerr << "warning: sample grid has fewer points (" << grid.size()
                  << ") than dictionary centers (" << dict.num_centers() << ")\n";
    }
    return Pipeline{std::move(config), std::move(field), std::move(dict), std::move(grid)};
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ResourceError("cannot create output directory '" + dir + "': " + ec.message());
    }
}

json regression_report_json(const RegressionReport& report) {
    json out;
    out["rel_l2_error"] = vector_to_json(report.rel_l2_error);
    out["max_abs_residual"] = vector_to_json(report.max_abs_residual);
    out["ridge"] = report.ridge;
    out["rank_deficient"] = report.rank_deficient;
    out["zero_norm_components"] = report.zero_norm_components;
    return out;
}

struct SimulatedTrajectory {
    TrajectoryRecord reference;
    TrajectoryRecord predicted; // state view of the lifted run
    TrajectoryRecord lifted;
    TrajectoryComparison comparison; // over the common prefix
    bool diverged = false;
};

SimulatedTrajectory simulate_one(const VectorField& field, const SILLDictionary& dict,
                                 const KoopmanGenerator& gen, const Eigen::VectorXd& x0,
                                 double dt, double horizon) {
    SimulatedTrajectory out;
    out.reference = integrate_nonlinear(field, x0, dt, horizon);
    out.lifted = integrate_lifted(gen, lift(x0, dict), dt, horizon);
    out.predicted = extract_state(out.lifted, dict.state_dim());
    out.diverged = out.reference.diverged || out.predicted.diverged;

    // Compare over the common prefix when one side stopped early.
    TrajectoryRecord ref = out.reference;
    TrajectoryRecord pred = out.predicted;
    const int T = std::min(ref.length(), pred.length());
    ref.times.conservativeResize(T);
    ref.states.conservativeResize(T, Eigen::NoChange);
    pred.times.conservativeResize(T);
    pred.states.conservativeResize(T, Eigen::NoChange);
    out.comparison = compare_trajectories(ref, pred);
    return out;
}

void write_trajectory_csvs(const std::string& dir, int index,
                           const SimulatedTrajectory& traj, int n) {
    std::vector<std::string> ref_header{"t"};
    for (int i = 1; i <= n; ++i) ref_header.push_back("x" + std::to_string(i));
    CsvWriter ref_csv(ref_header);
    for (int t = 0; t < traj.reference.length(); ++t) {
        std::vector<double> row{traj.reference.times[t]};
        for (int i = 0; i < n; ++i) row.push_back(traj.reference.states(t, i));
        ref_csv.add_row(row);
    }
    ref_csv.write(dir + "/traj_" + std::to_string(index) + "_reference.csv");

    std::vector<std::string> pred_header = ref_header;
    for (int i = 1; i <= n; ++i) pred_header.push_back("xhat" + std::to_string(i));
    pred_header.push_back("err_l2");
    CsvWriter pred_csv(pred_header);
    const int T = static_cast<int>(traj.comparison.err_l2.size());
    for (int t = 0; t < T; ++t) {
        std::vector<double> row{traj.reference.times[t]};
        for (int i = 0; i < n; ++i) row.push_back(traj.reference.states(t, i));
        for (int i = 0; i < n; ++i) row.push_back(traj.predicted.states(t, i));
        row.push_back(traj.comparison.err_l2[t]);
        pred_csv.add_row(row);
    }
    pred_csv.write(dir + "/traj_" + std::to_string(index) + "_predicted.csv");
}

} // namespace

int cmd_fit(const std::string& config_path) {
    return run_command([&]() {
        Pipeline p = build_pipeline(config_path);
        ensure_output_dir(p.config.output.directory);

        auto [weights, report] = fit_weights(p.field, p.dict, p.grid,
                                             p.config.regression.ridge);
        KoopmanGenerator gen = assemble_generator(p.dict, weights, p.field, p.grid,
                                                  p.config.regression.ridge);
        ClosureResidualReport closure =
            closure_residual(p.dict, weights, p.field, gen, p.grid);

        ModelFile model = make_model_file(p.dict, weights, gen, p.config.config_hash);
        const std::string model_path = p.config.output.directory + "/model.json";
        save_model(model, model_path);

        json rep;
        rep["system"] = p.config.system.name;
        rep["dictionary"] = {{"num_centers", p.dict.num_centers()},
                             {"lift_dim", p.dict.lift_dim()},
                             {"alpha", p.dict.alpha().value()}};
        rep["grid"] = {{"description", p.grid.description}, {"size", p.grid.size()}};
        rep["regression"] = regression_report_json(report);
        rep["closure"] = {{"epsilon_rms", closure.epsilon_rms},
                          {"epsilon_sup", closure.epsilon_sup},
                          {"lambda_row_rms_max", closure.lambda_row_rms.maxCoeff()},
                          {"lambda_row_sup_max", closure.lambda_row_sup.maxCoeff()}};
        rep["generator"] = {{"rank_deficient", gen.rank_deficient}};
        rep["provenance"] = {{"config_hash", p.config.config_hash},
                             {"build_version", kBuildVersion}};
        write_file(p.config.output.directory + "/fit_report.json", rep.dump(2) + "\n");

        std::cout << "fit: " << p.dict.num_centers() << " centers, grid "
                  << p.grid.description << "\n";
        for (int i = 0; i < report.rel_l2_error.size(); ++i) {
            std::cout << "  rel_l2_error[f" << (i + 1)
                      << "] = " << format_double(report.rel_l2_error[i]) << "\n";
        }
        std::cout << "  closure epsilon_rms = " << format_double(closure.epsilon_rms)
                  << ", model -> " << model_path << "\n";
        return 0;
    });
}

int cmd_simulate(const std::string& model_path, const std::string& config_path, int jobs) {
    return run_command([&]() {
        ExperimentConfig config = load_config(config_path);
        ModelFile model = load_model(model_path);
        if (model.state_dim != static_cast<int>(config.domain.lo.size())) {
            throw ConfigError("$.domain", "dimension does not match the model");
        }
        VectorField field = make_system(config.system);
        if (field.state_dim != model.state_dim) {
            throw ConfigError("$.system", "system dimension does not match the model");
        }
        SILLDictionary dict = dictionary_from_model(model);
        KoopmanGenerator gen = generator_from_model(model);
        ensure_output_dir(config.output.directory);

        const std::vector<Eigen::VectorXd> ics = initial_conditions(config);
        std::vector<SimulatedTrajectory> runs(ics.size());
        parallel_for(static_cast<int>(ics.size()), jobs, [&](int i) {
            runs[i] = simulate_one(field, dict, gen, ics[i], config.simulation.dt,
                                   config.simulation.horizon);
        });

        json summary;
        summary["model"] = model_path;
        summary["dt"] = config.simulation.dt;
        summary["horizon"] = config.simulation.horizon;
        json entries = json::array();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            write_trajectory_csvs(config.output.directory, static_cast<int>(i), runs[i],
                                  model.state_dim);
            const auto& cmp = runs[i].comparison;
            json entry;
            entry["x0"] = vector_to_json(ics[i]);
            entry["rmse"] = cmp.rmse;
            entry["sup"] = cmp.sup;
            entry["rmse_per_component"] = vector_to_json(cmp.rmse_per_component);
            entry["sup_per_component"] = vector_to_json(cmp.sup_per_component);
            entry["diverged"] = runs[i].diverged;
            entry["reference_csv"] =
                "traj_" + std::to_string(i) + "_reference.csv";
            entry["predicted_csv"] =
                "traj_" + std::to_string(i) + "_predicted.csv";
            entries.push_back(std::move(entry));
            std::cout << "simulate[" << i << "]: rmse = " << format_double(cmp.rmse)
                      << ", sup = " << format_double(cmp.sup)
                      << (runs[i].diverged ? " (diverged)" : "") << "\n";
        }
        summary["trajectories"] = std::move(entries);
        write_file(config.output.directory + "/simulate_summary.json",
                   summary.dump(2) + "\n");
        return 0;
    });
}

int cmd_sweep_alpha(const std::string& config_path, int jobs) {
    return run_command([&]() {
        Pipeline p = build_pipeline(config_path);
        if (p.config.analysis.alphas.empty()) {
            throw ConfigError("$.analysis.alphas", "required for sweep-alpha");
        }
        ensure_output_dir(p.config.output.directory);

        const double min_offset =
            p.config.analysis.min_offset_fraction * p.dict.mesh_spacing().minCoeff();
        const Eigen::MatrixXd points = sample_off_center_points(
            p.dict, p.config.analysis.sample_count, min_offset, p.config.analysis.seed);
        const Eigen::MatrixXi joins = p.dict.join_table();
        const int NL = p.dict.num_centers();
        const int P = static_cast<int>(points.rows());

        const auto& alphas = p.config.analysis.alphas;
        std::vector<double> max_abs_e(alphas.size());
        std::vector<double> closure_rms(alphas.size());
        parallel_for(static_cast<int>(alphas.size()), jobs, [&](int ai) {
            const double a = alphas[ai];
            SILLDictionary dict_a =
                build_lattice(p.config.domain.lo, p.config.domain.hi,
                              p.config.dictionary.spacing, Steepness(a));
            auto [weights, report] =
                fit_weights(p.field, dict_a, p.grid, p.config.regression.ridge);
            KoopmanGenerator gen = assemble_generator(dict_a, weights, p.field, p.grid,
                                                      p.config.regression.ridge);
            closure_rms[ai] =
                closure_residual(dict_a, weights, p.field, gen, p.grid).epsilon_rms;

            Eigen::MatrixXd lam(P, NL); // Lambda values at the shared sample points
            for (int s = 0; s < P; ++s) {
                lam.row(s) = dict_a.lambda_values(points.row(s).transpose()).transpose();
            }
            double worst = 0.0;
            for (int l = 0; l < NL; ++l) {
                for (int k = l; k < NL; ++k) {
                    const int j = joins(l, k);
                    for (int s = 0; s < P; ++s) {
                        worst = std::max(worst,
                                         std::abs(a * (lam(s, l) * lam(s, k) - lam(s, j))));
                    }
                }
            }
            max_abs_e[ai] = worst;
        });

        CsvWriter csv({"alpha", "max_abs_pair_error", "closure_residual_l2"});
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            csv.add_row({alphas[i], max_abs_e[i], closure_rms[i]});
            std::cout << "alpha = " << format_double(alphas[i])
                      << ": max |E| = " << format_double(max_abs_e[i])
                      << ", closure rms = " << format_double(closure_rms[i]) << "\n";
        }
        const std::string csv_path = p.config.output.directory + "/alpha_sweep.csv";
        csv.write(csv_path);
        std::cout << "sweep -> " << csv_path << "\n";
        return 0;
    });
}

int cmd_error_bounds(const std::string& model_path, const std::string& config_path) {
    return run_command([&]() {
        ExperimentConfig config = load_config(config_path);
        ModelFile model = load_model(model_path);
        if (model.state_dim != static_cast<int>(config.domain.lo.size())) {
            throw ConfigError("$.domain", "dimension does not match the model");
        }
        VectorField field = make_system(config.system);
        SILLDictionary dict = dictionary_from_model(model);
        WeightMatrix weights = weights_from_model(model);
        KoopmanGenerator gen = generator_from_model(model);
        ensure_output_dir(config.output.directory);

        ErrorBoundReport bounds =
            compute_error_bounds(dict, weights, config.analysis.sup_search_density);

        // Regression residual sups on the configured grid, with the model's W.
        SampleGrid grid = make_grid(config, dict);
        Eigen::VectorXd delta_sup = Eigen::VectorXd::Zero(dict.state_dim());
        for (int s = 0; s < grid.size(); ++s) {
            const Eigen::VectorXd d =
                residual_at(field, weights, dict, grid.points.row(s).transpose());
            delta_sup = delta_sup.cwiseMax(d.cwiseAbs());
        }
        const double delta_row_rate = delta_propagation_bound(delta_sup, dict.alpha());
        const double delta_row_rate_refined =
            delta_propagation_bound_refined(delta_sup, dict.alpha());
        // Total extra rate: one delta term per Lambda row plus the direct
        // state-row residual.
        const double delta_rate =
            dict.num_centers() * delta_row_rate + delta_sup.norm();

        // Measured trajectory error against the combined budget.
        const double dt = config.simulation.dt;
        const double horizon = config.simulation.horizon;
        const std::vector<Eigen::VectorXd> ics = initial_conditions(config);
        bool within_budget = true;
        double worst_margin = std::numeric_limits<double>::infinity();
        json measured = json::array();
        for (std::size_t i = 0; i < ics.size(); ++i) {
            SimulatedTrajectory traj =
                simulate_one(field, dict, gen, ics[i], dt, horizon);
            const int T = static_cast<int>(traj.comparison.err_l2.size());
            for (int t = 1; t < T; ++t) {
                const double budget = trajectory_error_budget(bounds, t * dt) +
                                      (t * dt) * delta_rate;
                const double margin = budget - traj.comparison.err_l2[t];
                worst_margin = std::min(worst_margin, margin);
                if (margin < 0.0) within_budget = false;
            }
            json entry;
            entry["x0"] = vector_to_json(ics[i]);
            entry["rmse"] = traj.comparison.rmse;
            entry["sup"] = traj.comparison.sup;
            entry["diverged"] = traj.diverged;
            measured.push_back(std::move(entry));
        }

        json rep;
        rep["M_hat"] = matrix_to_json(bounds.M_hat);
        rep["M_hat_lambda"] = vector_to_json(bounds.M_hat_lambda);
        rep["total_rate"] = bounds.total_rate;
        rep["search"] = {{"density", bounds.search_grid_density},
                         {"lo", vector_to_json(bounds.search_lo)},
                         {"hi", vector_to_json(bounds.search_hi)}};
        rep["delta"] = {{"sup_per_component", vector_to_json(delta_sup)},
                        {"row_rate", delta_row_rate},
                        {"row_rate_refined", delta_row_rate_refined},
                        {"total_rate", delta_rate}};
        json budget_rows = json::array();
        for (int i = 0; i <= 10; ++i) {
            const double t = horizon * i / 10.0;
            budget_rows.push_back({{"t", t},
                                   {"closure_budget", trajectory_error_budget(bounds, t)},
                                   {"with_delta",
                                    trajectory_error_budget(bounds, t) + t * delta_rate}});
        }
        rep["budget"] = std::move(budget_rows);
        rep["measured"] = std::move(measured);
        rep["within_budget"] = within_budget;
        rep["worst_margin"] = worst_margin;
        rep["provenance"] = {{"config_hash", config.config_hash},
                             {"build_version", kBuildVersion}};
        write_file(config.output.directory + "/error_bounds.json", rep.dump(2) + "\n");

        std::cout << "error-bounds: total_rate = " << format_double(bounds.total_rate)
                  << ", budget(horizon) = "
                  << format_double(trajectory_error_budget(bounds, horizon))
                  << ", within_budget = " << (within_budget ? "true" : "false") << "\n";
        return 0;
    });
}

namespace {

json demo_config(const std::string& which, const std::string& outdir) {
    json cfg;
    if (which == "vdp") {
        cfg["system"] = {{"name", "vdp"}, {"params", {{"a1", -0.2}}}};
        cfg["domain"] = {{"lo", {-0.8, -0.8}}, {"hi", {0.8, 0.8}}};
        cfg["dictionary"] = {{"spacing", {0.32, 0.32}}, {"alpha", 2.0}};
        cfg["regression"] = {{"per_dim", 12},
                             {"mode", "lattice"},
                             {"seed", 1234},
                             {"ridge", 1e-10}};
        // The second start sits against the lattice boundary; its prediction
        // is expected to degrade and is reported, not gated.
        cfg["simulation"] = {{"dt", 0.01},
                             {"horizon", 10.0},
                             {"initial_conditions", {{0.4, 0.4}, {0.75, 0.75}}}};
    } else {
        cfg["system"] = {{"name", "toggle"},
                         {"params",
                          {{"a1", 2.0}, {"a2", 2.0}, {"n1", 3.0}, {"n2", 3.0},
                           {"delta", 1.0}}}};
        cfg["domain"] = {{"lo", {0.0, 0.0}}, {"hi", {2.2, 2.2}}};
        cfg["dictionary"] = {{"spacing", {0.44, 0.44}}, {"alpha", 1.4}};
        cfg["regression"] = {{"per_dim", 12},
                             {"mode", "lattice"},
                             {"seed", 1234},
                             {"ridge", 0.0}};
        cfg["simulation"] = {{"dt", 0.01},
                             {"horizon", 10.0},
                             {"initial_conditions", {{0.8, 1.9}, {1.6, 0.5}}}};
    }
    cfg["analysis"] = {{"alphas", {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}},
                       {"sup_search_density", 24},
                       {"sample_count", 100},
                       {"min_offset_fraction", 0.48},
                       {"seed", 99}};
    cfg["output"] = {{"directory", outdir}};
    return cfg;
}

} // namespace

int cmd_demo(const std::string& which, const std::string& outdir, int jobs) {
    return run_command([&]() {
        if (which != "vdp" && which != "toggle") {
            throw ConfigError("demo", "expected 'vdp' or 'toggle', got '" + which + "'");
        }
        ensure_output_dir(outdir);
        const std::string config_path = outdir + "/config.json";
        write_file(config_path, demo_config(which, outdir).dump(2) + "\n");
        std::cout << "demo config -> " << config_path << "\n";

        int rc = cmd_fit(config_path);
        if (rc != 0) return rc;
        rc = cmd_simulate(outdir + "/model.json", config_path, jobs);
        if (rc != 0) return rc;
        return cmd_error_bounds(outdir + "/model.json", config_path);
    });
}

} // namespace sill
