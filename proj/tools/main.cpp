// feedersim command-line front end: generate | solve | sweep | case.
//
// Exit codes: 0 success, 1 validation/config error, 2 solver divergence,
// 3 benchmark tolerance failure (case subcommand only).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feedersim/config.hpp"
#include "feedersim/control.hpp"
#include "feedersim/errors.hpp"
#include "feedersim/experiment.hpp"
#include "feedersim/model.hpp"
#include "feedersim/powerflow.hpp"

namespace fs = std::filesystem;
using namespace feedersim;

namespace {

struct CliState {
    RunConfig cfg;
    bool n_seeds_given = false;

    // string shims for enum-valued flags
    std::string scheme_s, coeff_mode_s, model_s, format_s;
    int case_flag = 0;

    std::string feeder_path;  // solve input
    std::string output_path;  // -o
    double tol = 1e-10;
    int max_iter = 100;
};

void add_seed_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--topology-seed", st.cfg.topology_seed,
                    "Seed for line lengths (fixed across load re-draws)");
    cmd->add_option("--load-seed", st.cfg.load_seed,
                    "Seed for loads and PV placement");
}

void add_scenario_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--case", st.case_flag, "Canonical case id (1..4)");
    auto& sc = st.cfg.scenario;
    const auto shape = [&st, cmd](const char* name, auto& field, const char* help) {
        cmd->add_option(name, field, help)
            ->each([&st](const std::string&) { st.cfg.scenario_shape_set = true; });
    };
    shape("--node-count", sc.node_count, "Number of chain nodes");
    shape("--spacing-min", sc.spacing_min_km, "Min segment length, km");
    shape("--spacing-max", sc.spacing_max_km, "Max segment length, km");
    shape("--r-per-km", sc.r_per_km, "Resistance per km, ohm");
    shape("--x-per-km", sc.x_per_km, "Reactance per km, ohm");
    shape("--v0", sc.v0_volts, "Substation voltage, V");
    shape("--p-c-max", sc.p_c_max_w, "Max nodal real consumption, W");
    shape("--q-c-ratio-min", sc.q_c_ratio_min, "Min q_c/p_c ratio");
    shape("--q-c-ratio-max", sc.q_c_ratio_max, "Max q_c/p_c ratio");
    shape("--penetration", sc.penetration, "Fraction of nodes with PV");
    shape("--p-g", sc.p_g_w, "PV output at PV nodes, W");
    shape("--s", sc.s_va, "Inverter rating at PV nodes, VA");
    add_seed_flags(cmd, st);
}

void add_control_flags(CLI::App* cmd, CliState& st, bool with_scheme) {
    if (with_scheme) {
        cmd->add_option("--scheme", st.scheme_s, "none|loss|voltage|hybrid");
        cmd->add_option("--k", st.cfg.k, "Hybrid weight K");
    }
    cmd->add_option("--coeff-mode", st.coeff_mode_s, "paper_literal|drop_nulling");
    cmd->add_option("--epsilon", st.cfg.epsilon, "Voltage-quality bound (per-unit)");
}

void resolve_enums(CliState& st) {
    if (!st.scheme_s.empty()) st.cfg.scheme = scheme_from_string(st.scheme_s);
    if (!st.coeff_mode_s.empty()) st.cfg.coeff_mode = coeff_mode_from_string(st.coeff_mode_s);
    if (!st.model_s.empty()) st.cfg.model = model_from_string(st.model_s);
    if (!st.format_s.empty()) st.cfg.format = st.format_s;
    if (st.case_flag != 0) st.cfg.case_id = st.case_flag;
}

std::string default_output(const CliState& st, const std::string& name) {
    return st.output_path.empty() ? (fs::path(st.cfg.output_dir) / name).string()
                                  : st.output_path;
}

std::string tag_of(const RunConfig& cfg) {
    return cfg.case_id ? std::to_string(*cfg.case_id) : std::string("custom");
}

int cmd_generate(CliState& st) {
    resolve_enums(st);
    const ScenarioSpec spec = st.cfg.make_scenario();
    Feeder feeder = generate_feeder(spec);
    feeder.case_tag = tag_of(st.cfg);

    const std::string path = default_output(st, "feeder.txt");
    write_feeder_file(path, feeder);

    double total_load = 0.0, total_pv = 0.0;
    std::size_t pv_nodes = 0;
    for (const auto& n : feeder.nodes) {
        total_load += n.p_c_w;
        total_pv += n.p_g_w;
        if (n.s_va > 0.0) ++pv_nodes;
    }
    std::cout << "wrote " << path << '\n'
              << "nodes: " << feeder.size() << '\n'
              << "total_load_w: " << format_double(total_load) << '\n'
              << "total_pv_w: " << format_double(total_pv) << '\n'
              << "pv_nodes: " << pv_nodes << '\n';
    return 0;
}

int cmd_solve(CliState& st) {
    resolve_enums(st);
    const Feeder feeder = read_feeder_file(st.feeder_path);

    ControlConfig cfg;
    cfg.scheme = st.cfg.scheme;
    cfg.k = st.cfg.k;
    cfg.coeff_mode = st.cfg.coeff_mode;
    cfg.epsilon = st.cfg.epsilon;
    cfg.alpha = feeder_alpha(feeder);
    if (!has_uniform_impedance_ratio(feeder)) {
        std::cerr << "warning: line r/x ratio varies by more than 1%; "
                     "the voltage law assumes a nearly constant ratio\n";
    }

    const Injection inj = apply_control(feeder, cfg);
    const FlowSolution sol = st.cfg.model == ModelTag::linear
                                 ? solve_lindistflow(feeder, inj)
                                 : solve_distflow(feeder, inj, st.tol, st.max_iter);

    const std::string path = default_output(st, "solution.txt");
    write_solution_file(path, sol);

    const double losses = losses_w(sol, feeder);
    const VoltageDeviation dev = max_voltage_deviation(sol);
    std::cout << "wrote " << path << '\n'
              << "model: " << to_string(sol.model) << '\n';
    if (sol.model == ModelTag::nonlinear) {
        std::cout << "iterations: " << sol.iterations << '\n'
                  << "residual: " << format_double(sol.residual) << '\n';
    }
    std::cout << "losses_w: " << format_double(losses) << '\n'
              << "delta_v: " << format_double(dev.value) << " (worst node "
              << dev.node << ')';
    if (dev.value >= cfg.epsilon) {
        std::cout << "  VIOLATES epsilon=" << format_double(cfg.epsilon);
    }
    std::cout << '\n';
    return 0;
}

RunCaseOptions options_of(const CliState& st) {
    RunCaseOptions opts;
    opts.topology_seed = st.cfg.topology_seed;
    opts.load_seed0 = st.cfg.load_seed;
    opts.k_min = st.cfg.k_min;
    opts.k_max = st.cfg.k_max;
    opts.coeff_mode = st.cfg.coeff_mode;
    opts.model = st.cfg.model;
    opts.epsilon = st.cfg.epsilon;
    return opts;
}

void write_ensemble_files(const CaseRun& run, const RunCaseOptions& opts,
                          const std::string& tag, const std::string& dir,
                          const std::string& suffix) {
    for (const auto& sweep : run.sweeps) {
        const std::string name = "sweep_" + tag + "_t" +
                                 std::to_string(sweep.topology_seed) + "_l" +
                                 std::to_string(sweep.load_seed) + suffix + ".csv";
        write_sweep_csv_file((fs::path(dir) / name).string(), sweep);
    }
    if (run.stats.n_seeds > 1) {
        const std::string name = "sweep_" + tag + "_t" +
                                 std::to_string(opts.topology_seed) + suffix +
                                 "_aggregate.csv";
        write_aggregate_csv_file((fs::path(dir) / name).string(), run, opts, tag);
    }
}

int cmd_sweep(CliState& st) {
    resolve_enums(st);
    st.cfg.validate();
    const ScenarioSpec spec = st.cfg.make_scenario();
    const std::string tag = tag_of(st.cfg);
    const RunCaseOptions opts = options_of(st);

    CaseRun run = run_ensemble(spec, tag, st.cfg.n_seeds, st.cfg.steps, opts);
    if (st.cfg.case_id) run.stats.case_id = *st.cfg.case_id;
    write_ensemble_files(run, opts, tag, st.cfg.output_dir, "");

    const auto& agg = run.aggregate;
    const std::size_t il = agg.argmin_rel_losses();
    const std::size_t iv = agg.argmin_delta_v();
    std::cout << "baseline_l0_w: " << format_double(run.stats.l0_w.mean) << '\n'
              << "baseline_delta_v0: " << format_double(run.stats.delta_v0.mean) << '\n'
              << "min_rel_losses: " << format_double(agg.rel_losses[il])
              << " at k=" << format_double(agg.k[il]) << '\n'
              << "min_delta_v: " << format_double(agg.delta_v[iv])
              << " at k=" << format_double(agg.k[iv]) << '\n';

    if (st.cfg.format == "structured") {
        const std::string name = "sweep_" + tag + "_summary.txt";
        write_case_summary_file((fs::path(st.cfg.output_dir) / name).string(), run,
                                opts, st.cfg.steps);
    }

    if (st.cfg.refine) {
        // second pass at 10x resolution around the coarse loss minimum;
        // the step stays at exactly coarse/10 even when the window clamps
        const double h = (st.cfg.k_max - st.cfg.k_min) / (st.cfg.steps - 1);
        RunCaseOptions fine = opts;
        fine.k_min = std::max(st.cfg.k_min, agg.k[il] - 10.0 * h);
        fine.k_max = std::min(st.cfg.k_max, agg.k[il] + 10.0 * h);
        const int fine_steps = std::max(
            2, static_cast<int>(std::lround((fine.k_max - fine.k_min) / (h / 10.0))) + 1);
        const CaseRun fine_run =
            run_ensemble(spec, tag, st.cfg.n_seeds, fine_steps, fine);
        write_ensemble_files(fine_run, fine, tag, st.cfg.output_dir, "_refine");
        const auto& fagg = fine_run.aggregate;
        const std::size_t fil = fagg.argmin_rel_losses();
        std::cout << "refined_min_rel_losses: " << format_double(fagg.rel_losses[fil])
                  << " at k=" << format_double(fagg.k[fil]) << '\n';
    }
    return 0;
}

int cmd_case(CliState& st) {
    resolve_enums(st);
    if (!st.cfg.case_id) throw ValidationError("case: --case is required");
    if (!st.n_seeds_given) st.cfg.n_seeds = 20;
    st.cfg.validate();

    const RunCaseOptions opts = options_of(st);
    const CaseRun run = run_case(*st.cfg.case_id, st.cfg.n_seeds, st.cfg.steps, opts);

    const std::string name = "case" + std::to_string(*st.cfg.case_id) + "_summary.txt";
    const std::string path = default_output(st, name);
    write_case_summary_file(path, run, opts, st.cfg.steps);

    const auto& agg = run.aggregate;
    const bool ok = within_benchmark_tolerances(run);
    std::cout << "wrote " << path << '\n'
              << "mean_l0_w: " << format_double(run.stats.l0_w.mean) << '\n'
              << "mean_delta_v0: " << format_double(run.stats.delta_v0.mean) << '\n'
              << "agg_min_rel_losses: "
              << format_double(agg.rel_losses[agg.argmin_rel_losses()]) << '\n'
              << "benchmark_within_tolerance: " << (ok ? "yes" : "no") << '\n';
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CliState st;

    // the config file provides defaults; flags parsed below override them
    try {
        for (int i = 1; i + 1 < argc; ++i) {
            if (std::string(argv[i]) == "--config") {
                const auto kv = load_config_file(argv[i + 1]);
                st.cfg = config_from_map(kv);
                st.n_seeds_given = kv.count("n_seeds") > 0;
                break;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    CLI::App app{"Radial distribution-feeder simulator with local volt-VAR control"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Flat key=value config file")
        ->expected(1);

    auto* gen = app.add_subcommand("generate", "Generate a random feeder file");
    add_scenario_flags(gen, st);
    gen->add_option("-o,--output", st.output_path, "Feeder file path");
    gen->add_option("--output-dir", st.cfg.output_dir, "Output directory");

    auto* solve = app.add_subcommand("solve", "Solve power flow on a feeder file");
    solve->add_option("feeder", st.feeder_path, "Feeder file")->required();
    add_control_flags(solve, st, true);
    solve->add_option("--model", st.model_s, "linear|nonlinear");
    solve->add_option("--tol", st.tol, "Nonlinear convergence tolerance");
    solve->add_option("--max-iter", st.max_iter, "Nonlinear iteration budget");
    solve->add_option("-o,--output", st.output_path, "Solution file path");
    solve->add_option("--output-dir", st.cfg.output_dir, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Sweep the hybrid weight K");
    add_scenario_flags(sweep, st);
    add_control_flags(sweep, st, false);
    sweep->add_option("--k-min", st.cfg.k_min, "Sweep lower bound");
    sweep->add_option("--k-max", st.cfg.k_max, "Sweep upper bound");
    sweep->add_option("--steps", st.cfg.steps, "Grid points (inclusive endpoints)");
    sweep->add_flag("--refine", st.cfg.refine, "Refinement pass around the loss minimum");
    sweep->add_option("--model", st.model_s, "linear|nonlinear");
    sweep->add_option("--n-seeds", st.cfg.n_seeds, "Load/PV realizations")
        ->each([&st](const std::string&) { st.n_seeds_given = true; });
    sweep->add_option("--output-dir", st.cfg.output_dir, "Output directory");
    sweep->add_option("--format", st.format_s, "csv|structured");

    auto* casecmd = app.add_subcommand("case", "Ensemble study of a canonical case");
    casecmd->add_option("--case", st.case_flag, "Case id (1..4)");
    add_seed_flags(casecmd, st);
    add_control_flags(casecmd, st, false);
    casecmd->add_option("--steps", st.cfg.steps, "Grid points");
    casecmd->add_option("--k-min", st.cfg.k_min, "Sweep lower bound");
    casecmd->add_option("--k-max", st.cfg.k_max, "Sweep upper bound");
    casecmd->add_option("--model", st.model_s, "linear|nonlinear");
    casecmd->add_option("--n-seeds", st.cfg.n_seeds, "Ensemble size (default 20)")
        ->each([&st](const std::string&) { st.n_seeds_given = true; });
    casecmd->add_option("--output-dir", st.cfg.output_dir, "Output directory");
    casecmd->add_option("-o,--output", st.output_path, "Summary file path");

    // lets app-level --config appear after the subcommand name
    for (auto* cmd : {gen, solve, sweep, casecmd}) cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_generate(st);
        if (solve->parsed()) return cmd_solve(st);
        if (sweep->parsed()) return cmd_sweep(st);
        if (casecmd->parsed()) return cmd_case(st);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what()
                  << " (residual " << format_double(e.residual()) << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
