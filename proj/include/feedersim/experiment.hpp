#ifndef FEEDERSIM_EXPERIMENT_HPP
#define FEEDERSIM_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "feedersim/control.hpp"
#include "feedersim/model.hpp"
#include "feedersim/powerflow.hpp"

namespace feedersim {

struct Metrics {
    double losses_w = 0.0;
    double delta_v = 0.0;
};

/// Single source of truth for every experiment number: control law ->
/// solver -> metrics. Propagates DivergenceError from the nonlinear solver.
Metrics evaluate(const Feeder& feeder, const ControlConfig& cfg, ModelTag model);

/// One K grid point. An invalid point records a solver failure; its
/// metric fields are NaN and it never enters the Pareto set.
struct SweepPoint {
    double k = 0.0;
    double losses_w = 0.0;
    double rel_losses = 0.0; // losses / baseline losses of the same feeder
    double delta_v = 0.0;
    bool valid = true;
};

struct SweepResult {
    std::uint64_t topology_seed = 0;
    std::uint64_t load_seed = 0;
    std::string case_tag = "custom";
    CoeffMode coeff_mode = CoeffMode::paper_literal;
    double baseline_losses_w = 0.0; // L0: scheme none
    double baseline_delta_v = 0.0;  // delta V0
    std::vector<SweepPoint> points; // ordered by K ascending
    std::vector<std::size_t> pareto; // indices into points, K order
};

/// Indices of the points not dominated in the (rel_losses, delta_v) plane.
/// A point dominates another when it is no worse in both coordinates and
/// strictly better in one. Invalid points are skipped.
std::vector<std::size_t> pareto_front(const std::vector<SweepPoint>& points);

/// Baseline (scheme none) once, then the hybrid law at `steps` evenly
/// spaced K values covering [k_min, k_max] inclusive. cfg_base supplies
/// coeff_mode, alpha and epsilon; its scheme and k fields are ignored.
SweepResult sweep_k(const Feeder& feeder, double k_min, double k_max, int steps,
                    const ControlConfig& cfg_base, ModelTag model = ModelTag::linear);

struct SummaryStat {
    double mean = 0.0;
    double stddev = 0.0; // sample std dev; 0 and flagged undefined when n < 2
};

struct CaseStats {
    int case_id = 0;
    int n_seeds = 0;
    bool stds_defined = false;
    SummaryStat l0_w;               // baseline losses
    SummaryStat delta_v0;           // baseline voltage deviation
    SummaryStat min_rel_losses;     // per-seed minimum over the K grid
    SummaryStat min_delta_v;
    SummaryStat argmin_k_losses;    // K at the per-seed loss minimum
    SummaryStat argmin_k_delta_v;
};

/// Seed-averaged sweep curves (pointwise mean over the ensemble at each K).
struct AggregateCurve {
    std::vector<double> k;
    std::vector<double> losses_w;
    std::vector<double> rel_losses;
    std::vector<double> delta_v;

    std::size_t argmin_rel_losses() const;
    std::size_t argmin_delta_v() const;
};

struct RunCaseOptions {
    std::uint64_t topology_seed = 1;
    std::uint64_t load_seed0 = 100; // member i uses load_seed0 + i
    double k_min = -5.0;
    double k_max = 10.0;
    CoeffMode coeff_mode = CoeffMode::paper_literal;
    ModelTag model = ModelTag::linear;
    double epsilon = 0.05;
};

struct CaseRun {
    CaseStats stats;
    AggregateCurve aggregate;
    std::vector<SweepResult> sweeps; // one per ensemble member
};

/// Builds one topology (fixed topology seed), draws n_seeds load/PV
/// realizations, sweeps each, and aggregates. Deterministic per
/// (case_id, seeds, steps).
CaseRun run_case(int case_id, int n_seeds, int steps, const RunCaseOptions& opts = {});

/// Same ensemble protocol for an arbitrary scenario shape. The seeds in
/// opts override the ones in spec; stats.case_id is 0 for a custom shape.
CaseRun run_ensemble(const ScenarioSpec& spec, const std::string& case_tag,
                     int n_seeds, int steps, const RunCaseOptions& opts = {});

/// Reference metrics the regression gate compares against, one row per
/// canonical case: expected baseline deviation/losses and the best
/// relative losses over the K sweep.
struct BenchmarkTargets {
    double delta_v0 = 0.0;
    double l0_w = 0.0;
    double min_rel_losses = 0.0;
};
BenchmarkTargets benchmark_targets(int case_id);

/// Gate tolerances: baselines within +-20% relative, sweep minimum within
/// +-0.05 absolute.
inline constexpr double kBaselineRelTol = 0.20;
inline constexpr double kMinRelLossAbsTol = 0.05;

/// True when the ensemble means of a finished case run sit inside the gate
/// tolerances against benchmark_targets (baselines, and the minimum of the
/// aggregate relative-loss curve).
bool within_benchmark_tolerances(const CaseRun& run);

// --- exports (deterministic byte-for-byte; no timestamps) ---

/// CSV with header `k,losses_w,rel_losses,delta_v,pareto` preceded by
/// `# key=value` comment lines (L0_w, delta_v0, seeds, case, coeff_mode).
/// Invalid points carry nan metrics and pareto=0.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_csv_file(const std::string& path, const SweepResult& result);

/// Same table layout for the seed-averaged curves; the seeds comment shows
/// the load-seed range.
void write_aggregate_csv(std::ostream& out, const CaseRun& run,
                         const RunCaseOptions& opts, const std::string& case_tag);
void write_aggregate_csv_file(const std::string& path, const CaseRun& run,
                              const RunCaseOptions& opts, const std::string& case_tag);

/// Flat key-value summary of CaseStats plus the aggregate-curve minima.
void write_case_summary(std::ostream& out, const CaseRun& run,
                        const RunCaseOptions& opts, int steps);
void write_case_summary_file(const std::string& path, const CaseRun& run,
                             const RunCaseOptions& opts, int steps);

} // namespace feedersim

#endif
