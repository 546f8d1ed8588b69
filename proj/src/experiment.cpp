#include "feedersim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "feedersim/errors.hpp"

namespace feedersim {

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

SummaryStat summarize(const std::vector<double>& xs) {
    SummaryStat s;
    const auto n = xs.size();
    if (n == 0) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(n);
    if (n >= 2) {
        double sq = 0.0;
        for (double x : xs) sq += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(n - 1));
    }
    return s;
}

std::size_t argmin(const std::vector<double>& xs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] < xs[best]) best = i;
    }
    return best;
}

} // namespace

Metrics evaluate(const Feeder& feeder, const ControlConfig& cfg, ModelTag model) {
    const Injection inj = apply_control(feeder, cfg);
    const FlowSolution sol = model == ModelTag::linear
                                 ? solve_lindistflow(feeder, inj)
                                 : solve_distflow(feeder, inj);
    return Metrics{losses_w(sol, feeder), max_voltage_deviation(sol).value};
}

std::vector<std::size_t> pareto_front(const std::vector<SweepPoint>& points) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& a = points[i];
        if (!a.valid) continue;
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
            if (j == i || !points[j].valid) continue;
            const auto& b = points[j];
            dominated = b.rel_losses <= a.rel_losses && b.delta_v <= a.delta_v &&
                        (b.rel_losses < a.rel_losses || b.delta_v < a.delta_v);
        }
        if (!dominated) front.push_back(i);
    }
    return front;
}

SweepResult sweep_k(const Feeder& feeder, double k_min, double k_max, int steps,
                    const ControlConfig& cfg_base, ModelTag model) {
    if (steps < 2) throw ValidationError("sweep: steps must be >= 2");
    if (!(k_min < k_max)) throw ValidationError("sweep: k_min must be < k_max");

    SweepResult result;
    result.topology_seed = feeder.topology_seed;
    result.load_seed = feeder.load_seed;
    result.case_tag = feeder.case_tag;
    result.coeff_mode = cfg_base.coeff_mode;

    ControlConfig cfg = cfg_base;
    cfg.scheme = Scheme::none;
    const Metrics base = evaluate(feeder, cfg, model);
    result.baseline_losses_w = base.losses_w;
    result.baseline_delta_v = base.delta_v;

    cfg.scheme = Scheme::hybrid;
    result.points.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        SweepPoint pt;
        pt.k = k_min + (k_max - k_min) * static_cast<double>(i) /
                           static_cast<double>(steps - 1);
        cfg.k = pt.k;
        try {
            const Metrics m = evaluate(feeder, cfg, model);
            pt.losses_w = m.losses_w;
            pt.delta_v = m.delta_v;
            if (base.losses_w > 0.0) {
                pt.rel_losses = m.losses_w / base.losses_w;
            } else {
                pt.rel_losses = m.losses_w == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
            }
        } catch (const DivergenceError&) {
            pt.valid = false;
            pt.losses_w = pt.rel_losses = pt.delta_v = nan_value();
        }
        result.points.push_back(pt);
    }
    result.pareto = pareto_front(result.points);
    return result;
}

std::size_t AggregateCurve::argmin_rel_losses() const { return argmin(rel_losses); }
std::size_t AggregateCurve::argmin_delta_v() const { return argmin(delta_v); }

CaseRun run_case(int case_id, int n_seeds, int steps, const RunCaseOptions& opts) {
    CaseRun run = run_ensemble(case_spec(case_id), std::to_string(case_id), n_seeds,
                               steps, opts);
    run.stats.case_id = case_id;
    return run;
}

CaseRun run_ensemble(const ScenarioSpec& scenario, const std::string& case_tag,
                     int n_seeds, int steps, const RunCaseOptions& opts) {
    if (n_seeds < 1) throw ValidationError("run_case: n_seeds must be >= 1");
    ScenarioSpec spec = scenario;
    spec.topology_seed = opts.topology_seed;

    const Feeder topology = build_topology(spec);

    ControlConfig cfg_base;
    cfg_base.coeff_mode = opts.coeff_mode;
    cfg_base.alpha = feeder_alpha(topology);
    cfg_base.epsilon = opts.epsilon;

    CaseRun run;
    run.sweeps.reserve(static_cast<std::size_t>(n_seeds));
    std::vector<double> l0s, dv0s, min_rel, min_dv, k_at_min_rel, k_at_min_dv;

    for (int i = 0; i < n_seeds; ++i) {
        spec.load_seed = opts.load_seed0 + static_cast<std::uint64_t>(i);
        Feeder feeder = populate_loads_and_pv(topology, spec);
        feeder.case_tag = case_tag;
        SweepResult sweep =
            sweep_k(feeder, opts.k_min, opts.k_max, steps, cfg_base, opts.model);

        l0s.push_back(sweep.baseline_losses_w);
        dv0s.push_back(sweep.baseline_delta_v);
        std::size_t best_l = 0, best_v = 0;
        bool have_valid = false;
        for (std::size_t p = 0; p < sweep.points.size(); ++p) {
            if (!sweep.points[p].valid) continue;
            if (!have_valid) {
                best_l = best_v = p;
                have_valid = true;
                continue;
            }
            if (sweep.points[p].rel_losses < sweep.points[best_l].rel_losses) best_l = p;
            if (sweep.points[p].delta_v < sweep.points[best_v].delta_v) best_v = p;
        }
        if (!have_valid) {
            throw DivergenceError("run_case: every sweep point failed for load seed " +
                                      std::to_string(spec.load_seed),
                                  0.0, 0);
        }
        min_rel.push_back(sweep.points[best_l].rel_losses);
        k_at_min_rel.push_back(sweep.points[best_l].k);
        min_dv.push_back(sweep.points[best_v].delta_v);
        k_at_min_dv.push_back(sweep.points[best_v].k);
        run.sweeps.push_back(std::move(sweep));
    }

    auto& agg = run.aggregate;
    const std::size_t np = run.sweeps.front().points.size();
    agg.k.resize(np);
    agg.losses_w.assign(np, 0.0);
    agg.rel_losses.assign(np, 0.0);
    agg.delta_v.assign(np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        agg.k[p] = run.sweeps.front().points[p].k;
        for (const auto& sweep : run.sweeps) {
            // a single invalid member makes the aggregate point NaN
            agg.losses_w[p] += sweep.points[p].losses_w;
            agg.rel_losses[p] += sweep.points[p].rel_losses;
            agg.delta_v[p] += sweep.points[p].delta_v;
        }
        agg.losses_w[p] /= static_cast<double>(n_seeds);
        agg.rel_losses[p] /= static_cast<double>(n_seeds);
        agg.delta_v[p] /= static_cast<double>(n_seeds);
    }

    auto& st = run.stats;
    st.case_id = 0;
    st.n_seeds = n_seeds;
    st.stds_defined = n_seeds >= 2;
    st.l0_w = summarize(l0s);
    st.delta_v0 = summarize(dv0s);
    st.min_rel_losses = summarize(min_rel);
    st.min_delta_v = summarize(min_dv);
    st.argmin_k_losses = summarize(k_at_min_rel);
    st.argmin_k_delta_v = summarize(k_at_min_dv);
    return run;
}

BenchmarkTargets benchmark_targets(int case_id) {
    switch (case_id) {
        case 1: return {0.059, 7840.0, 0.93};
        case 2: return {0.014, 330.0, 0.67};
        case 3: return {0.048, 4660.0, 0.86};
        case 4: return {0.014, 1890.0, 0.94};
        default: throw ValidationError("case must be 1..4");
    }
}

bool within_benchmark_tolerances(const CaseRun& run) {
    const BenchmarkTargets t = benchmark_targets(run.stats.case_id);
    const double min_rel = run.aggregate.rel_losses[run.aggregate.argmin_rel_losses()];
    return std::abs(run.stats.delta_v0.mean - t.delta_v0) <= kBaselineRelTol * t.delta_v0 &&
           std::abs(run.stats.l0_w.mean - t.l0_w) <= kBaselineRelTol * t.l0_w &&
           std::abs(min_rel - t.min_rel_losses) <= kMinRelLossAbsTol;
}

namespace {

void write_sweep_header(std::ostream& out, double l0, double dv0,
                        const std::string& seeds, const std::string& case_tag,
                        CoeffMode mode) {
    out << "# L0_w=" << format_double(l0) << '\n';
    out << "# delta_v0=" << format_double(dv0) << '\n';
    out << "# seeds=" << seeds << '\n';
    out << "# case=" << case_tag << '\n';
    out << "# coeff_mode=" << to_string(mode) << '\n';
    out << "k,losses_w,rel_losses,delta_v,pareto\n";
}

void write_point_row(std::ostream& out, double k, double losses, double rel,
                     double dv, bool on_front) {
    out << format_double(k) << ',' << format_double(losses) << ','
        << format_double(rel) << ',' << format_double(dv) << ','
        << (on_front ? 1 : 0) << '\n';
}

template <typename WriteFn>
void to_file(const std::string& path, WriteFn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    fn(out);
    if (!out) throw IoError("write failed: " + path);
}

} // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    write_sweep_header(out, result.baseline_losses_w, result.baseline_delta_v,
                       std::to_string(result.topology_seed) + "," +
                           std::to_string(result.load_seed),
                       result.case_tag, result.coeff_mode);
    std::vector<bool> on_front(result.points.size(), false);
    for (std::size_t idx : result.pareto) on_front[idx] = true;
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& pt = result.points[i];
        write_point_row(out, pt.k, pt.losses_w, pt.rel_losses, pt.delta_v, on_front[i]);
    }
}

void write_sweep_csv_file(const std::string& path, const SweepResult& result) {
    to_file(path, [&](std::ostream& out) { write_sweep_csv(out, result); });
}

void write_aggregate_csv(std::ostream& out, const CaseRun& run,
                         const RunCaseOptions& opts, const std::string& case_tag) {
    const auto& agg = run.aggregate;
    const std::string seeds =
        std::to_string(opts.topology_seed) + "," + std::to_string(opts.load_seed0) +
        ".." + std::to_string(opts.load_seed0 +
                              static_cast<std::uint64_t>(run.stats.n_seeds) - 1);
    write_sweep_header(out, run.stats.l0_w.mean, run.stats.delta_v0.mean, seeds,
                       case_tag, opts.coeff_mode);

    // pareto over the aggregate curve itself
    std::vector<SweepPoint> pts(agg.k.size());
    for (std::size_t i = 0; i < agg.k.size(); ++i) {
        pts[i].k = agg.k[i];
        pts[i].losses_w = agg.losses_w[i];
        pts[i].rel_losses = agg.rel_losses[i];
        pts[i].delta_v = agg.delta_v[i];
        pts[i].valid = std::isfinite(agg.rel_losses[i]) && std::isfinite(agg.delta_v[i]);
    }
    std::vector<bool> on_front(pts.size(), false);
    for (std::size_t idx : pareto_front(pts)) on_front[idx] = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        write_point_row(out, pts[i].k, pts[i].losses_w, pts[i].rel_losses,
                        pts[i].delta_v, on_front[i]);
    }
}

void write_aggregate_csv_file(const std::string& path, const CaseRun& run,
                              const RunCaseOptions& opts, const std::string& case_tag) {
    to_file(path, [&](std::ostream& out) { write_aggregate_csv(out, run, opts, case_tag); });
}

void write_case_summary(std::ostream& out, const CaseRun& run,
                        const RunCaseOptions& opts, int steps) {
    const auto& st = run.stats;
    const auto& agg = run.aggregate;
    const std::size_t il = agg.argmin_rel_losses();
    const std::size_t iv = agg.argmin_delta_v();

    out << "feedersim-case-summary v1\n";
    out << "case " << (st.case_id > 0 ? std::to_string(st.case_id) : "custom") << '\n';
    out << "n_seeds " << st.n_seeds << '\n';
    out << "steps " << steps << '\n';
    out << "k_min " << format_double(opts.k_min) << '\n';
    out << "k_max " << format_double(opts.k_max) << '\n';
    out << "topology_seed " << opts.topology_seed << '\n';
    out << "load_seed0 " << opts.load_seed0 << '\n';
    out << "coeff_mode " << to_string(opts.coeff_mode) << '\n';
    out << "model " << to_string(opts.model) << '\n';
    out << "stds_defined " << (st.stds_defined ? 1 : 0) << '\n';
    const auto stat = [&](const char* name, const SummaryStat& s) {
        out << "mean_" << name << ' ' << format_double(s.mean) << '\n';
        out << "std_" << name << ' '
            << (st.stds_defined ? format_double(s.stddev) : "undefined") << '\n';
    };
    stat("l0_w", st.l0_w);
    stat("delta_v0", st.delta_v0);
    stat("min_rel_losses", st.min_rel_losses);
    stat("min_delta_v", st.min_delta_v);
    stat("argmin_k_losses", st.argmin_k_losses);
    stat("argmin_k_delta_v", st.argmin_k_delta_v);
    out << "agg_min_rel_losses " << format_double(agg.rel_losses[il]) << '\n';
    out << "agg_argmin_k_losses " << format_double(agg.k[il]) << '\n';
    out << "agg_min_delta_v " << format_double(agg.delta_v[iv]) << '\n';
    out << "agg_argmin_k_delta_v " << format_double(agg.k[iv]) << '\n';
    if (st.case_id > 0) {
        out << "benchmark_within_tolerance "
            << (within_benchmark_tolerances(run) ? 1 : 0) << '\n';
    }
}

void write_case_summary_file(const std::string& path, const CaseRun& run,
                             const RunCaseOptions& opts, int steps) {
    to_file(path, [&](std::ostream& out) { write_case_summary(out, run, opts, steps); });
}

} // namespace feedersim
