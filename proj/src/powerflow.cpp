#include "feedersim/powerflow.hpp"

#include <cmath>
#include <fstream>

#include "feedersim/control.hpp"
#include "feedersim/errors.hpp"

namespace feedersim {

namespace {

// Checks sizes and the per-node capability bound. A tiny relative slack
// admits values that went through a text round-trip.
void check_injection(const Feeder& feeder, const Injection& inj) {
    if (inj.q_g_var.size() != feeder.size()) {
        throw ValidationError("injection: size does not match feeder node count");
    }
    for (std::size_t i = 0; i < feeder.size(); ++i) {
        const auto& n = feeder.nodes[i];
        const double q_max = reactive_capability_var(n.s_va, n.p_g_w);
        const double q = std::abs(inj.q_g_var[i]);
        if (q > q_max * (1.0 + 1e-12) + 1e-9) {
            throw ValidationError("injection: |q_g| exceeds inverter capability at node " +
                                  std::to_string(i + 1));
        }
    }
}

} // namespace

std::string to_string(ModelTag tag) {
    return tag == ModelTag::linear ? "linear" : "nonlinear";
}

FlowSolution solve_lindistflow(const Feeder& feeder, const Injection& inj) {
    feeder.validate();
    check_injection(feeder, inj);
    const std::size_t n = feeder.size();

    FlowSolution sol;
    sol.model = ModelTag::linear;
    sol.p_w.resize(n);
    sol.q_var.resize(n);
    sol.v_volts.resize(n + 1);

    // backward pass: P[j] aggregates the net extraction of nodes j+1..n
    double acc_p = 0.0, acc_q = 0.0;
    for (std::size_t j = n; j-- > 0;) {
        const auto& node = feeder.nodes[j];
        acc_p += node.p_c_w - node.p_g_w;
        acc_q += node.q_c_var - inj.q_g_var[j];
        sol.p_w[j] = acc_p;
        sol.q_var[j] = acc_q;
    }

    // forward pass: voltage drops against the fixed substation voltage
    const double v0 = feeder.v0_volts;
    sol.v_volts[0] = v0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& l = feeder.lines[j];
        sol.v_volts[j + 1] =
            sol.v_volts[j] - (l.r_ohm * sol.p_w[j] + l.x_ohm * sol.q_var[j]) / v0;
    }
    return sol;
}

FlowSolution solve_distflow(const Feeder& feeder, const Injection& inj,
                            double tol, int max_iter) {
    feeder.validate();
    check_injection(feeder, inj);
    if (!(tol > 0.0)) throw ValidationError("distflow: tol must be > 0");
    if (max_iter < 1) throw ValidationError("distflow: max_iter must be >= 1");
    const std::size_t n = feeder.size();
    const double v0 = feeder.v0_volts;

    FlowSolution sol;
    sol.model = ModelTag::nonlinear;
    sol.p_w.assign(n, 0.0);
    sol.q_var.assign(n, 0.0);
    sol.v_volts.assign(n + 1, v0); // flat start

    std::vector<double> v_prev(n + 1, v0);
    double change = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        // backward: accumulate flows; loss terms use the previous iterate
        double acc_p = 0.0, acc_q = 0.0;
        for (std::size_t j = n; j-- > 0;) {
            const auto& node = feeder.nodes[j];
            const auto& l = feeder.lines[j];
            const double vj2 = sol.v_volts[j] * sol.v_volts[j];
            const double loss = (sol.p_w[j] * sol.p_w[j] + sol.q_var[j] * sol.q_var[j]) / vj2;
            acc_p += node.p_c_w - node.p_g_w + l.r_ohm * loss;
            acc_q += node.q_c_var - inj.q_g_var[j] + l.x_ohm * loss;
            sol.p_w[j] = acc_p;
            sol.q_var[j] = acc_q;
        }

        // forward: V_{j+1}^2 = V_j^2 - 2(r P + x Q) + (r^2 + x^2)(P^2 + Q^2)/V_j^2
        v_prev = sol.v_volts;
        change = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto& l = feeder.lines[j];
            const double vj = sol.v_volts[j];
            const double flow2 = sol.p_w[j] * sol.p_w[j] + sol.q_var[j] * sol.q_var[j];
            const double v2 = vj * vj -
                              2.0 * (l.r_ohm * sol.p_w[j] + l.x_ohm * sol.q_var[j]) +
                              (l.r_ohm * l.r_ohm + l.x_ohm * l.x_ohm) * flow2 / (vj * vj);
            if (!(v2 > 0.0)) {
                throw DivergenceError("distflow: voltage collapse at node " +
                                          std::to_string(j + 1),
                                      change, it);
            }
            sol.v_volts[j + 1] = std::sqrt(v2);
            change = std::max(change,
                              std::abs(sol.v_volts[j + 1] - v_prev[j + 1]) / v0);
        }

        sol.iterations = it;
        sol.residual = change;
        if (change < tol) return sol;
    }
    throw DivergenceError("distflow: no convergence after " +
                              std::to_string(max_iter) + " iterations",
                          change, max_iter);
}

double losses_w(const FlowSolution& sol, const Feeder& feeder) {
    const std::size_t n = feeder.size();
    if (sol.p_w.size() != n || sol.q_var.size() != n || sol.v_volts.size() != n + 1) {
        throw ValidationError("losses: solution does not match feeder size");
    }
    const double v0sq = feeder.v0_volts * feeder.v0_volts;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sum += feeder.lines[j].r_ohm *
               (sol.p_w[j] * sol.p_w[j] + sol.q_var[j] * sol.q_var[j]);
    }
    return sum / v0sq;
}

VoltageDeviation max_voltage_deviation(const FlowSolution& sol) {
    VoltageDeviation dev;
    if (sol.v_volts.empty()) return dev;
    const double v0 = sol.v_volts[0];
    for (std::size_t k = 1; k < sol.v_volts.size(); ++k) {
        const double d = std::abs(sol.v_volts[k] - v0) / v0;
        if (d > dev.value) {
            dev.value = d;
            dev.node = k;
        }
    }
    return dev;
}

namespace {
constexpr const char* kSolutionMagic = "feedersim-solution";
constexpr const char* kSolutionVersion = "v1";
} // namespace

void write_solution(std::ostream& out, const FlowSolution& sol) {
    const std::size_t n = sol.p_w.size();
    out << kSolutionMagic << ' ' << kSolutionVersion << '\n';
    out << "model_tag " << to_string(sol.model) << '\n';
    out << "iterations " << sol.iterations << '\n';
    out << "residual " << format_double(sol.residual) << '\n';
    out << "nodes " << n << '\n';
    out << "node_index v_volts p_w_outgoing q_var_outgoing\n";
    for (std::size_t k = 0; k <= n; ++k) {
        const double p = k < n ? sol.p_w[k] : 0.0; // nothing flows beyond the last node
        const double q = k < n ? sol.q_var[k] : 0.0;
        out << k << ' ' << format_double(sol.v_volts[k]) << ' ' << format_double(p)
            << ' ' << format_double(q) << '\n';
    }
}

void write_solution_file(const std::string& path, const FlowSolution& sol) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_solution(out, sol);
    if (!out) throw IoError("write failed: " + path);
}

} // namespace feedersim
