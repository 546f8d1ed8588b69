#ifndef FEEDERSIM_POWERFLOW_HPP
#define FEEDERSIM_POWERFLOW_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "feedersim/model.hpp"

namespace feedersim {

/// Controlled reactive generation, one entry per chain node (node j+1 at
/// index j). Must respect |q_g| <= sqrt(s^2 - p_g^2) node by node and be
/// zero wherever s == 0.
struct Injection {
    std::vector<double> q_g_var;

    static Injection zero(std::size_t n) { return Injection{std::vector<double>(n, 0.0)}; }
};

enum class ModelTag { linear, nonlinear };

std::string to_string(ModelTag tag);

/// Branch flows and node voltages for one operating point.
///
/// p_w[j], q_var[j]: complex power leaving node j toward node j+1
/// (j = 0..n-1; j = 0 is the substation link). Negative values mean
/// reverse flow toward the substation. v_volts[k] is the voltage of node
/// k = 0..n with v_volts[0] == the substation voltage exactly.
struct FlowSolution {
    ModelTag model = ModelTag::linear;
    std::vector<double> p_w;
    std::vector<double> q_var;
    std::vector<double> v_volts;
    int iterations = 0;      // nonlinear only
    double residual = 0.0;   // nonlinear only: last max relative voltage change
};

/// Linearized branch-flow solve: one backward cumulative-sum pass for the
/// flows, one forward pass for the voltages
///   V[j+1] = V[j] - (r_j P_j + x_j Q_j) / V0.
/// Loss terms are dropped, so flows conserve net extractions exactly.
/// No iteration; deterministic arithmetic.
FlowSolution solve_lindistflow(const Feeder& feeder, const Injection& inj);

/// Full branch-flow solve including the quadratic loss terms
/// r_j (P_j^2 + Q_j^2) / V_j^2, by backward/forward sweep:
/// the backward pass accumulates flows with loss terms taken from the
/// previous iterate, the forward pass updates squared voltages, and the
/// sweep repeats until the max per-node relative voltage change drops
/// below tol. Throws DivergenceError after max_iter sweeps (over-loaded
/// circuit near voltage collapse).
FlowSolution solve_distflow(const Feeder& feeder, const Injection& inj,
                            double tol = 1e-10, int max_iter = 100);

/// Thermal losses sum r_j (P_j^2 + Q_j^2) / V0^2 in watts. V0^2 is used
/// for both models so they are compared on the same functional.
double losses_w(const FlowSolution& sol, const Feeder& feeder);

struct VoltageDeviation {
    double value = 0.0;    // max_k |V_k - V0| / V0, per-unit
    std::size_t node = 0;  // arg-max node index (1..n), 0 for an empty chain
};

VoltageDeviation max_voltage_deviation(const FlowSolution& sol);

// --- solution export (version-tagged rows) ---

void write_solution(std::ostream& out, const FlowSolution& sol);
void write_solution_file(const std::string& path, const FlowSolution& sol);

} // namespace feedersim

#endif
