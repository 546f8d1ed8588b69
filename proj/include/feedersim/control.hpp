#ifndef FEEDERSIM_CONTROL_HPP
#define FEEDERSIM_CONTROL_HPP

#include <string>

#include "feedersim/model.hpp"
#include "feedersim/powerflow.hpp"

namespace feedersim {

/// What one inverter can see: its own node's consumption and generation.
/// The control laws take nothing else (no voltages, no neighbor state), so
/// equity along the line is structural.
struct LocalMeasurement {
    double p_g_w = 0.0;
    double p_c_w = 0.0;
    double q_c_var = 0.0;
    double s_va = 0.0;
};

enum class Scheme { none, loss, voltage, hybrid };

/// Multiplier applied to (p_c - p_g) inside the voltage-flattening law.
/// paper_literal uses 1/alpha; drop_nulling uses alpha, which makes the
/// per-link drop r_j P_j + x_j Q_j vanish exactly when the clamp is slack.
enum class CoeffMode { paper_literal, drop_nulling };

struct ControlConfig {
    Scheme scheme = Scheme::none;
    double k = 0.0;                                  // hybrid weight
    CoeffMode coeff_mode = CoeffMode::paper_literal;
    double alpha = 0.33 / 0.38;                      // feeder r/x ratio
    double epsilon = 0.05;                           // voltage-quality bound

    void validate() const; // throws ValidationError
};

std::string to_string(Scheme s);
std::string to_string(CoeffMode m);
Scheme scheme_from_string(const std::string& s);
CoeffMode coeff_mode_from_string(const std::string& s);

/// sqrt(s^2 - p_g^2): the reactive headroom of an inverter running at p_g.
/// Rejects p_g > s.
double reactive_capability_var(double s_va, double p_g_w);

/// Clamp to [-q_max, q_max], sign-preserving.
double constr(double q_var, double q_max_var);

/// Loss-oriented law: cancel the node's own reactive consumption.
double control_loss(const LocalMeasurement& m);

/// Voltage-oriented law: additionally serve the adjacent links' reactive
/// needs via the coeff_mode multiplier on (p_c - p_g).
double control_voltage(const LocalMeasurement& m, const ControlConfig& cfg);

/// K-blend of the two clamped laws, clamped again:
/// constr(K * F_L + (1 - K) * F_V). K = 1 recovers control_loss, K = 0
/// control_voltage; K outside [0, 1] extrapolates.
double control_hybrid(const LocalMeasurement& m, const ControlConfig& cfg);

/// Evaluates the configured scheme at every node. Scheme none is the
/// zero-injection baseline. Output always satisfies the capability bound.
Injection apply_control(const Feeder& feeder, const ControlConfig& cfg);

/// Feeder-wide r/x ratio: sum of r over sum of x. For generated feeders
/// this equals r_per_km / x_per_km by construction.
double feeder_alpha(const Feeder& feeder);

/// True when every line's r/x is within rel_tol of the feeder-wide ratio.
/// The voltage law assumes a nearly constant ratio; callers should warn
/// when this fails.
bool has_uniform_impedance_ratio(const Feeder& feeder, double rel_tol = 0.01);

} // namespace feedersim

#endif
