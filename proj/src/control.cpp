#include "feedersim/control.hpp"

#include <cmath>

#include "feedersim/errors.hpp"

namespace feedersim {

void ControlConfig::validate() const {
    if (!(alpha > 0.0)) throw ValidationError("control.alpha: must be > 0");
    if (!(epsilon > 0.0)) throw ValidationError("control.epsilon: must be > 0");
    if (!std::isfinite(k)) throw ValidationError("control.k: must be finite");
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::none: return "none";
        case Scheme::loss: return "loss";
        case Scheme::voltage: return "voltage";
        case Scheme::hybrid: return "hybrid";
    }
    return "none";
}

std::string to_string(CoeffMode m) {
    return m == CoeffMode::paper_literal ? "paper_literal" : "drop_nulling";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "none") return Scheme::none;
    if (s == "loss") return Scheme::loss;
    if (s == "voltage") return Scheme::voltage;
    if (s == "hybrid") return Scheme::hybrid;
    throw ValidationError("scheme: must be one of none|loss|voltage|hybrid, got '" + s + "'");
}

CoeffMode coeff_mode_from_string(const std::string& s) {
    if (s == "paper_literal") return CoeffMode::paper_literal;
    if (s == "drop_nulling") return CoeffMode::drop_nulling;
    throw ValidationError("coeff_mode: must be paper_literal|drop_nulling, got '" + s + "'");
}

double reactive_capability_var(double s_va, double p_g_w) {
    if (p_g_w < 0.0 || s_va < 0.0) {
        throw ValidationError("reactive_capability: s and p_g must be >= 0");
    }
    if (p_g_w > s_va) {
        throw ValidationError("reactive_capability: p_g exceeds inverter rating s");
    }
    return std::sqrt(s_va * s_va - p_g_w * p_g_w);
}

double constr(double q_var, double q_max_var) {
    if (q_max_var < 0.0) throw ValidationError("constr: q_max must be >= 0");
    if (std::abs(q_var) <= q_max_var) return q_var;
    return q_var < 0.0 ? -q_max_var : q_max_var;
}

double control_loss(const LocalMeasurement& m) {
    return constr(m.q_c_var, reactive_capability_var(m.s_va, m.p_g_w));
}

double control_voltage(const LocalMeasurement& m, const ControlConfig& cfg) {
    const double c =
        cfg.coeff_mode == CoeffMode::paper_literal ? 1.0 / cfg.alpha : cfg.alpha;
    return constr(m.q_c_var + c * (m.p_c_w - m.p_g_w),
                  reactive_capability_var(m.s_va, m.p_g_w));
}

double control_hybrid(const LocalMeasurement& m, const ControlConfig& cfg) {
    // inner terms are themselves clamped; the outer clamp matters for K
    // outside [0, 1]
    const double blend =
        cfg.k * control_loss(m) + (1.0 - cfg.k) * control_voltage(m, cfg);
    return constr(blend, reactive_capability_var(m.s_va, m.p_g_w));
}

Injection apply_control(const Feeder& feeder, const ControlConfig& cfg) {
    cfg.validate();
    Injection inj = Injection::zero(feeder.size());
    if (cfg.scheme == Scheme::none) return inj;

    for (std::size_t i = 0; i < feeder.size(); ++i) {
        const auto& n = feeder.nodes[i];
        const LocalMeasurement m{n.p_g_w, n.p_c_w, n.q_c_var, n.s_va};
        switch (cfg.scheme) {
            case Scheme::loss: inj.q_g_var[i] = control_loss(m); break;
            case Scheme::voltage: inj.q_g_var[i] = control_voltage(m, cfg); break;
            case Scheme::hybrid: inj.q_g_var[i] = control_hybrid(m, cfg); break;
            case Scheme::none: break;
        }
    }
    return inj;
}

double feeder_alpha(const Feeder& feeder) {
    double r_sum = 0.0, x_sum = 0.0;
    for (const auto& l : feeder.lines) {
        r_sum += l.r_ohm;
        x_sum += l.x_ohm;
    }
    if (!(x_sum > 0.0)) throw ValidationError("feeder_alpha: total reactance must be > 0");
    return r_sum / x_sum;
}

bool has_uniform_impedance_ratio(const Feeder& feeder, double rel_tol) {
    if (feeder.lines.empty()) return true;
    const double alpha = feeder_alpha(feeder);
    for (const auto& l : feeder.lines) {
        if (std::abs(l.r_ohm / l.x_ohm - alpha) > rel_tol * alpha) return false;
    }
    return true;
}

} // namespace feedersim
