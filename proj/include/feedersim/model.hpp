#ifndef FEEDERSIM_MODEL_HPP
#define FEEDERSIM_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace feedersim {

/// One chain segment. Line j connects node j to node j+1; line 0 connects
/// the substation (node 0) to node 1.
struct LineSegment {
    double length_km = 0.0;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
};

/// Per-node consumption, PV output and inverter rating. s_va == 0 marks a
/// node without PV; such a node can never generate reactive power.
struct NodeState {
    double p_c_w = 0.0;   // real consumption
    double q_c_var = 0.0; // reactive consumption
    double p_g_w = 0.0;   // PV real generation
    double s_va = 0.0;    // inverter apparent-power capability
};

/// A strictly radial feeder: substation (node 0, fixed voltage) followed by
/// a single chain of n nodes and n line segments. Immutable by convention
/// once built; safe to share across threads.
struct Feeder {
    double v0_volts = 0.0;
    std::vector<NodeState> nodes;  // nodes[i] is chain node i+1
    std::vector<LineSegment> lines; // lines[j] connects node j to j+1

    // provenance, carried into serialized files
    std::uint64_t topology_seed = 0;
    std::uint64_t load_seed = 0;
    std::string case_tag = "custom";

    std::size_t size() const noexcept { return nodes.size(); }

    /// Checks the structural invariants (chain shape, positive v0, field
    /// signs, p_g <= s). Throws ValidationError naming the violation.
    void validate() const;
};

/// Parameters of the stochastic rural-feeder generator.
struct ScenarioSpec {
    int node_count = 0;
    double spacing_min_km = 0.0;
    double spacing_max_km = 0.0;
    double r_per_km = 0.0;  // ohm/km
    double x_per_km = 0.0;  // ohm/km
    double v0_volts = 0.0;
    double p_c_max_w = 0.0;
    double q_c_ratio_min = 0.0;
    double q_c_ratio_max = 0.0;
    double penetration = 0.0; // fraction of nodes with PV, in [0,1]
    double p_g_w = 0.0;       // PV output at PV nodes
    double s_va = 0.0;        // inverter rating at PV nodes
    std::uint64_t topology_seed = 0;
    std::uint64_t load_seed = 0;

    void validate() const; // throws ValidationError
};

/// Builds the chain with random segment lengths (uniform in
/// [spacing_min, spacing_max], one draw per line in line order, from the
/// topology stream) and all node loads zeroed. Deterministic per seed.
Feeder build_topology(const ScenarioSpec& spec);

/// Fills loads and places PV, using the load stream. Draw order: for each
/// node in chain order, p_c ~ U(0, p_c_max) then u ~ U(ratio_min,
/// ratio_max) with q_c = u * p_c; then a Fisher-Yates shuffle of the node
/// indices selects round(penetration * n) PV nodes (first k of the
/// shuffled order), which receive p_g and s. Returns a new feeder;
/// the input topology is not modified.
Feeder populate_loads_and_pv(const Feeder& topology, const ScenarioSpec& spec);

/// The four studied parameterizations: 250 nodes, 0.2-0.3 km spacing,
/// (0.33 + 0.38i) ohm/km, 7.2 kV, q_c in [0.2, 0.3] of p_c, s = 2.2 kVA.
///
///   case    penetration   p_c_max   p_g
///     1         20%        2.5 kW   1.0 kW
///     2         20%        1.0 kW   2.0 kW
///     3         50%        2.5 kW   1.0 kW
///     4         50%        1.0 kW   2.0 kW
ScenarioSpec case_spec(int case_id);

/// Convenience: topology + loads in one call.
Feeder generate_feeder(const ScenarioSpec& spec);

// --- serialization (version-tagged, deterministic byte-for-byte) ---

void write_feeder(std::ostream& out, const Feeder& feeder);
void write_feeder_file(const std::string& path, const Feeder& feeder);
Feeder read_feeder(std::istream& in);
Feeder read_feeder_file(const std::string& path);

/// Shortest decimal form that round-trips the exact double value; used by
/// every writer so that re-runs are byte-identical.
std::string format_double(double value);

} // namespace feedersim

#endif
