#include "feedersim/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "feedersim/errors.hpp"
#include "feedersim/rng.hpp"

namespace feedersim {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

} // namespace

void Feeder::validate() const {
    require(v0_volts > 0.0, "feeder: v0 must be > 0");
    require(lines.size() == nodes.size(),
            "feeder: line count must equal node count (radial chain)");
    for (std::size_t j = 0; j < lines.size(); ++j) {
        const auto& l = lines[j];
        if (!(l.length_km > 0.0 && l.r_ohm > 0.0 && l.x_ohm > 0.0)) {
            throw ValidationError("feeder: line " + std::to_string(j) +
                                  " must have positive length, r, x");
        }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.p_c_w < 0.0 || n.q_c_var < 0.0 || n.p_g_w < 0.0 || n.s_va < 0.0) {
            throw ValidationError("feeder: node " + std::to_string(i + 1) +
                                  " has a negative field");
        }
        if (n.p_g_w > n.s_va) {
            throw ValidationError("feeder: node " + std::to_string(i + 1) +
                                  " has p_g > s (exceeds inverter rating)");
        }
    }
}

void ScenarioSpec::validate() const {
    require(node_count >= 1, "spec.node_count: must be >= 1");
    require(spacing_min_km > 0.0, "spec.spacing_min: must be > 0");
    require(spacing_min_km <= spacing_max_km,
            "spec.spacing_min: must be <= spacing_max");
    require(r_per_km > 0.0, "spec.r_per_km: must be > 0");
    require(x_per_km > 0.0, "spec.x_per_km: must be > 0");
    require(v0_volts > 0.0, "spec.v0: must be > 0");
    require(p_c_max_w >= 0.0, "spec.p_c_max: must be >= 0");
    require(q_c_ratio_min >= 0.0, "spec.q_c_ratio_min: must be >= 0");
    require(q_c_ratio_min <= q_c_ratio_max,
            "spec.q_c_ratio_min: must be <= q_c_ratio_max");
    require(penetration >= 0.0 && penetration <= 1.0,
            "spec.penetration: must lie in [0, 1]");
    require(p_g_w >= 0.0, "spec.p_g: must be >= 0");
    require(s_va >= 0.0, "spec.s: must be >= 0");
    require(p_g_w <= s_va, "spec.p_g: must be <= spec.s (inverter rating)");
}

Feeder build_topology(const ScenarioSpec& spec) {
    spec.validate();
    Rng topo(spec.topology_seed);

    Feeder f;
    f.v0_volts = spec.v0_volts;
    f.topology_seed = spec.topology_seed;
    f.load_seed = spec.load_seed;
    f.nodes.resize(static_cast<std::size_t>(spec.node_count));
    f.lines.reserve(static_cast<std::size_t>(spec.node_count));
    for (int j = 0; j < spec.node_count; ++j) {
        LineSegment l;
        l.length_km = topo.uniform(spec.spacing_min_km, spec.spacing_max_km);
        l.r_ohm = spec.r_per_km * l.length_km;
        l.x_ohm = spec.x_per_km * l.length_km;
        f.lines.push_back(l);
    }
    return f;
}

Feeder populate_loads_and_pv(const Feeder& topology, const ScenarioSpec& spec) {
    spec.validate();
    Rng load(spec.load_seed);

    Feeder f = topology;
    f.load_seed = spec.load_seed;
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = f.nodes[i];
        node.p_c_w = load.uniform(0.0, spec.p_c_max_w);
        const double u = load.uniform(spec.q_c_ratio_min, spec.q_c_ratio_max);
        node.q_c_var = u * node.p_c_w;
        node.p_g_w = 0.0;
        node.s_va = 0.0;
    }

    const auto pv_count = static_cast<std::size_t>(
        std::llround(spec.penetration * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    load.shuffle(order);
    for (std::size_t k = 0; k < pv_count; ++k) {
        f.nodes[order[k]].p_g_w = spec.p_g_w;
        f.nodes[order[k]].s_va = spec.s_va;
    }
    return f;
}

ScenarioSpec case_spec(int case_id) {
    if (case_id < 1 || case_id > 4) {
        throw ValidationError("case must be 1..4");
    }
    ScenarioSpec s;
    s.node_count = 250;
    s.spacing_min_km = 0.2;
    s.spacing_max_km = 0.3;
    s.r_per_km = 0.33;
    s.x_per_km = 0.38;
    s.v0_volts = 7200.0;
    s.q_c_ratio_min = 0.2;
    s.q_c_ratio_max = 0.3;
    s.s_va = 2200.0;
    switch (case_id) {
        case 1: s.penetration = 0.20; s.p_c_max_w = 2500.0; s.p_g_w = 1000.0; break;
        case 2: s.penetration = 0.20; s.p_c_max_w = 1000.0; s.p_g_w = 2000.0; break;
        case 3: s.penetration = 0.50; s.p_c_max_w = 2500.0; s.p_g_w = 1000.0; break;
        case 4: s.penetration = 0.50; s.p_c_max_w = 1000.0; s.p_g_w = 2000.0; break;
    }
    return s;
}

Feeder generate_feeder(const ScenarioSpec& spec) {
    return populate_loads_and_pv(build_topology(spec), spec);
}

std::string format_double(double value) {
    // %.17g always round-trips; prefer the shortest representation that
    // still does (e.g. "7200" over "7.2e+03").
    char buf[40];
    std::string best;
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        // on equal length the later candidate wins: "50000" over "5e+04"
        if (std::strtod(buf, nullptr) == value &&
            (best.empty() || std::char_traits<char>::length(buf) <= best.size())) {
            best = buf;
        }
    }
    return best.empty() ? buf : best;
}

namespace {

constexpr const char* kFeederMagic = "feedersim-feeder";
constexpr const char* kFeederVersion = "v1";
constexpr const char* kColumnHeader =
    "index length_km r_ohm x_ohm p_c_w q_c_var p_g_w s_va";

} // namespace

void write_feeder(std::ostream& out, const Feeder& feeder) {
    out << kFeederMagic << ' ' << kFeederVersion << '\n';
    out << "v0_volts " << format_double(feeder.v0_volts) << '\n';
    out << "topology_seed " << feeder.topology_seed << '\n';
    out << "load_seed " << feeder.load_seed << '\n';
    out << "case " << feeder.case_tag << '\n';
    out << "nodes " << feeder.size() << '\n';
    out << kColumnHeader << '\n';
    for (std::size_t i = 0; i < feeder.size(); ++i) {
        const auto& l = feeder.lines[i];
        const auto& n = feeder.nodes[i];
        out << (i + 1) << ' ' << format_double(l.length_km) << ' '
            << format_double(l.r_ohm) << ' ' << format_double(l.x_ohm) << ' '
            << format_double(n.p_c_w) << ' ' << format_double(n.q_c_var) << ' '
            << format_double(n.p_g_w) << ' ' << format_double(n.s_va) << '\n';
    }
}

void write_feeder_file(const std::string& path, const Feeder& feeder) {
    std::ofstream out(path, std::ios::binary); // binary: no newline translation
    if (!out) throw IoError("cannot open for writing: " + path);
    write_feeder(out, feeder);
    if (!out) throw IoError("write failed: " + path);
}

Feeder read_feeder(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != kFeederMagic) {
        throw IoError("not a feeder file (bad magic)");
    }
    if (version != kFeederVersion) {
        throw IoError("unsupported feeder file version: " + version);
    }

    Feeder f;
    std::size_t n = 0;
    std::string key;
    while (in >> key) {
        if (key == "v0_volts") in >> f.v0_volts;
        else if (key == "topology_seed") in >> f.topology_seed;
        else if (key == "load_seed") in >> f.load_seed;
        else if (key == "case") in >> f.case_tag;
        else if (key == "nodes") { in >> n; break; }
        else throw IoError("unexpected feeder header key: " + key);
        if (!in) throw IoError("malformed feeder header value for " + key);
    }
    if (!in) throw IoError("truncated feeder header");

    // consume the column-header line
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    if (line != kColumnHeader) throw IoError("bad feeder column header");

    f.nodes.resize(n);
    f.lines.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t index;
        auto& l = f.lines[i];
        auto& node = f.nodes[i];
        if (!(in >> index >> l.length_km >> l.r_ohm >> l.x_ohm >> node.p_c_w >>
              node.q_c_var >> node.p_g_w >> node.s_va)) {
            throw IoError("truncated feeder row " + std::to_string(i + 1));
        }
        if (index != i + 1) {
            throw IoError("feeder rows out of order at row " + std::to_string(i + 1));
        }
    }
    f.validate();
    return f;
}

Feeder read_feeder_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feeder file: " + path);
    return read_feeder(in);
}

} // namespace feedersim
