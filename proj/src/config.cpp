#include "feedersim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "feedersim/errors.hpp"

namespace feedersim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ValidationError(key + ": not a number: '" + v + "'");
    }
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ValidationError(key + ": not an integer: '" + v + "'");
    }
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ValidationError(key + ": not an unsigned integer: '" + v + "'");
    }
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ValidationError(key + ": not a boolean: '" + v + "'");
}

const std::set<std::string> kScenarioShapeKeys = {
    "node_count", "spacing_min", "spacing_max", "r_per_km", "x_per_km",
    "v0", "p_c_max", "q_c_ratio_min", "q_c_ratio_max", "penetration",
    "p_g", "s"};

const std::set<std::string> kAllKeys = [] {
    std::set<std::string> keys = kScenarioShapeKeys;
    for (const char* k :
         {"case_id", "topology_seed", "load_seed", "scheme", "k", "coeff_mode",
          "epsilon", "k_min", "k_max", "steps", "refine", "model", "n_seeds",
          "output_dir", "format"}) {
        keys.insert(k);
    }
    return keys;
}();

} // namespace

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kAllKeys.count(key)) {
            throw ValidationError("config: unknown key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

ModelTag model_from_string(const std::string& s) {
    if (s == "linear") return ModelTag::linear;
    if (s == "nonlinear") return ModelTag::nonlinear;
    throw ValidationError("model: must be linear|nonlinear, got '" + s + "'");
}

RunConfig config_from_map(const std::map<std::string, std::string>& kv) {
    RunConfig c;
    for (const auto& [key, value] : kv) {
        if (!kAllKeys.count(key)) {
            throw ValidationError("config: unknown key '" + key + "'");
        }
        if (key == "case_id") c.case_id = static_cast<int>(to_int(key, value));
        else if (key == "node_count") c.scenario.node_count = static_cast<int>(to_int(key, value));
        else if (key == "spacing_min") c.scenario.spacing_min_km = to_double(key, value);
        else if (key == "spacing_max") c.scenario.spacing_max_km = to_double(key, value);
        else if (key == "r_per_km") c.scenario.r_per_km = to_double(key, value);
        else if (key == "x_per_km") c.scenario.x_per_km = to_double(key, value);
        else if (key == "v0") c.scenario.v0_volts = to_double(key, value);
        else if (key == "p_c_max") c.scenario.p_c_max_w = to_double(key, value);
        else if (key == "q_c_ratio_min") c.scenario.q_c_ratio_min = to_double(key, value);
        else if (key == "q_c_ratio_max") c.scenario.q_c_ratio_max = to_double(key, value);
        else if (key == "penetration") c.scenario.penetration = to_double(key, value);
        else if (key == "p_g") c.scenario.p_g_w = to_double(key, value);
        else if (key == "s") c.scenario.s_va = to_double(key, value);
        else if (key == "topology_seed") c.topology_seed = to_u64(key, value);
        else if (key == "load_seed") c.load_seed = to_u64(key, value);
        else if (key == "scheme") c.scheme = scheme_from_string(value);
        else if (key == "k") c.k = to_double(key, value);
        else if (key == "coeff_mode") c.coeff_mode = coeff_mode_from_string(value);
        else if (key == "epsilon") c.epsilon = to_double(key, value);
        else if (key == "k_min") c.k_min = to_double(key, value);
        else if (key == "k_max") c.k_max = to_double(key, value);
        else if (key == "steps") c.steps = static_cast<int>(to_int(key, value));
        else if (key == "refine") c.refine = to_bool(key, value);
        else if (key == "model") c.model = model_from_string(value);
        else if (key == "n_seeds") c.n_seeds = static_cast<int>(to_int(key, value));
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "format") c.format = value;

        if (kScenarioShapeKeys.count(key)) c.scenario_shape_set = true;
    }
    return c;
}

ScenarioSpec RunConfig::make_scenario() const {
    validate();
    ScenarioSpec spec = case_id ? case_spec(*case_id) : scenario;
    spec.topology_seed = topology_seed;
    spec.load_seed = load_seed;
    spec.validate();
    return spec;
}

void RunConfig::validate() const {
    if (case_id && scenario_shape_set) {
        throw ValidationError(
            "config: case_id and custom scenario fields are mutually exclusive");
    }
    if (!case_id && !scenario_shape_set) {
        throw ValidationError("config: either case_id or a custom scenario is required");
    }
    if (case_id && (*case_id < 1 || *case_id > 4)) {
        throw ValidationError("case must be 1..4");
    }
    if (n_seeds < 1) throw ValidationError("n_seeds: must be >= 1");
    if (format != "csv" && format != "structured") {
        throw ValidationError("format: must be csv|structured, got '" + format + "'");
    }
}

} // namespace feedersim
