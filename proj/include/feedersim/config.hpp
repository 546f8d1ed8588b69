#ifndef FEEDERSIM_CONFIG_HPP
#define FEEDERSIM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "feedersim/control.hpp"
#include "feedersim/experiment.hpp"
#include "feedersim/model.hpp"

namespace feedersim {

/// Everything a run needs, collected from a config file and/or flags.
/// Exactly one of case_id or a custom scenario shape may be given; the
/// seeds apply to either.
struct RunConfig {
    std::optional<int> case_id;
    ScenarioSpec scenario;      // custom shape; ignored when case_id is set
    bool scenario_shape_set = false;
    std::uint64_t topology_seed = 1;
    std::uint64_t load_seed = 100;

    Scheme scheme = Scheme::hybrid;
    double k = 0.0;
    CoeffMode coeff_mode = CoeffMode::paper_literal;
    double epsilon = 0.05;

    double k_min = -5.0;
    double k_max = 10.0;
    int steps = 301;
    bool refine = false;

    ModelTag model = ModelTag::linear;
    int n_seeds = 1;
    std::string output_dir = ".";
    std::string format = "csv"; // csv | structured

    /// The scenario to generate: case parameters or the custom shape,
    /// with this config's seeds applied. Throws ValidationError.
    ScenarioSpec make_scenario() const;

    void validate() const;
};

/// Flat key-value document: one `key = value` per line, `#` comments.
/// Keys mirror RunConfig field names exactly (see README for the list).
/// Unknown keys are rejected, naming the offending key.
std::map<std::string, std::string> load_config_file(const std::string& path);

/// Applies file values onto defaults; flag handling layers on top of the
/// result (flags win).
RunConfig config_from_map(const std::map<std::string, std::string>& kv);

ModelTag model_from_string(const std::string& s);

} // namespace feedersim

#endif
