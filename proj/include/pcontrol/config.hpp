#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pcontrol/grid.hpp"
#include "pcontrol/safety.hpp"

namespace pcontrol {

// Fully resolved settings of one CLI run. Every field has a default; a JSON
// config file and then command-line flags override them.
struct RunConfig {
    std::string command;

    std::string map = "tent";
    double mu = 3.0;
    double c = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    std::size_t grid_n = 1000;
    double xi0 = 0.05;
    int noise_m = 101;
    std::uint64_t seed = 1;
    int max_iters = 10000;
    unsigned threads = 0;

    std::string in;
    std::string out;

    // orbit
    std::string controller = "descent";
    double ic = 0.3;
    int steps = 100;
    std::uint64_t stream = 0;

    // safeset
    std::optional<double> u0;

    // stats
    std::size_t ics = 1000;
    int runs = 1000;
    int max_steps = 1000;

    // sweeps
    double xi_min = 0.005;
    double xi_max = 0.25;
    std::size_t xi_count = 50;
    std::string xi_spacing = "log";
    double mu_min = 2.0;
    double mu_max = 15.0;
    std::size_t mu_count = 131;
    std::vector<int> m_values = {11, 21, 41, 101, 201};

    // verify
    int cases = 20;

    MapSpec map_spec() const;
    Grid grid() const;
    DisturbanceModel noise() const;
    SolveOptions solve_options() const;
};

// Throws InvalidConfig on the first inconsistent field.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
// Overlays the keys present in `j` onto `cfg`; unknown keys are an error.
void merge_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

}  // namespace pcontrol
