#include "pcontrol/config.hpp"

#include <cmath>
#include <fstream>

#include "pcontrol/errors.hpp"

namespace pcontrol {

MapSpec RunConfig::map_spec() const {
    return map_kind_from_string(map) == MapKind::tent ? MapSpec::tent(mu) : MapSpec::constant(c);
}

Grid RunConfig::grid() const { return Grid(lower, upper, grid_n); }

DisturbanceModel RunConfig::noise() const { return {xi0, noise_m}; }

SolveOptions RunConfig::solve_options() const {
    SolveOptions s;
    s.max_iterations = max_iters;
    s.threads = threads;
    return s;
}

void validate(const RunConfig& cfg) {
    map_kind_from_string(cfg.map);
    auto finite = [](double v, const char* name) {
        if (!std::isfinite(v)) throw InvalidConfig(std::string(name) + " must be finite");
    };
    finite(cfg.mu, "mu");
    finite(cfg.c, "c");
    finite(cfg.ic, "ic");
    if (!(cfg.upper > cfg.lower)) throw InvalidConfig("upper must exceed lower");
    if (cfg.grid_n < 2) throw InvalidConfig("grid-n must be >= 2");
    if (!(cfg.xi0 >= 0.0) || !std::isfinite(cfg.xi0)) throw InvalidConfig("xi0 must be finite and >= 0");
    if (cfg.noise_m < 1 || cfg.noise_m % 2 == 0) throw InvalidConfig("noise-m must be a positive odd integer");
    if (cfg.noise_m == 1 && cfg.xi0 > 0.0) throw InvalidConfig("noise-m=1 requires xi0=0");
    if (cfg.max_iters < 1) throw InvalidConfig("max-iters must be >= 1");
    if (cfg.controller != "none" && cfg.controller != "partial" && cfg.controller != "descent")
        throw InvalidConfig("controller must be none, partial or descent");
    if (cfg.steps < 0) throw InvalidConfig("steps must be >= 0");
    if (cfg.ics < 2) throw InvalidConfig("ics must be >= 2");
    if (cfg.runs < 1) throw InvalidConfig("runs must be >= 1");
    if (cfg.max_steps < 1) throw InvalidConfig("max-steps must be >= 1");
    if (cfg.xi_spacing != "log" && cfg.xi_spacing != "linear") throw InvalidConfig("xi-spacing must be log or linear");
    if (!(cfg.xi_min > 0.0) || !(cfg.xi_max >= cfg.xi_min) || cfg.xi_count < 1)
        throw InvalidConfig("xi sweep needs 0 < xi-min <= xi-max and xi-count >= 1");
    if (!(cfg.mu_max >= cfg.mu_min) || cfg.mu_count < 1) throw InvalidConfig("mu sweep needs mu-min <= mu-max");
    for (int m : cfg.m_values)
        if (m < 1 || m % 2 == 0) throw InvalidConfig("m-values must be positive odd integers");
    if (cfg.cases < 1) throw InvalidConfig("cases must be >= 1");
    if (cfg.u0 && !std::isfinite(*cfg.u0)) throw InvalidConfig("u0 must be finite");
}

nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json j = {
        {"command", cfg.command},   {"map", cfg.map},
        {"mu", cfg.mu},             {"c", cfg.c},
        {"lower", cfg.lower},       {"upper", cfg.upper},
        {"grid_n", cfg.grid_n},     {"xi0", cfg.xi0},
        {"noise_m", cfg.noise_m},   {"seed", cfg.seed},
        {"max_iters", cfg.max_iters}, {"threads", cfg.threads},
        {"in", cfg.in},             {"out", cfg.out},
        {"controller", cfg.controller}, {"ic", cfg.ic},
        {"steps", cfg.steps},       {"stream", cfg.stream},
        {"ics", cfg.ics},           {"runs", cfg.runs},
        {"max_steps", cfg.max_steps}, {"xi_min", cfg.xi_min},
        {"xi_max", cfg.xi_max},     {"xi_count", cfg.xi_count},
        {"xi_spacing", cfg.xi_spacing}, {"mu_min", cfg.mu_min},
        {"mu_max", cfg.mu_max},     {"mu_count", cfg.mu_count},
        {"m_values", cfg.m_values}, {"cases", cfg.cases},
    };
    j["u0"] = cfg.u0 ? nlohmann::json(*cfg.u0) : nlohmann::json(nullptr);
    return j;
}

void merge_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "command") cfg.command = value.get<std::string>();
            else if (key == "map") cfg.map = value.get<std::string>();
            else if (key == "mu") cfg.mu = value.get<double>();
            else if (key == "c") cfg.c = value.get<double>();
            else if (key == "lower") cfg.lower = value.get<double>();
            else if (key == "upper") cfg.upper = value.get<double>();
            else if (key == "grid_n") cfg.grid_n = value.get<std::size_t>();
            else if (key == "xi0") cfg.xi0 = value.get<double>();
            else if (key == "noise_m") cfg.noise_m = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "max_iters") cfg.max_iters = value.get<int>();
            else if (key == "threads") cfg.threads = value.get<unsigned>();
            else if (key == "in") cfg.in = value.get<std::string>();
            else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "controller") cfg.controller = value.get<std::string>();
            else if (key == "ic") cfg.ic = value.get<double>();
            else if (key == "steps") cfg.steps = value.get<int>();
            else if (key == "stream") cfg.stream = value.get<std::uint64_t>();
            else if (key == "u0") cfg.u0 = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
            else if (key == "ics") cfg.ics = value.get<std::size_t>();
            else if (key == "runs") cfg.runs = value.get<int>();
            else if (key == "max_steps") cfg.max_steps = value.get<int>();
            else if (key == "xi_min") cfg.xi_min = value.get<double>();
            else if (key == "xi_max") cfg.xi_max = value.get<double>();
            else if (key == "xi_count") cfg.xi_count = value.get<std::size_t>();
            else if (key == "xi_spacing") cfg.xi_spacing = value.get<std::string>();
            else if (key == "mu_min") cfg.mu_min = value.get<double>();
            else if (key == "mu_max") cfg.mu_max = value.get<double>();
            else if (key == "mu_count") cfg.mu_count = value.get<std::size_t>();
            else if (key == "m_values") cfg.m_values = value.get<std::vector<int>>();
            else if (key == "cases") cfg.cases = value.get<int>();
            else throw InvalidConfig("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw InvalidConfig("bad value for '" + key + "': " + e.what());
        }
    }
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw InvalidConfig("cannot read config file " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfig("config file " + path.string() + ": " + e.what());
    }
    merge_json(base, j);
    return base;
}

}  // namespace pcontrol
