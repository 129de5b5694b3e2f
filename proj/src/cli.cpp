#include "pcontrol/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pcontrol/config.hpp"
#include "pcontrol/controllers.hpp"
#include "pcontrol/errors.hpp"
#include "pcontrol/experiments.hpp"
#include "pcontrol/io.hpp"
#include "pcontrol/verify.hpp"

namespace pcontrol {

namespace {

std::string quoted(const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') q += '\\';
        q += (ch == '\n') ? ' ' : ch;
    }
    return q + "\"";
}

void diag(std::ostream& err, const std::string& level, const std::string& code, const std::string& msg) {
    err << "level=" << level << " code=" << code << " msg=" << quoted(msg) << '\n';
}

// Flags write into a scratch config; only flags actually given are copied
// over the file/default values afterwards.
class FlagSet {
public:
    template <typename T>
    CLI::Option* add(CLI::App& app, const std::string& name, T RunConfig::*field, const std::string& help) {
        CLI::Option* opt = app.add_option(name, scratch_.*field, help);
        bindings_.push_back({opt, [this, field](RunConfig& cfg) { cfg.*field = scratch_.*field; }});
        return opt;
    }

    CLI::Option* add_u0(CLI::App& app) {
        CLI::Option* opt = app.add_option("--u0", u0_, "safe-set threshold (default: min U)");
        bindings_.push_back({opt, [this](RunConfig& cfg) { cfg.u0 = u0_; }});
        return opt;
    }

    void apply(RunConfig& cfg) const {
        for (const auto& [opt, fn] : bindings_)
            if (opt->count() > 0) fn(cfg);
    }

private:
    RunConfig scratch_;
    double u0_ = 0.0;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bindings_;
};

// Writes to --out when given, otherwise to the result stream.
template <typename Fn>
void emit(const RunConfig& cfg, std::ostream& out, std::ostream& err, Fn&& write) {
    if (cfg.out.empty()) {
        write(out);
        diag(err, "info", "config", to_json(cfg).dump());
        return;
    }
    std::ofstream os(cfg.out);
    if (!os) throw InvalidConfig("cannot open output file " + cfg.out);
    write(os);
    if (!os) throw InvalidConfig("write failed for " + cfg.out);
    std::ofstream side(cfg.out + ".config.json");
    side << to_json(cfg).dump(2) << '\n';
}

SafetyFunction obtain_safety(const RunConfig& cfg) {
    if (!cfg.in.empty()) return load_safety_function(cfg.in);
    return compute_safety_function(cfg.grid(), cfg.map_spec(), cfg.noise(), cfg.solve_options());
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "none"; }

int run_safety(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SafetyFunction sf = compute_safety_function(cfg.grid(), cfg.map_spec(), cfg.noise(), cfg.solve_options());
    emit(cfg, out, err, [&](std::ostream& os) { write_safety_function(os, sf); });
    diag(err, "info", "safety",
         "k=" + std::to_string(sf.iterations) + " min_U=" + format_real(min_control_bound(sf)));
    return kExitOk;
}

int run_safeset(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SafetyFunction sf = obtain_safety(cfg);
    const double u0 = cfg.u0.value_or(min_control_bound(sf));
    const SafeSet ss = extract_safe_set(sf, u0);
    const PieceStats st = piece_stats(ss, sf.grid);
    emit(cfg, out, err, [&](std::ostream& os) {
        os << "u0=" << format_real(u0) << '\n'
           << "min_U=" << format_real(min_control_bound(sf)) << '\n'
           << "pieces=" << st.count << '\n'
           << "mean_gap=" << (st.mean_gap ? format_real(*st.mean_gap) : "none") << '\n'
           << "piece,lo,hi,width\n";
        for (std::size_t p = 0; p < ss.pieces.size(); ++p)
            os << p << ',' << format_real(sf.grid[ss.pieces[p].first]) << ','
               << format_real(sf.grid[ss.pieces[p].last]) << ',' << format_real(st.widths[p]) << '\n';
    });
    return kExitOk;
}

int run_orbit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const MapSpec map = cfg.map_spec();
    const DisturbanceModel noise = cfg.noise();
    RngStream rng(cfg.seed, cfg.stream);
    OrbitRecord rec;
    if (cfg.controller == "none") {
        rec = simulate_orbit(Uncontrolled{}, map, noise, cfg.grid(), cfg.ic, cfg.steps, rng);
    } else {
        SafetyFunction sf = obtain_safety(cfg);
        if (!(sf.map == map) || !(sf.noise == noise))
            diag(err, "warn", "metadata", "safety function metadata differs from the orbit map/noise flags");
        if (cfg.controller == "partial") {
            const double u0 = cfg.u0.value_or(min_control_bound(sf));
            const Grid grid = sf.grid;
            rec = simulate_orbit(PartialController(grid, extract_safe_set(sf, u0)), map, noise, grid, cfg.ic,
                                 cfg.steps, rng);
        } else {
            const Grid grid = sf.grid;
            rec = simulate_orbit(DescentController(std::move(sf)), map, noise, grid, cfg.ic, cfg.steps, rng);
        }
    }
    emit(cfg, out, err, [&](std::ostream& os) { write_orbit_csv(os, rec); });
    diag(err, "info", "orbit",
         "escaped_at=" + opt_int(rec.escaped_at) + " entered_safe_set_at=" + opt_int(rec.entered_safe_set_at) +
             " steps=" + std::to_string(rec.steps.size()));
    return kExitOk;
}

int run_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SafetyFunction sf = obtain_safety(cfg);
    ConvergenceOptions opt;
    opt.ic_count = cfg.ics;
    opt.runs_per_ic = cfg.runs;
    opt.max_steps = cfg.max_steps;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    const ConvergenceStats stats = convergence_stats(sf, opt);
    emit(cfg, out, err, [&](std::ostream& os) { write_stats_csv(os, stats); });
    diag(err, "info", "stats", "global_max_iterations=" + std::to_string(stats.global_max_iterations));
    return kExitOk;
}

GridSpec grid_spec(const RunConfig& cfg) { return {cfg.lower, cfg.upper, cfg.grid_n}; }

int report_sweep(const RunConfig& cfg, const std::vector<SweepRow>& rows, std::ostream& out, std::ostream& err) {
    emit(cfg, out, err, [&](std::ostream& os) { write_sweep_csv(os, rows); });
    int failed = 0;
    for (const SweepRow& r : rows) {
        if (r.error) {
            ++failed;
            diag(err, "warn", "non-convergence", "param=" + format_real(r.param) + " " + *r.error);
        }
    }
    return failed ? kExitNonConvergence : kExitOk;
}

int run_sweep_xi(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::vector<double> xs = cfg.xi_spacing == "log" ? log_spaced(cfg.xi_min, cfg.xi_max, cfg.xi_count)
                                                           : linear_spaced(cfg.xi_min, cfg.xi_max, cfg.xi_count);
    return report_sweep(cfg, sweep_xi(cfg.mu, xs, grid_spec(cfg), cfg.noise_m, cfg.solve_options()), out, err);
}

int run_sweep_mu(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::vector<double> mus = linear_spaced(cfg.mu_min, cfg.mu_max, cfg.mu_count);
    return report_sweep(cfg, sweep_mu(cfg.xi0, mus, grid_spec(cfg), cfg.noise_m, cfg.solve_options()), out, err);
}

int run_sweep_m(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return report_sweep(cfg, sweep_support(cfg.mu, cfg.xi0, cfg.m_values, grid_spec(cfg), cfg.solve_options()), out,
                        err);
}

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    VerifyOptions opt;
    opt.seed = cfg.seed;
    opt.oracle_cases = cfg.cases;
    bool ok = true;
    for (const CheckResult& r : run_verification(opt)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitInvalid;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Safety functions, safe sets and chaos control for noisy 1-D maps", "pcontrol"};
    app.require_subcommand(1);
    app.fallthrough();

    FlagSet flags;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    flags.add(app, "--map", &RunConfig::map, "map family: tent or constant");
    flags.add(app, "--mu", &RunConfig::mu, "tent slope");
    flags.add(app, "--c", &RunConfig::c, "value of the constant map");
    flags.add(app, "--lower", &RunConfig::lower, "lower end of Q");
    flags.add(app, "--upper", &RunConfig::upper, "upper end of Q");
    flags.add(app, "--grid-n", &RunConfig::grid_n, "grid points in Q");
    flags.add(app, "--xi0", &RunConfig::xi0, "disturbance bound");
    flags.add(app, "--noise-m", &RunConfig::noise_m, "odd size of the worst-case disturbance support");
    flags.add(app, "--seed", &RunConfig::seed, "master random seed");
    flags.add(app, "--max-iters", &RunConfig::max_iters, "iteration cap of the safety solver");
    flags.add(app, "--threads", &RunConfig::threads, "worker threads (0 = all cores)");
    flags.add(app, "--out", &RunConfig::out, "output file (default: stdout)");

    CLI::App* safety = app.add_subcommand("safety", "compute and store the safety function");
    CLI::App* safeset = app.add_subcommand("safeset", "threshold U and list the safe-set pieces");
    flags.add(*safeset, "--in", &RunConfig::in, "safety-function CSV (default: compute)");
    flags.add_u0(*safeset);

    CLI::App* orbit = app.add_subcommand("orbit", "simulate one orbit");
    flags.add(*orbit, "--controller", &RunConfig::controller, "none, partial or descent");
    flags.add(*orbit, "--ic", &RunConfig::ic, "initial condition");
    flags.add(*orbit, "--steps", &RunConfig::steps, "number of map iterations");
    flags.add(*orbit, "--stream", &RunConfig::stream, "random substream index");
    flags.add(*orbit, "--in", &RunConfig::in, "safety-function CSV (default: compute)");
    flags.add_u0(*orbit);

    CLI::App* stats = app.add_subcommand("stats", "convergence and average-control maps of the descent controller");
    flags.add(*stats, "--in", &RunConfig::in, "safety-function CSV (default: compute)");
    flags.add(*stats, "--ics", &RunConfig::ics, "number of initial conditions");
    flags.add(*stats, "--runs", &RunConfig::runs, "orbits per initial condition");
    flags.add(*stats, "--max-steps", &RunConfig::max_steps, "step budget per orbit");

    CLI::App* sweep_xi_cmd = app.add_subcommand("sweep-xi", "safe sets and u0 over the disturbance bound");
    flags.add(*sweep_xi_cmd, "--xi-min", &RunConfig::xi_min, "smallest xi0");
    flags.add(*sweep_xi_cmd, "--xi-max", &RunConfig::xi_max, "largest xi0");
    flags.add(*sweep_xi_cmd, "--xi-count", &RunConfig::xi_count, "number of xi0 values");
    flags.add(*sweep_xi_cmd, "--xi-spacing", &RunConfig::xi_spacing, "log or linear");

    CLI::App* sweep_mu_cmd = app.add_subcommand("sweep-mu", "safe sets and u0 over the tent slope");
    flags.add(*sweep_mu_cmd, "--mu-min", &RunConfig::mu_min, "smallest mu");
    flags.add(*sweep_mu_cmd, "--mu-max", &RunConfig::mu_max, "largest mu");
    flags.add(*sweep_mu_cmd, "--mu-count", &RunConfig::mu_count, "number of mu values");

    CLI::App* sweep_m_cmd = app.add_subcommand("sweep-m", "u0 against the disturbance support size");
    flags.add(*sweep_m_cmd, "--m-values", &RunConfig::m_values, "odd support sizes");

    CLI::App* verify = app.add_subcommand("verify", "oracle and invariant self-check");
    flags.add(*verify, "--cases", &RunConfig::cases, "random oracle configurations");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        diag(err, "error", "usage", e.what());
        return kExitInvalid;
    }

    const std::vector<std::pair<CLI::App*, std::function<int(const RunConfig&, std::ostream&, std::ostream&)>>> commands = {
        {safety, run_safety},     {safeset, run_safeset},       {orbit, run_orbit},
        {stats, run_stats},       {sweep_xi_cmd, run_sweep_xi}, {sweep_mu_cmd, run_sweep_mu},
        {sweep_m_cmd, run_sweep_m}, {verify, run_verify},
    };

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
        flags.apply(cfg);
        for (const auto& [sub, fn] : commands) {
            if (sub->parsed()) {
                cfg.command = sub->get_name();
                validate(cfg);
                return fn(cfg, out, err);
            }
        }
        diag(err, "error", "usage", "no subcommand");
        return kExitInvalid;
    } catch (const NonConvergence& e) {
        diag(err, "error", e.code(), e.what());
        return kExitNonConvergence;
    } catch (const ControllerFailure& e) {
        diag(err, "error", e.code(), e.what());
        return kExitNonConvergence;
    } catch (const Error& e) {
        diag(err, "error", e.code(), e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        diag(err, "error", "internal", e.what());
        return kExitInvalid;
    }
}

}  // namespace pcontrol
