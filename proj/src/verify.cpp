#include "pcontrol/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pcontrol/controllers.hpp"
#include "pcontrol/errors.hpp"

namespace pcontrol {

TripleLoopOracle::TripleLoopOracle(const Grid& grid, const MapSpec& map, const DisturbanceModel& noise)
    : n_(grid.size()) {
    const std::vector<double> xi = disturbance_support(noise);
    m_ = xi.size();
    table_.resize(n_ * m_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t s = 0; s < m_; ++s)
            for (std::size_t j = 0; j < n_; ++j)
                table_[(i * m_ + s) * n_ + j] = std::abs(map(grid[i]) + xi[s] - grid[j]);
}

std::vector<double> TripleLoopOracle::sweep(const std::vector<double>& current) const {
    std::vector<double> next(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < m_; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n_; ++j) {
                const double ustar = std::max(table_[(i * m_ + s) * n_ + j], current[j]);
                best = std::min(best, ustar);
            }
            worst = std::max(worst, best);
        }
        next[i] = worst;
    }
    return next;
}

std::vector<double> TripleLoopOracle::solve(int max_sweeps) const {
    std::vector<double> u(n_, 0.0);
    for (int k = 0; k < max_sweeps; ++k) {
        std::vector<double> next = sweep(u);
        if (next == u) return u;
        u = std::move(next);
    }
    throw NonConvergence("oracle did not stabilize", u, std::numeric_limits<double>::quiet_NaN(), max_sweeps);
}

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

struct SmallCase {
    Grid grid;
    MapSpec map;
    DisturbanceModel noise;
};

SmallCase random_case(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_dist(5, 25);
    std::uniform_int_distribution<int> m_dist(1, 2);
    std::uniform_real_distribution<double> mu_dist(2.0, 6.0);
    std::uniform_real_distribution<double> xi_dist(0.01, 0.2);
    const auto n = static_cast<std::size_t>(n_dist(rng));
    const int m = 2 * m_dist(rng) + 1;
    return {Grid(0.0, 1.0, n), MapSpec::tent(mu_dist(rng)), DisturbanceModel{xi_dist(rng), m}};
}

std::string describe(const SmallCase& c) {
    std::ostringstream os;
    os << "N=" << c.grid.size() << " M=" << c.noise.support_count << " mu=" << c.map.parameter
       << " xi0=" << c.noise.bound;
    return os.str();
}

CheckResult check_oracle(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    for (int t = 0; t < opt.oracle_cases; ++t) {
        const SmallCase c = random_case(rng);
        const TripleLoopOracle oracle(c.grid, c.map, c.noise);
        const SafetyFunction sf = compute_safety_function(c.grid, c.map, c.noise);
        const double diff = max_abs_diff(sf.values, oracle.solve());
        worst = std::max(worst, diff);
        if (diff > 1e-12) return {"oracle-equivalence", false, describe(c) + " diff=" + std::to_string(diff)};
        const std::vector<double> step = bellman_update(sf.values, c.grid, c.map, c.noise);
        if (max_abs_diff(step, oracle.sweep(sf.values)) > 1e-12)
            return {"oracle-equivalence", false, describe(c) + " single sweep differs"};
    }
    return {"oracle-equivalence", true, std::to_string(opt.oracle_cases) + " cases, max diff " + std::to_string(worst)};
}

CheckResult check_envelope(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed + 1);
    for (int t = 0; t < opt.oracle_cases; ++t) {
        const SmallCase c = random_case(rng);
        const Grid grid(0.0, 1.0, 200);
        SolveOptions naive;
        naive.method = UpdateMethod::naive;
        const auto a = compute_safety_function(grid, c.map, c.noise, naive);
        const auto b = compute_safety_function(grid, c.map, c.noise);
        if (a.values != b.values) return {"envelope-equals-naive", false, describe(c)};
    }
    return {"envelope-equals-naive", true, "N=200, bit-identical"};
}

const std::vector<SmallCase>& reference_cases() {
    static const std::vector<SmallCase> cases = {
        {Grid(0.0, 1.0, 1000), MapSpec::tent(3.0), {0.05, 101}},
        {Grid(0.0, 1.0, 301), MapSpec::tent(2.5), {0.1, 21}},
        {Grid(0.0, 1.0, 400), MapSpec::tent(8.67), {0.05, 41}},
    };
    return cases;
}

CheckResult check_monotone_and_termination() {
    for (const SmallCase& c : reference_cases()) {
        std::vector<double> u(c.grid.size(), 0.0);
        int k = 0;
        for (;; ++k) {
            if (k >= 10000) return {"monotone-termination", false, describe(c) + " no fixed point in 10000 sweeps"};
            const std::vector<double> next = bellman_update(u, c.grid, c.map, c.noise);
            for (std::size_t i = 0; i < u.size(); ++i)
                if (next[i] < u[i]) return {"monotone-termination", false, describe(c) + " decreased"};
            if (next == u) break;
            u = next;
        }
    }
    return {"monotone-termination", true, "exact fixed point reached on reference cases"};
}

CheckResult check_symmetry() {
    double worst = 0.0;
    for (const SmallCase& c : reference_cases()) {
        const SafetyFunction sf = compute_safety_function(c.grid, c.map, c.noise);
        const std::size_t n = sf.values.size();
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(sf.values[i] - sf.values[n - 1 - i]));
    }
    return {"tent-symmetry", worst <= 1e-12, "max asymmetry " + std::to_string(worst)};
}

CheckResult check_fixed_point() {
    for (const SmallCase& c : reference_cases()) {
        const SafetyFunction sf = compute_safety_function(c.grid, c.map, c.noise);
        const double diff = max_abs_diff(bellman_update(sf.values, c.grid, c.map, c.noise), sf.values);
        if (diff > convergence_tolerance(sf.values)) return {"fixed-point", false, describe(c)};
    }
    return {"fixed-point", true, "one more sweep changes nothing"};
}

CheckResult check_determinism() {
    const SmallCase& c = reference_cases().front();
    SolveOptions one;
    one.threads = 1;
    SolveOptions two;
    two.threads = 2;
    const SafetyFunction a = compute_safety_function(c.grid, c.map, c.noise, one);
    const SafetyFunction b = compute_safety_function(c.grid, c.map, c.noise, two);
    if (a.values != b.values || a.iterations != b.iterations)
        return {"determinism", false, "thread count changed the safety function"};

    const DescentController ctl(a);
    auto orbit = [&] {
        RngStream rng(7, 3);
        return simulate_orbit(ctl, c.map, c.noise, c.grid, 0.16, 500, rng);
    };
    const OrbitRecord o1 = orbit();
    const OrbitRecord o2 = orbit();
    for (std::size_t i = 0; i < o1.steps.size(); ++i) {
        const auto& s = o1.steps[i];
        const auto& t = o2.steps[i];
        if (s.q != t.q || s.xi != t.xi || s.u != t.u || s.q_next != t.q_next)
            return {"determinism", false, "orbit replay differs at step " + std::to_string(i)};
    }
    return {"determinism", true, "solver and orbit replay bit-identical"};
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
    return {check_oracle(options), check_envelope(options), check_monotone_and_termination(),
            check_symmetry(), check_fixed_point(), check_determinism()};
}

}  // namespace pcontrol
