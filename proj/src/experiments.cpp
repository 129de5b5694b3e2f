#include "pcontrol/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcontrol/controllers.hpp"
#include "pcontrol/errors.hpp"
#include "pcontrol/parallel.hpp"

namespace pcontrol {

double ConvergenceStats::fraction_within(int steps) const {
    long total = 0;
    long within = 0;
    for (std::size_t k = 0; k < histogram.size(); ++k) {
        total += histogram[k];
        if (static_cast<int>(k) <= steps) within += histogram[k];
    }
    return total == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(total);
}

ConvergenceStats convergence_stats(const SafetyFunction& sf, const ConvergenceOptions& options) {
    if (options.runs_per_ic < 1) throw InvalidConfig("runs per initial condition must be >= 1");
    if (options.ic_count < 2) throw InvalidConfig("need at least 2 initial conditions");
    if (options.max_steps < 1) throw InvalidConfig("max steps must be >= 1");

    const DescentController controller(sf);
    const Grid ics(sf.grid.lower(), sf.grid.upper(), options.ic_count);
    const auto runs = static_cast<std::size_t>(options.runs_per_ic);

    ConvergenceStats stats;
    stats.per_ic.resize(ics.size());
    std::vector<std::vector<long>> hist(ics.size());

    detail::parallel_for(ics.size(), options.threads, [&](std::size_t c) {
        IcStats& out = stats.per_ic[c];
        out.q0 = ics[c];
        out.runs = options.runs_per_ic;
        double iters = 0.0;
        double control = 0.0;
        for (std::size_t r = 0; r < runs; ++r) {
            RngStream rng(options.seed, c * runs + r);
            const EntryResult e = run_until_safe(controller, sf.map, sf.noise, out.q0, rng, options.max_steps);
            iters += e.steps;
            if (e.steps > 0) control += e.total_control / e.steps;
            out.max_iterations = std::max(out.max_iterations, e.steps);
            auto& h = hist[c];
            if (h.size() <= static_cast<std::size_t>(e.steps)) h.resize(static_cast<std::size_t>(e.steps) + 1, 0);
            ++h[static_cast<std::size_t>(e.steps)];
        }
        out.mean_iterations = iters / static_cast<double>(runs);
        out.mean_control = control / static_cast<double>(runs);
    });

    for (std::size_t c = 0; c < ics.size(); ++c) {
        stats.global_max_iterations = std::max(stats.global_max_iterations, stats.per_ic[c].max_iterations);
        if (stats.histogram.size() < hist[c].size()) stats.histogram.resize(hist[c].size(), 0);
        for (std::size_t k = 0; k < hist[c].size(); ++k) stats.histogram[k] += hist[c][k];
    }
    return stats;
}

std::vector<std::pair<double, double>> average_control_map(const ConvergenceStats& stats) {
    std::vector<std::pair<double, double>> out;
    out.reserve(stats.per_ic.size());
    for (const IcStats& s : stats.per_ic) {
        if (s.runs < 1) throw InvalidInput("statistics computed without runs");
        out.emplace_back(s.q0, s.mean_control);
    }
    return out;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InvalidInput("spearman: length mismatch");
    if (a.size() < 2) throw InvalidInput("spearman: need at least two samples");
    const std::vector<double> ra = ranks(a);
    const std::vector<double> rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

SweepRow sweep_row(double param, const Grid& grid, const MapSpec& map,
                   const DisturbanceModel& noise, const SolveOptions& solve) {
    SweepRow row;
    row.param = param;
    try {
        const SafetyFunction sf = compute_safety_function(grid, map, noise, solve);
        row.u0 = min_control_bound(sf);
        row.iterations = sf.iterations;
        if (noise.bound > 0.0) row.ratio = row.u0 / noise.bound;
        const SafeSet ss = extract_minimal_safe_set(sf);
        const PieceStats st = piece_stats(ss, grid);
        row.piece_count = st.count;
        row.mean_gap = st.mean_gap;
        for (const Piece& p : ss.pieces) row.pieces.emplace_back(grid[p.first], grid[p.last]);
    } catch (const NonConvergence& e) {
        row.u0 = std::numeric_limits<double>::quiet_NaN();
        row.iterations = e.iterations();
        row.error = e.what();
    }
    return row;
}

namespace {

template <typename Make>
std::vector<SweepRow> run_sweep(std::size_t n, unsigned threads, Make&& make) {
    std::vector<SweepRow> rows(n);
    // Rows are independent; each solve runs single-threaded inside.
    detail::parallel_for(n, threads, [&](std::size_t i) { rows[i] = make(i); });
    return rows;
}

SolveOptions serial(SolveOptions s) {
    s.threads = 1;
    return s;
}

}  // namespace

std::vector<SweepRow> sweep_xi(double mu, const std::vector<double>& xi_values, const GridSpec& spec,
                               int support_count, const SolveOptions& solve) {
    for (double xi : xi_values)
        if (!(xi > 0.0)) throw InvalidConfig("sweep_xi requires every xi0 > 0");
    const Grid grid(spec.lower, spec.upper, spec.count);
    const MapSpec map = MapSpec::tent(mu);
    return run_sweep(xi_values.size(), solve.threads, [&](std::size_t i) {
        return sweep_row(xi_values[i], grid, map, {xi_values[i], support_count}, serial(solve));
    });
}

std::vector<SweepRow> sweep_mu(double xi0, const std::vector<double>& mu_values, const GridSpec& spec,
                               int support_count, const SolveOptions& solve) {
    if (!(xi0 >= 0.0)) throw InvalidConfig("sweep_mu requires xi0 >= 0");
    const Grid grid(spec.lower, spec.upper, spec.count);
    return run_sweep(mu_values.size(), solve.threads, [&](std::size_t i) {
        return sweep_row(mu_values[i], grid, MapSpec::tent(mu_values[i]), {xi0, support_count}, serial(solve));
    });
}

std::vector<SweepRow> sweep_support(double mu, double xi0, const std::vector<int>& m_values,
                                    const GridSpec& spec, const SolveOptions& solve) {
    const Grid grid(spec.lower, spec.upper, spec.count);
    const MapSpec map = MapSpec::tent(mu);
    return run_sweep(m_values.size(), solve.threads, [&](std::size_t i) {
        return sweep_row(static_cast<double>(m_values[i]), grid, map, {xi0, m_values[i]}, serial(solve));
    });
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw InvalidConfig("log_spaced needs 0 < lo <= hi and count >= 1");
    if (count == 1) return {lo};
    std::vector<double> v(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> linear_spaced(double lo, double hi, std::size_t count) {
    if (!(hi >= lo) || count == 0) throw InvalidConfig("linear_spaced needs lo <= hi and count >= 1");
    if (count == 1) return {lo};
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.back() = hi;
    return v;
}

std::vector<double> piece_count_transitions(const std::vector<SweepRow>& rows) {
    std::vector<double> out;
    const SweepRow* prev = nullptr;
    for (const SweepRow& r : rows) {
        if (r.error) continue;
        if (prev && prev->piece_count != r.piece_count) out.push_back(0.5 * (prev->param + r.param));
        prev = &r;
    }
    return out;
}

std::optional<GapHeuristic> gap_heuristic(const std::vector<SweepRow>& rows, double xi0) {
    std::vector<double> u0s;
    std::optional<GapHeuristic> best;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        if (r.error) continue;
        u0s.push_back(r.u0);
        if (!r.mean_gap) continue;
        if (!best || std::abs(*r.mean_gap - xi0) < std::abs(best->gap - xi0)) best = GapHeuristic{i, *r.mean_gap, r.u0, 0.0};
    }
    if (!best) return std::nullopt;
    std::sort(u0s.begin(), u0s.end());
    const std::size_t n = u0s.size();
    best->median_u0 = n % 2 ? u0s[n / 2] : 0.5 * (u0s[n / 2 - 1] + u0s[n / 2]);
    return best;
}

}  // namespace pcontrol
