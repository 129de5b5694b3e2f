#include "pcontrol/safety.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pcontrol/errors.hpp"
#include "pcontrol/parallel.hpp"

namespace pcontrol {

namespace {

double naive_value(double x, const Grid& grid, std::span<const double> values) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j)
        best = std::min(best, std::max(std::abs(x - grid[j]), values[j]));
    return best;
}

void validate_values(std::span<const double> values, const Grid& grid) {
    if (values.size() != grid.size())
        throw InvalidInput("value array length " + std::to_string(values.size()) +
                           " does not match grid size " + std::to_string(grid.size()));
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0) throw InvalidInput("values must be finite and >= 0");
}

}  // namespace

double envelope_value(double x, const Grid& grid, std::span<const double> values) {
    const std::size_t n = grid.size();
    const std::size_t c = grid.nearest_index(x);
    double best = std::max(std::abs(x - grid[c]), values[c]);
    // Distances grow monotonically away from the nearest point, so each side
    // can stop at the first point already as far as the current best.
    for (std::size_t j = c; j-- > 0;) {
        const double d = std::abs(x - grid[j]);
        if (d >= best) break;
        best = std::min(best, std::max(d, values[j]));
    }
    for (std::size_t j = c + 1; j < n; ++j) {
        const double d = std::abs(x - grid[j]);
        if (d >= best) break;
        best = std::min(best, std::max(d, values[j]));
    }
    return best;
}

std::vector<double> bellman_update(std::span<const double> current, const Grid& grid,
                                   const MapSpec& map, const DisturbanceModel& noise,
                                   UpdateMethod method, unsigned threads) {
    validate_values(current, grid);
    const std::vector<double> xi = disturbance_support(noise);
    std::vector<double> next(grid.size());
    detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
        const double image = map(grid[i]);
        double worst = 0.0;
        for (double s : xi) {
            const double x = image + s;
            const double v = method == UpdateMethod::naive ? naive_value(x, grid, current)
                                                           : envelope_value(x, grid, current);
            worst = std::max(worst, v);
        }
        next[i] = worst;
    });
    return next;
}

double convergence_tolerance(std::span<const double> values) {
    double norm = 0.0;
    for (double v : values) norm = std::max(norm, std::abs(v));
    return 1e-15 * std::max(1.0, norm);
}

SafetyFunction compute_safety_function(const Grid& grid, const MapSpec& map,
                                       const DisturbanceModel& noise,
                                       const SolveOptions& options) {
    if (options.max_iterations < 1) throw InvalidConfig("max iterations must be >= 1");
    disturbance_support(noise);  // validates M

    std::vector<double> u(grid.size(), 0.0);
    double residual = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= options.max_iterations; ++k) {
        std::vector<double> next = bellman_update(u, grid, map, noise, options.method, options.threads);
        residual = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (next[i] < u[i])
                throw std::logic_error("safety iterate decreased at index " + std::to_string(i));
            residual = std::max(residual, next[i] - u[i]);
        }
        const double tol = convergence_tolerance(next);
        u = std::move(next);
        if (residual <= tol) {
            return SafetyFunction{grid, map, noise, std::move(u), k, tol, residual};
        }
    }
    throw NonConvergence("safety function did not converge within " +
                             std::to_string(options.max_iterations) + " iterations",
                         std::move(u), residual, options.max_iterations);
}

double min_control_bound(const SafetyFunction& sf) {
    if (sf.values.empty()) throw InvalidInput("empty safety function");
    return *std::min_element(sf.values.begin(), sf.values.end());
}

std::size_t SafeSet::size() const noexcept {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

double membership_tolerance(double u0) noexcept { return 1e-9 + 1e-9 * std::abs(u0); }

std::vector<Piece> pieces_of(const std::vector<bool>& mask) {
    std::vector<Piece> pieces;
    std::size_t i = 0;
    while (i < mask.size()) {
        if (!mask[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < mask.size() && mask[j + 1]) ++j;
        pieces.push_back({i, j});
        i = j + 1;
    }
    return pieces;
}

SafeSet safe_set_from_mask(double threshold, std::vector<bool> mask) {
    SafeSet ss;
    ss.threshold = threshold;
    ss.pieces = pieces_of(mask);
    ss.mask = std::move(mask);
    return ss;
}

SafeSet extract_safe_set(const SafetyFunction& sf, double u0) {
    if (!std::isfinite(u0)) throw InvalidInput("safe-set threshold must be finite");
    const double tol = membership_tolerance(u0);
    const double floor = min_control_bound(sf);
    if (u0 + tol < floor)
        throw NoSafeSet("threshold " + std::to_string(u0) + " is below min(U) = " + std::to_string(floor));
    std::vector<bool> mask(sf.values.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = sf.values[i] <= u0 + tol;
    return safe_set_from_mask(u0, std::move(mask));
}

SafeSet extract_minimal_safe_set(const SafetyFunction& sf) {
    return extract_safe_set(sf, min_control_bound(sf));
}

PieceStats piece_stats(const SafeSet& ss, const Grid& grid) {
    PieceStats st;
    st.count = ss.pieces.size();
    for (const Piece& p : ss.pieces) {
        st.widths.push_back(static_cast<double>(p.length()) * grid.spacing());
        st.centers.push_back(0.5 * (grid[p.first] + grid[p.last]));
    }
    for (std::size_t k = 1; k < st.centers.size(); ++k) st.gaps.push_back(st.centers[k] - st.centers[k - 1]);
    if (!st.gaps.empty()) {
        st.mean_gap = std::accumulate(st.gaps.begin(), st.gaps.end(), 0.0) / static_cast<double>(st.gaps.size());
        st.min_gap = *std::min_element(st.gaps.begin(), st.gaps.end());
        st.max_gap = *std::max_element(st.gaps.begin(), st.gaps.end());
    }
    return st;
}

}  // namespace pcontrol
