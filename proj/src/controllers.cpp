#include "pcontrol/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "pcontrol/errors.hpp"

namespace pcontrol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

StepResult snap(double image, double noise, std::size_t index, const Grid& grid) {
    const double target = grid[index];
    return {target, target - image, noise, index};
}

bool in_safe(const SafeSet& safe, const Grid& grid, double q) {
    return grid.contains(q) && safe.mask[grid.nearest_index(q)];
}

}  // namespace

PartialController::PartialController(Grid grid, SafeSet safe)
    : grid_(std::move(grid)), safe_(std::move(safe)) {
    if (safe_.mask.size() != grid_.size())
        throw InvalidInput("safe-set mask does not match the grid");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (safe_.mask[i]) {
            safe_indices_.push_back(i);
            safe_points_.push_back(grid_[i]);
        }
    }
    if (safe_indices_.empty()) throw NoSafeSet("partial control needs a nonempty safe set");
}

std::size_t PartialController::target_index(double x) const {
    const auto it = std::upper_bound(safe_points_.begin(), safe_points_.end(), x);
    if (it == safe_points_.begin()) return safe_indices_.front();
    if (it == safe_points_.end()) return safe_indices_.back();
    const auto hi = static_cast<std::size_t>(it - safe_points_.begin());
    const std::size_t lo = hi - 1;
    return (x - safe_points_[lo] <= safe_points_[hi] - x) ? safe_indices_[lo] : safe_indices_[hi];
}

StepResult PartialController::step(const MapSpec& map, const DisturbanceModel& noise, double q,
                                   RngStream& rng) const {
    const double xi = sample_disturbance(noise, rng);
    const double image = map_eval(map, q) + xi;
    return snap(image, xi, target_index(image), grid_);
}

std::size_t descent_target(const Grid& grid, std::span<const double> values, double x) {
    if (values.size() != grid.size()) throw InvalidInput("value array does not match the grid");
    using Key = std::tuple<double, double, std::size_t>;  // cost, distance, index
    const auto key = [&](std::size_t j) {
        const double d = std::abs(grid[j] - x);
        return Key{std::max(d, values[j]), d, j};
    };
    const std::size_t c = grid.nearest_index(x);
    Key best = key(c);
    // Any point farther than the best cost cannot match it; equal distance
    // may still tie, so the scan stops only on strict excess.
    for (std::size_t j = c; j-- > 0;) {
        if (std::abs(grid[j] - x) > std::get<0>(best)) break;
        best = std::min(best, key(j));
    }
    for (std::size_t j = c + 1; j < grid.size(); ++j) {
        if (std::abs(grid[j] - x) > std::get<0>(best)) break;
        best = std::min(best, key(j));
    }
    return std::get<2>(best);
}

DescentController::DescentController(SafetyFunction sf)
    : sf_(std::move(sf)), safe_(extract_minimal_safe_set(sf_)) {}

std::size_t DescentController::target_index(double x) const {
    return descent_target(sf_.grid, sf_.values, x);
}

StepResult DescentController::step(const MapSpec& map, const DisturbanceModel& noise, double q,
                                   RngStream& rng) const {
    const double xi = sample_disturbance(noise, rng);
    const double image = map_eval(map, q) + xi;
    return snap(image, xi, target_index(image), sf_.grid);
}

std::optional<int> uncontrolled_escape_time(const MapSpec& map, const DisturbanceModel& noise,
                                            const Grid& region, double q0, RngStream& rng,
                                            int max_steps) {
    if (!region.contains(q0)) throw InvalidInput("initial condition outside Q");
    double q = q0;
    for (int n = 1; n <= max_steps; ++n) {
        q = map_eval(map, q) + sample_disturbance(noise, rng);
        if (!region.contains(q)) return n;
    }
    return std::nullopt;
}

StepResult partial_control_step(const MapSpec& map, const DisturbanceModel& noise,
                                const PartialController& controller, double q, RngStream& rng) {
    return controller.step(map, noise, q, rng);
}

StepResult descent_control_step(const MapSpec& map, const DisturbanceModel& noise,
                                const DescentController& controller, double q, RngStream& rng) {
    return controller.step(map, noise, q, rng);
}

namespace {

OrbitRecord run_uncontrolled(const MapSpec& map, const DisturbanceModel& noise, const Grid& region,
                             double q0, int steps, RngStream& rng) {
    OrbitRecord rec;
    if (!region.contains(q0)) {
        rec.escaped_at = 0;
        return rec;
    }
    double q = q0;
    for (int n = 0; n < steps; ++n) {
        const double xi = sample_disturbance(noise, rng);
        const double next = map_eval(map, q) + xi;
        rec.steps.push_back({n, q, xi, 0.0, next, kNaN, false});
        if (!region.contains(next)) {
            rec.escaped_at = n + 1;
            break;
        }
        q = next;
    }
    return rec;
}

template <typename Controller>
OrbitRecord run_controlled(const Controller& ctl, const SafetyFunction* sf, const Grid& grid,
                           const MapSpec& map, const DisturbanceModel& noise, double q0, int steps,
                           RngStream& rng) {
    if (!grid.contains(q0)) throw InvalidInput("initial condition outside Q");
    const SafeSet& safe = ctl.safe_set();
    OrbitRecord rec;
    if (in_safe(safe, grid, q0)) rec.entered_safe_set_at = 0;
    rec.steps.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    double q = q0;
    for (int n = 0; n < steps; ++n) {
        const StepResult r = ctl.step(map, noise, q, rng);
        const bool safe_next = safe.mask[r.index];
        const double u_next = sf ? sf->values[r.index] : kNaN;
        rec.steps.push_back({n, q, r.noise, r.control, r.next, u_next, safe_next});
        if (safe_next && !rec.entered_safe_set_at) rec.entered_safe_set_at = n + 1;
        q = r.next;
    }
    return rec;
}

}  // namespace

OrbitRecord simulate_orbit(const ControllerKind& kind, const MapSpec& map,
                           const DisturbanceModel& noise, const Grid& region, double q0,
                           int steps, RngStream& rng) {
    if (steps < 0) throw InvalidInput("step count must be >= 0");
    if (!std::isfinite(q0)) throw InvalidInput("initial condition must be finite");
    if (std::holds_alternative<Uncontrolled>(kind))
        return run_uncontrolled(map, noise, region, q0, steps, rng);
    if (const auto* p = std::get_if<PartialController>(&kind))
        return run_controlled(*p, nullptr, p->grid(), map, noise, q0, steps, rng);
    const auto& d = std::get<DescentController>(kind);
    return run_controlled(d, &d.safety(), d.safety().grid, map, noise, q0, steps, rng);
}

EntryResult run_until_safe(const DescentController& controller, const MapSpec& map,
                           const DisturbanceModel& noise, double q0, RngStream& rng,
                           int max_steps) {
    const Grid& grid = controller.safety().grid;
    const SafeSet& safe = controller.safe_set();
    if (!grid.contains(q0)) throw InvalidInput("initial condition outside Q");
    EntryResult out;
    if (in_safe(safe, grid, q0)) return out;
    double q = q0;
    while (true) {
        if (out.steps >= max_steps)
            throw ControllerFailure("orbit from q0=" + std::to_string(q0) + " did not reach the safe set in " +
                                    std::to_string(max_steps) + " steps");
        const StepResult r = controller.step(map, noise, q, rng);
        ++out.steps;
        out.total_control += std::abs(r.control);
        if (safe.mask[r.index]) return out;
        q = r.next;
    }
}

}  // namespace pcontrol
