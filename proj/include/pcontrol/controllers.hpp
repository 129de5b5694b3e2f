#pragma once

// Orbit simulation under three policies:
//   - uncontrolled: q_{n+1} = f(q_n) + xi_n, until the orbit leaves Q;
//   - partial: snap the noisy image onto the nearest safe grid point;
//   - descent: move to the grid point minimizing max(|u|, U(target)), which
//     makes the safe set an attractor for every initial condition in Q.
// Controls act after the disturbance is realized.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pcontrol/grid.hpp"
#include "pcontrol/safety.hpp"

namespace pcontrol {

struct StepResult {
    double next = 0.0;
    double control = 0.0;
    double noise = 0.0;
    std::size_t index = 0;  // grid index of `next` for controlled steps
};

struct OrbitStep {
    int n = 0;
    double q = 0.0;
    double xi = 0.0;
    double u = 0.0;
    double q_next = 0.0;
    double u_next = 0.0;  // U(q_{n+1}); NaN when undefined (no safety function or outside Q)
    bool in_safe = false;
};

struct OrbitRecord {
    std::vector<OrbitStep> steps;
    std::optional<int> escaped_at;           // first n with q_n outside Q
    std::optional<int> entered_safe_set_at;  // first n with q_n in the safe set
};

// Sorted safe grid points for nearest-safe-point queries.
class PartialController {
public:
    PartialController(Grid grid, SafeSet safe);

    // Nearest safe grid index to x, ties to the lower index.
    std::size_t target_index(double x) const;
    StepResult step(const MapSpec& map, const DisturbanceModel& noise, double q,
                    RngStream& rng) const;

    const Grid& grid() const noexcept { return grid_; }
    const SafeSet& safe_set() const noexcept { return safe_; }

private:
    Grid grid_;
    SafeSet safe_;
    std::vector<std::size_t> safe_indices_;
    std::vector<double> safe_points_;
};

class DescentController {
public:
    explicit DescentController(SafetyFunction sf);

    // argmin_i max(|q_i - x|, U_i); ties prefer the smaller |q_i - x|, then
    // the lower index.
    std::size_t target_index(double x) const;
    StepResult step(const MapSpec& map, const DisturbanceModel& noise, double q,
                    RngStream& rng) const;

    const SafetyFunction& safety() const noexcept { return sf_; }
    const SafeSet& safe_set() const noexcept { return safe_; }

private:
    SafetyFunction sf_;
    SafeSet safe_;
};

// Standalone form of the descent choice over an explicit grid/value pair.
std::size_t descent_target(const Grid& grid, std::span<const double> values, double x);

struct Uncontrolled {};
using ControllerKind = std::variant<Uncontrolled, PartialController, DescentController>;

// First n with f(q_{n-1}) + xi_{n-1} outside Q, or nothing if the orbit
// survives max_steps map applications.
std::optional<int> uncontrolled_escape_time(const MapSpec& map, const DisturbanceModel& noise,
                                            const Grid& region, double q0, RngStream& rng,
                                            int max_steps);

StepResult partial_control_step(const MapSpec& map, const DisturbanceModel& noise,
                                const PartialController& controller, double q, RngStream& rng);
StepResult descent_control_step(const MapSpec& map, const DisturbanceModel& noise,
                                const DescentController& controller, double q, RngStream& rng);

// Runs `steps` iterations (fewer if the uncontrolled orbit escapes). `region`
// supplies Q for the uncontrolled kind; controlled kinds use their own grid.
OrbitRecord simulate_orbit(const ControllerKind& kind, const MapSpec& map,
                           const DisturbanceModel& noise, const Grid& region, double q0,
                           int steps, RngStream& rng);

struct EntryResult {
    int steps = 0;             // map applications until q_n is in the safe set
    double total_control = 0;  // sum of |u_n| over those steps
};

// Descent orbit from q0 until it first lies in the safe set. Throws
// ControllerFailure if that takes more than max_steps.
EntryResult run_until_safe(const DescentController& controller, const MapSpec& map,
                           const DisturbanceModel& noise, double q0, RngStream& rng,
                           int max_steps);

}  // namespace pcontrol
