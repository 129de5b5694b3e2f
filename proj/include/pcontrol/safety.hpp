#pragma once

// Safety function U(q): the smallest per-step control bound that keeps an orbit
// starting at q inside Q forever against the worst bounded disturbance. It is
// the fixed point of the min-max update
//
//   U_{k+1}[i] = max_s min_j max(|f(q[i]) + xi[s] - q[j]|, U_k[j]),  U_0 = 0,
//
// and the safe set at threshold u0 is {q : U(q) <= u0}.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pcontrol/grid.hpp"

namespace pcontrol {

enum class UpdateMethod {
    naive,     // full scan over all j for every (i, s); the reference path
    envelope,  // scan outward from the nearest grid point, stop once |x - q_j| >= best
};

// min_j max(|x - q_j|, values[j]), evaluated with the outward pruned scan.
double envelope_value(double x, const Grid& grid, std::span<const double> values);

// One sweep of the min-max update. Pure; the result does not depend on the
// method or on the number of threads (0 = hardware concurrency).
std::vector<double> bellman_update(std::span<const double> current, const Grid& grid,
                                   const MapSpec& map, const DisturbanceModel& noise,
                                   UpdateMethod method = UpdateMethod::envelope,
                                   unsigned threads = 0);

struct SolveOptions {
    int max_iterations = 10000;
    UpdateMethod method = UpdateMethod::envelope;
    unsigned threads = 0;
};

struct SafetyFunction {
    Grid grid;
    MapSpec map;
    DisturbanceModel noise;
    std::vector<double> values;
    int iterations = 0;       // sweeps until the change vanished
    double tolerance = 0.0;   // convergence threshold on the sup-norm change
    double residual = 0.0;    // sup-norm change of the final sweep

    double at(std::size_t i) const { return values.at(i); }
};

// Sup-norm convergence threshold used by compute_safety_function.
double convergence_tolerance(std::span<const double> values);

// Iterates bellman_update from U = 0 until the sup-norm change is at most
// 1e-15 * max(1, |U|_inf). Throws NonConvergence after max_iterations sweeps
// and std::logic_error if an iterate ever decreases.
SafetyFunction compute_safety_function(const Grid& grid, const MapSpec& map,
                                       const DisturbanceModel& noise,
                                       const SolveOptions& options = {});

double min_control_bound(const SafetyFunction& sf);

// Maximal run of consecutive safe grid indices, inclusive on both ends.
struct Piece {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t length() const noexcept { return last - first + 1; }
    friend bool operator==(const Piece&, const Piece&) = default;
};

struct SafeSet {
    double threshold = 0.0;
    std::vector<bool> mask;
    std::vector<Piece> pieces;

    bool empty() const noexcept { return pieces.empty(); }
    bool contains(std::size_t i) const { return mask.at(i); }
    std::size_t size() const noexcept;  // number of safe grid points
};

// Membership slack for U(q) <= u0 comparisons: 1e-9 + 1e-9 * |u0|.
double membership_tolerance(double u0) noexcept;

std::vector<Piece> pieces_of(const std::vector<bool>& mask);
SafeSet safe_set_from_mask(double threshold, std::vector<bool> mask);

// Throws NoSafeSet when u0 lies below min(U) by more than the membership
// tolerance.
SafeSet extract_safe_set(const SafetyFunction& sf, double u0);
SafeSet extract_minimal_safe_set(const SafetyFunction& sf);

struct PieceStats {
    std::size_t count = 0;
    std::vector<double> widths;   // run length in grid cells times the spacing
    std::vector<double> centers;
    std::vector<double> gaps;     // center-to-center, adjacent pieces
    std::optional<double> mean_gap;
    std::optional<double> min_gap;
    std::optional<double> max_gap;
};

PieceStats piece_stats(const SafeSet& ss, const Grid& grid);

}  // namespace pcontrol
