#pragma once

// Figure-level experiments: convergence statistics of the descent controller
// over a grid of initial conditions, and safe-set sweeps over the disturbance
// bound and the tent slope.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcontrol/grid.hpp"
#include "pcontrol/safety.hpp"

namespace pcontrol {

struct IcStats {
    double q0 = 0.0;
    double mean_iterations = 0.0;
    double mean_control = 0.0;  // mean over runs of sum|u_n| / steps-to-entry
    int runs = 0;
    int max_iterations = 0;
};

struct ConvergenceStats {
    std::vector<IcStats> per_ic;
    int global_max_iterations = 0;
    // histogram[k] = number of orbits that needed exactly k steps
    std::vector<long> histogram;

    double fraction_within(int steps) const;
};

struct ConvergenceOptions {
    std::size_t ic_count = 1000;
    int runs_per_ic = 1000;
    int max_steps = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

// Run r of initial condition c uses substream c * runs_per_ic + r.
ConvergenceStats convergence_stats(const SafetyFunction& sf, const ConvergenceOptions& options);

std::vector<std::pair<double, double>> average_control_map(const ConvergenceStats& stats);

// Spearman rank correlation (average ranks for ties). Throws InvalidInput on
// length mismatch or fewer than two samples.
double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct SweepRow {
    double param = 0.0;
    double u0 = 0.0;
    std::optional<double> ratio;  // u0 / xi0, only when xi0 > 0
    int iterations = 0;
    std::size_t piece_count = 0;
    std::optional<double> mean_gap;
    std::vector<std::pair<double, double>> pieces;  // [q_lo, q_hi] per piece
    std::optional<std::string> error;               // set when the solve failed
};

struct GridSpec {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t count = 1000;
};

SweepRow sweep_row(double param, const Grid& grid, const MapSpec& map,
                   const DisturbanceModel& noise, const SolveOptions& solve = {});

// Rows are ordered by the parameter values as given. A row whose solve does not
// converge carries the error instead of aborting the sweep.
std::vector<SweepRow> sweep_xi(double mu, const std::vector<double>& xi_values, const GridSpec& grid,
                               int support_count, const SolveOptions& solve = {});
std::vector<SweepRow> sweep_mu(double xi0, const std::vector<double>& mu_values, const GridSpec& grid,
                               int support_count, const SolveOptions& solve = {});
// u0 as a function of the disturbance support size M (param = M).
std::vector<SweepRow> sweep_support(double mu, double xi0, const std::vector<int>& m_values,
                                    const GridSpec& grid, const SolveOptions& solve = {});

std::vector<double> log_spaced(double lo, double hi, std::size_t count);
std::vector<double> linear_spaced(double lo, double hi, std::size_t count);

// Parameter midpoints between consecutive successful rows whose piece counts
// differ.
std::vector<double> piece_count_transitions(const std::vector<SweepRow>& rows);

// Measurement of the mean-gap heuristic: the row whose mean gap is closest to
// xi0 compared with the median u0 of the sweep.
struct GapHeuristic {
    std::size_t row = 0;
    double gap = 0.0;
    double u0 = 0.0;
    double median_u0 = 0.0;
    bool below_median() const noexcept { return u0 < median_u0; }
};
std::optional<GapHeuristic> gap_heuristic(const std::vector<SweepRow>& rows, double xi0);

}  // namespace pcontrol
