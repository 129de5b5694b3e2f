#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pcontrol/errors.hpp"
#include "pcontrol/experiments.hpp"

namespace pcontrol {
namespace {

TEST(Spearman, KnownValues) {
    EXPECT_NEAR(spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-15);
    EXPECT_NEAR(spearman_correlation({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
    // ranks with ties: a -> 1.5,1.5,3 ; b -> 1,2,3 ; r = 0.8660...
    EXPECT_NEAR(spearman_correlation({5, 5, 7}, {1, 2, 3}), std::sqrt(3.0) / 2, 1e-12);
    EXPECT_THROW(spearman_correlation({1}, {1}), InvalidInput);
    EXPECT_THROW(spearman_correlation({1, 2}, {1}), InvalidInput);
}

TEST(Spacing, LogAndLinearEndpoints) {
    const auto lg = log_spaced(0.005, 0.25, 50);
    ASSERT_EQ(lg.size(), 50u);
    EXPECT_EQ(lg.front(), 0.005);
    EXPECT_EQ(lg.back(), 0.25);
    for (std::size_t i = 2; i < lg.size(); ++i) EXPECT_NEAR(lg[i] / lg[i - 1], lg[1] / lg[0], 1e-12);
    const auto ln = linear_spaced(2.0, 15.0, 131);
    EXPECT_EQ(ln.front(), 2.0);
    EXPECT_EQ(ln.back(), 15.0);
    EXPECT_NEAR(ln[1] - ln[0], 0.1, 1e-12);
    EXPECT_THROW(log_spaced(0.0, 1.0, 3), InvalidConfig);
}

class SlopeThreeStats : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        sf_ = new SafetyFunction(compute_safety_function(Grid(0.0, 1.0, 1000), MapSpec::tent(3.0), {0.05, 101}));
        ConvergenceOptions opt;
        opt.ic_count = 1000;
        opt.runs_per_ic = 50;
        opt.seed = 3;
        stats_ = new ConvergenceStats(convergence_stats(*sf_, opt));
    }
    static void TearDownTestSuite() {
        delete stats_;
        delete sf_;
    }
    static SafetyFunction* sf_;
    static ConvergenceStats* stats_;
};
SafetyFunction* SlopeThreeStats::sf_ = nullptr;
ConvergenceStats* SlopeThreeStats::stats_ = nullptr;

TEST_F(SlopeThreeStats, SafeInitialConditionsReportZero) {
    const SafeSet ss = extract_minimal_safe_set(*sf_);
    int checked = 0;
    for (std::size_t c = 0; c < stats_->per_ic.size(); ++c) {
        if (!ss.mask[c]) continue;
        EXPECT_EQ(stats_->per_ic[c].mean_iterations, 0.0);
        EXPECT_EQ(stats_->per_ic[c].mean_control, 0.0);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST_F(SlopeThreeStats, FewIterationsEverywhere) {
    EXPECT_LE(stats_->global_max_iterations, 8);
    EXPECT_GE(stats_->fraction_within(6), 0.95);
    long total = 0;
    for (long h : stats_->histogram) total += h;
    EXPECT_EQ(total, 1000L * 50L);
}

TEST_F(SlopeThreeStats, CentralRegionConvergesFasterThanFlanks) {
    // The centre has the largest U, yet its orbits are reinserted next to the
    // safe set in one jump, so they need fewer steps than the flank peaks.
    double centre = 0.0, flank_peak = 0.0, centre_u = 0.0;
    int nc = 0;
    for (std::size_t c = 0; c < stats_->per_ic.size(); ++c) {
        const IcStats& s = stats_->per_ic[c];
        const double d = std::abs(s.q0 - 0.5);
        if (d < 0.05) {
            centre += s.mean_iterations, ++nc;
            centre_u = std::max(centre_u, sf_->values[c]);
        } else if (d < 0.4) {
            flank_peak = std::max(flank_peak, s.mean_iterations);
        }
    }
    const double max_u = *std::max_element(sf_->values.begin(), sf_->values.end());
    EXPECT_EQ(centre_u, max_u);
    EXPECT_LT(centre / nc, flank_peak);
}

TEST_F(SlopeThreeStats, AverageControlResemblesSafetyFunction) {
    const auto avg = average_control_map(*stats_);
    ASSERT_EQ(avg.size(), 1000u);
    std::vector<double> control, u;
    double largest = 0.0;
    for (const auto& [q0, c] : avg) {
        ASSERT_GE(c, 0.0);
        ASSERT_TRUE(std::isfinite(c));
        control.push_back(c);
        u.push_back(sf_->values[sf_->grid.nearest_index(q0)]);
        largest = std::max(largest, c);
    }
    EXPECT_GT(spearman_correlation(control, u), 0.5);
    EXPECT_GE(largest, min_control_bound(*sf_));
}

TEST_F(SlopeThreeStats, StatisticsAreReproducible) {
    ConvergenceOptions opt;
    opt.ic_count = 50;
    opt.runs_per_ic = 20;
    opt.seed = 9;
    opt.threads = 1;
    const auto a = convergence_stats(*sf_, opt);
    opt.threads = 3;
    const auto b = convergence_stats(*sf_, opt);
    for (std::size_t c = 0; c < a.per_ic.size(); ++c) {
        EXPECT_EQ(a.per_ic[c].mean_iterations, b.per_ic[c].mean_iterations);
        EXPECT_EQ(a.per_ic[c].mean_control, b.per_ic[c].mean_control);
    }
}

TEST(ConvergenceStats, RejectsBadOptions) {
    const auto sf = compute_safety_function(Grid(0.0, 1.0, 100), MapSpec::tent(3.0), {0.05, 11});
    ConvergenceOptions opt;
    opt.runs_per_ic = 0;
    EXPECT_THROW(convergence_stats(sf, opt), InvalidConfig);
}

TEST(Sweeps, RowsAreConsistentAndDeterministic) {
    const GridSpec grid{0.0, 1.0, 400};
    const std::vector<double> xs{0.02, 0.05, 0.1};
    const auto rows = sweep_xi(3.0, xs, grid, 21);
    const auto again = sweep_xi(3.0, xs, grid, 21);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].param, xs[i]);
        const auto sf = compute_safety_function(Grid(0.0, 1.0, 400), MapSpec::tent(3.0), {xs[i], 21});
        EXPECT_EQ(rows[i].u0, min_control_bound(sf));
        EXPECT_EQ(rows[i].iterations, sf.iterations);
        ASSERT_TRUE(rows[i].ratio.has_value());
        EXPECT_LT(*rows[i].ratio, 1.0);
        EXPECT_EQ(rows[i].u0, again[i].u0);
        EXPECT_EQ(rows[i].pieces, again[i].pieces);
        EXPECT_EQ(rows[i].pieces.size(), rows[i].piece_count);
        for (const auto& [lo, hi] : rows[i].pieces) {
            EXPECT_GE(lo, 0.0);
            EXPECT_LE(hi, 1.0);
            EXPECT_LE(lo, hi);
        }
    }
    EXPECT_THROW(sweep_xi(3.0, {0.0}, grid, 21), InvalidConfig);
}

TEST(Sweeps, MuTwoStillNeedsControl) {
    const auto rows = sweep_mu(0.05, {2.0}, {0.0, 1.0, 1000}, 101);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_GT(rows[0].u0, 0.0);
}

TEST(Sweeps, NonConvergenceIsRecordedPerRow) {
    SolveOptions solve;
    solve.max_iterations = 1;
    const auto rows = sweep_mu(0.05, {3.0, 1.5}, {0.0, 1.0, 200}, 11, solve);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].error.has_value());
    EXPECT_TRUE(std::isnan(rows[0].u0));
    EXPECT_EQ(rows[0].iterations, 1);
    // tent(1.5) with noise still needs a few sweeps too, but both rows exist.
    EXPECT_EQ(rows[1].param, 1.5);
}

TEST(Sweeps, SmallNoiseFragmentsTheSafeSet) {
    const auto rows = sweep_xi(3.0, {0.005, 0.25}, {0.0, 1.0, 1000}, 101);
    EXPECT_GT(rows[0].piece_count, rows[1].piece_count);
    EXPECT_LT(rows[0].u0, rows[1].u0);
}

TEST(Sweeps, SupportRefinementReportsU0PerM) {
    const auto rows = sweep_support(3.0, 0.05, {11, 51, 101}, {0.0, 1.0, 500});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[2].param, 101.0);
    for (const auto& r : rows) EXPECT_NEAR(r.u0, 0.03, 0.005);
}

TEST(Transitions, MidpointsOfCountChanges) {
    std::vector<SweepRow> rows(4);
    const double params[] = {1, 2, 3, 4};
    const std::size_t counts[] = {8, 8, 4, 4};
    for (int i = 0; i < 4; ++i) rows[i].param = params[i], rows[i].piece_count = counts[i];
    rows[1].error = "x";  // skipped, so the change is between rows 0 and 2
    EXPECT_EQ(piece_count_transitions(rows), (std::vector<double>{2.0}));
}

TEST(GapHeuristic, PicksRowClosestToXi0) {
    std::vector<SweepRow> rows(3);
    rows[0].u0 = 0.04, rows[0].mean_gap = 0.2;
    rows[1].u0 = 0.02, rows[1].mean_gap = 0.051;
    rows[2].u0 = 0.05;
    const auto g = gap_heuristic(rows, 0.05);
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(g->row, 1u);
    EXPECT_EQ(g->median_u0, 0.04);
    EXPECT_TRUE(g->below_median());
    EXPECT_FALSE(gap_heuristic(std::vector<SweepRow>(2), 0.05).has_value());
}

}  // namespace
}  // namespace pcontrol
