#pragma once

// Independent reference path for the safety function and the built-in
// invariant suite behind `pcontrol verify`.

#include <cstdint>
#include <string>
#include <vector>

#include "pcontrol/grid.hpp"
#include "pcontrol/safety.hpp"

namespace pcontrol {

// Literal triple-loop evaluation: materializes the distance table
// u[i][s][j] = |f(q[i]) + xi[s] - q[j]| once, then per sweep takes
// u* = max(u, U_k[j]), u** = min over j, U_{k+1}[i] = max over s.
// Memory is N*N*M doubles; meant for small grids.
class TripleLoopOracle {
public:
    TripleLoopOracle(const Grid& grid, const MapSpec& map, const DisturbanceModel& noise);

    std::vector<double> sweep(const std::vector<double>& current) const;
    // Sweeps from U = 0 until two consecutive iterates are identical.
    std::vector<double> solve(int max_sweeps = 100000) const;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<double> table_;  // index (i * m_ + s) * n_ + j
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    int oracle_cases = 20;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

}  // namespace pcontrol
