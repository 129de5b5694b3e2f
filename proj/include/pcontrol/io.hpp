#pragma once

// CSV persistence. Reals are written with 17 significant digits so every
// double survives a write/read cycle unchanged.
//
// Safety-function file:
//   # pcontrol-safety
//   # format-version=1
//   # map=tent
//   # parameter=3
//   # lower=0
//   # upper=1
//   # xi0=0.050000000000000003
//   # N=1000
//   # M=101
//   # k=6
//   # tolerance=...
//   # residual=...
//   # min_U=...
//   i,q,U
//   0,0,0.12...

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcontrol/controllers.hpp"
#include "pcontrol/experiments.hpp"
#include "pcontrol/safety.hpp"

namespace pcontrol {

inline constexpr int kSafetyFormatVersion = 1;

std::string format_real(double x);
double parse_real(const std::string& text);

void write_safety_function(std::ostream& os, const SafetyFunction& sf);
SafetyFunction read_safety_function(std::istream& is);

// Throws InvalidInput for an unconverged function, std::runtime_error on I/O
// failure.
void store_safety_function(const SafetyFunction& sf, const std::filesystem::path& path);
// Throws FormatError naming the offending line.
SafetyFunction load_safety_function(const std::filesystem::path& path);

// n,q,xi,u,q_next,U_next,in_safe
void write_orbit_csv(std::ostream& os, const OrbitRecord& orbit);
// param,u0,ratio,k,n_pieces,mean_gap,pieces
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
// q0,mean_iters,mean_control,runs
void write_stats_csv(std::ostream& os, const ConvergenceStats& stats);

}  // namespace pcontrol
