#pragma once

// Phase-space discretization, the tent-map family and the bounded disturbance.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pcontrol {

// Uniform grid over the closed interval [lower, upper], both endpoints included.
class Grid {
public:
    Grid(double lower, double upper, std::size_t count);

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    std::size_t size() const noexcept { return points_.size(); }
    double spacing() const noexcept { return spacing_; }
    double operator[](std::size_t i) const noexcept { return points_[i]; }
    std::span<const double> points() const noexcept { return points_; }

    bool contains(double x) const noexcept { return x >= lower_ && x <= upper_; }

    // Index minimizing |q[i] - x|; ties go to the lower index.
    std::size_t nearest_index(double x) const;

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_ && a.size() == b.size();
    }

private:
    double lower_;
    double upper_;
    double spacing_;
    std::vector<double> points_;
};

enum class MapKind { tent, constant };

// f in q_{n+1} = f(q_n) + xi_n + u_n.
struct MapSpec {
    MapKind kind = MapKind::tent;
    double parameter = 3.0;  // slope mu for tent, value c for constant

    static MapSpec tent(double mu) { return {MapKind::tent, mu}; }
    static MapSpec constant(double c) { return {MapKind::constant, c}; }

    double operator()(double x) const noexcept {
        if (kind == MapKind::constant) return parameter;
        return x <= 0.5 ? parameter * x : parameter * (1.0 - x);
    }

    friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& name);

// Checked evaluation: throws InvalidInput for non-finite x. Images are never
// clamped to Q.
double map_eval(const MapSpec& map, double x);

// |xi| <= bound. The worst case is discretized into `support_count` evenly
// spaced values; simulation draws are continuous uniform.
struct DisturbanceModel {
    double bound = 0.05;
    int support_count = 101;

    // Spacing of the worst-case support, 2*bound/(M-1); 0 when M == 1.
    double support_step() const noexcept {
        return support_count > 1 ? 2.0 * bound / (support_count - 1) : 0.0;
    }

    friend bool operator==(const DisturbanceModel&, const DisturbanceModel&) = default;
};

// M evenly spaced values from -bound to +bound. M must be odd so that 0 and
// both endpoints belong to the support; M == 1 only when bound == 0.
std::vector<double> disturbance_support(const DisturbanceModel& d);

// Deterministic random substream. The draws are a pure function of
// (master seed, stream index, draw index), so ensembles can be replayed in any
// order. Substream indices used by the library: orbit index for single
// orbits, ic_index * runs + run for ensembles.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    std::uint64_t draws() const noexcept { return draws_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
};

// Uniform draw on [-bound, bound]; advances the stream by one draw.
double sample_disturbance(const DisturbanceModel& d, RngStream& rng);

}  // namespace pcontrol
