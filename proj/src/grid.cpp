#include "pcontrol/grid.hpp"

#include <algorithm>
#include <cmath>

#include "pcontrol/errors.hpp"

namespace pcontrol {

Grid::Grid(double lower, double upper, std::size_t count) : lower_(lower), upper_(upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower))
        throw InvalidConfig("grid bounds must be finite with upper > lower");
    if (count < 2) throw InvalidConfig("grid needs at least 2 points");
    const auto last = static_cast<double>(count - 1);
    spacing_ = (upper - lower) / last;
    points_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / last;
        points_[i] = lower * (1.0 - t) + upper * t;
    }
    points_.front() = lower;
    points_.back() = upper;
}

std::size_t Grid::nearest_index(double x) const {
    if (std::isnan(x)) throw InvalidInput("nearest_index of NaN");
    const auto it = std::upper_bound(points_.begin(), points_.end(), x);
    if (it == points_.begin()) return 0;
    if (it == points_.end()) return points_.size() - 1;
    const auto hi = static_cast<std::size_t>(it - points_.begin());
    const std::size_t lo = hi - 1;
    return (x - points_[lo] <= points_[hi] - x) ? lo : hi;
}

std::string to_string(MapKind kind) {
    return kind == MapKind::tent ? "tent" : "constant";
}

MapKind map_kind_from_string(const std::string& name) {
    if (name == "tent") return MapKind::tent;
    if (name == "constant") return MapKind::constant;
    throw InvalidConfig("unknown map kind '" + name + "'");
}

double map_eval(const MapSpec& map, double x) {
    if (!std::isfinite(x)) throw InvalidInput("map_eval: non-finite argument");
    return map(x);
}

std::vector<double> disturbance_support(const DisturbanceModel& d) {
    if (!(d.bound >= 0.0) || !std::isfinite(d.bound))
        throw InvalidConfig("disturbance bound must be finite and >= 0");
    if (d.support_count < 1 || d.support_count % 2 == 0)
        throw InvalidConfig("disturbance support count must be a positive odd integer");
    if (d.support_count == 1) {
        if (d.bound != 0.0)
            throw InvalidConfig("support count 1 cannot represent the endpoints of a nonzero bound");
        return {0.0};
    }
    const int m = d.support_count;
    const int half = m / 2;
    std::vector<double> xs(static_cast<std::size_t>(m));
    // Built from the middle outwards so the list is exactly symmetric.
    for (int k = 0; k <= half; ++k) {
        const double v = d.bound * (static_cast<double>(k) / static_cast<double>(half));
        xs[static_cast<std::size_t>(half + k)] = v;
        xs[static_cast<std::size_t>(half - k)] = -v;
    }
    return xs;
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : seed_(master_seed), stream_(stream_index), engine_(make_engine(master_seed, stream_index)) {}

double RngStream::uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double sample_disturbance(const DisturbanceModel& d, RngStream& rng) {
    const double u = rng.uniform();
    if (d.bound == 0.0) return 0.0;
    return d.bound * (2.0 * u - 1.0);
}

}  // namespace pcontrol
