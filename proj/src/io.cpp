#include "pcontrol/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "pcontrol/errors.hpp"

namespace pcontrol {

std::string format_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_real(const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw InvalidInput("not a real number: '" + text + "'");
    return v;
}

namespace {

const char* const kMagic = "# pcontrol-safety";
const char* const kRowHeader = "i,q,U";

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

void write_safety_function(std::ostream& os, const SafetyFunction& sf) {
    os << kMagic << '\n'
       << "# format-version=" << kSafetyFormatVersion << '\n'
       << "# map=" << to_string(sf.map.kind) << '\n'
       << "# parameter=" << format_real(sf.map.parameter) << '\n'
       << "# lower=" << format_real(sf.grid.lower()) << '\n'
       << "# upper=" << format_real(sf.grid.upper()) << '\n'
       << "# xi0=" << format_real(sf.noise.bound) << '\n'
       << "# N=" << sf.grid.size() << '\n'
       << "# M=" << sf.noise.support_count << '\n'
       << "# k=" << sf.iterations << '\n'
       << "# tolerance=" << format_real(sf.tolerance) << '\n'
       << "# residual=" << format_real(sf.residual) << '\n'
       << "# min_U=" << format_real(min_control_bound(sf)) << '\n'
       << kRowHeader << '\n';
    for (std::size_t i = 0; i < sf.values.size(); ++i)
        os << i << ',' << format_real(sf.grid[i]) << ',' << format_real(sf.values[i]) << '\n';
}

SafetyFunction read_safety_function(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(is, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line() || line != kMagic) throw FormatError("missing '# pcontrol-safety' header", 1);

    std::map<std::string, std::pair<std::string, std::size_t>> meta;
    bool saw_rows = false;
    while (next_line()) {
        if (line == kRowHeader) {
            saw_rows = true;
            break;
        }
        if (line.rfind("# ", 0) != 0) throw FormatError("expected '# key=value' metadata", lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("metadata without '='", lineno);
        meta[line.substr(2, eq - 2)] = {line.substr(eq + 1), lineno};
    }
    if (!saw_rows) throw FormatError("missing 'i,q,U' column header", lineno + 1);

    auto field = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
        const auto it = meta.find(key);
        if (it == meta.end()) throw FormatError("missing metadata key '" + key + "'", lineno);
        return it->second;
    };
    auto real = [&](const std::string& key) {
        const auto& [text, at] = field(key);
        try {
            return parse_real(text);
        } catch (const InvalidInput&) {
            throw FormatError("bad value for '" + key + "'", at);
        }
    };
    auto integer = [&](const std::string& key) {
        const auto& [text, at] = field(key);
        long long v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw FormatError("bad integer for '" + key + "'", at);
        return v;
    };

    if (const auto& [text, at] = field("format-version"); text != std::to_string(kSafetyFormatVersion))
        throw FormatError("unsupported format-version " + text, at);

    MapSpec map;
    try {
        map.kind = map_kind_from_string(field("map").first);
    } catch (const InvalidConfig&) {
        throw FormatError("unknown map kind", field("map").second);
    }
    map.parameter = real("parameter");
    const long long n = integer("N");
    if (n < 2) throw FormatError("N must be >= 2", field("N").second);
    const Grid grid = [&] {
        try {
            return Grid(real("lower"), real("upper"), static_cast<std::size_t>(n));
        } catch (const InvalidConfig& e) {
            throw FormatError(e.what(), field("lower").second);
        }
    }();
    const DisturbanceModel noise{real("xi0"), static_cast<int>(integer("M"))};

    SafetyFunction sf{grid, map, noise, {}, static_cast<int>(integer("k")), real("tolerance"), real("residual")};
    sf.values.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!next_line()) throw FormatError("missing row " + std::to_string(i) + " of " + std::to_string(n), lineno + 1);
        const auto cols = split(line, ',');
        if (cols.size() != 3) throw FormatError("expected 3 columns", lineno);
        if (cols[0] != std::to_string(i)) throw FormatError("expected row index " + std::to_string(i), lineno);
        try {
            if (parse_real(cols[1]) != grid[i]) throw FormatError("grid point does not match metadata", lineno);
            const double u = parse_real(cols[2]);
            if (!(u >= 0.0)) throw FormatError("negative or NaN U value", lineno);
            sf.values.push_back(u);
        } catch (const InvalidInput& e) {
            throw FormatError(e.what(), lineno);
        }
    }
    while (next_line())
        if (!line.empty()) throw FormatError("more rows than N=" + std::to_string(n), lineno);
    return sf;
}

void store_safety_function(const SafetyFunction& sf, const std::filesystem::path& path) {
    if (!(sf.residual <= sf.tolerance)) throw InvalidInput("refusing to store an unconverged safety function");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_safety_function(os, sf);
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

SafetyFunction load_safety_function(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return read_safety_function(is);
}

void write_orbit_csv(std::ostream& os, const OrbitRecord& orbit) {
    os << "n,q,xi,u,q_next,U_next,in_safe\n";
    for (const OrbitStep& s : orbit.steps) {
        os << s.n << ',' << format_real(s.q) << ',' << format_real(s.xi) << ',' << format_real(s.u) << ','
           << format_real(s.q_next) << ',' << format_real(s.u_next) << ',' << (s.in_safe ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "param,u0,ratio,k,n_pieces,mean_gap,pieces\n";
    for (const SweepRow& r : rows) {
        os << format_real(r.param) << ',' << format_real(r.u0) << ',' << optional_real(r.ratio) << ','
           << r.iterations << ',' << r.piece_count << ',' << optional_real(r.mean_gap) << ',';
        for (std::size_t p = 0; p < r.pieces.size(); ++p) {
            if (p) os << ';';
            os << format_real(r.pieces[p].first) << ':' << format_real(r.pieces[p].second);
        }
        os << '\n';
    }
}

void write_stats_csv(std::ostream& os, const ConvergenceStats& stats) {
    os << "q0,mean_iters,mean_control,runs\n";
    for (const IcStats& s : stats.per_ic)
        os << format_real(s.q0) << ',' << format_real(s.mean_iterations) << ',' << format_real(s.mean_control)
           << ',' << s.runs << '\n';
}

}  // namespace pcontrol
