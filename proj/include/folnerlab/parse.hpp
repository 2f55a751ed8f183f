#pragma once
// Spec strings shared by the command line tools and experiment configs:
// group models, Folner families, weights, systems, observables and target
// sets all have small textual forms so a run is reproducible from its echo.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "folnerlab/covering.hpp"
#include "folnerlab/dynamics.hpp"
#include "folnerlab/folner.hpp"
#include "folnerlab/group.hpp"
#include "folnerlab/weights.hpp"

namespace folnerlab {

namespace parse_detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + what + ": '" + s + "'");
    }
}

inline std::int64_t to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + what + ": '" + s + "'");
    }
}

inline std::uint64_t to_seed(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad seed for " + what + ": '" + s + "'");
    }
}

// "k1=v1,k2=v2" into an ordered map; bare tokens get an empty value
inline std::map<std::string, std::string> kv_pairs(const std::string& s,
                                                   const std::string& what) {
    std::map<std::string, std::string> out;
    if (s.empty()) return out;
    for (const auto& item : split(s, ',')) {
        auto eq = item.find('=');
        std::string key = eq == std::string::npos ? item : item.substr(0, eq);
        std::string val = eq == std::string::npos ? "" : item.substr(eq + 1);
        if (key.empty()) throw ConfigError("empty key in " + what + ": '" + s + "'");
        if (out.count(key)) throw ConfigError("duplicate key '" + key + "' in " + what);
        out[key] = val;
    }
    return out;
}

inline std::string need(const std::map<std::string, std::string>& kv, const std::string& key,
                        const std::string& what) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(what + " needs '" + key + "='");
    return it->second;
}

}  // namespace parse_detail

// "12" -> [12,12], "1..100" -> [1,100]
inline std::pair<std::int64_t, std::int64_t> parse_range(const std::string& s) {
    auto dots = s.find("..");
    if (dots == std::string::npos) {
        auto v = parse_detail::to_int(s, "range");
        return {v, v};
    }
    auto lo = parse_detail::to_int(s.substr(0, dots), "range start");
    auto hi = parse_detail::to_int(s.substr(dots + 2), "range end");
    if (lo > hi) throw ConfigError("empty range: '" + s + "'");
    return {lo, hi};
}

struct SeqSpec {
    FolnerSeq seq;
    std::int64_t lo = 1, hi = 1;  // scale window named in the string, else [1, default]
    std::string text;
};

// Family names: interval, pow2, cuberoot, cubes, heis, lattice, swiss,
// shifted. An optional ":L..R" suffix pins the scale window, e.g. "pow2:1..6".
inline SeqSpec parse_seq(const GroupModel& m, const std::string& spec,
                         std::int64_t default_hi = 100) {
    std::string name = spec;
    std::optional<std::pair<std::int64_t, std::int64_t>> range;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        range = parse_range(spec.substr(colon + 1));
        if (range->first < 1) throw ConfigError("scale window starts at 1: '" + spec + "'");
    }
    std::int64_t hi = range ? range->second : default_hi;
    std::int64_t lo = range ? range->first : 1;
    auto require_kind = [&](GroupKind k, const std::string& allowed) {
        if (m.kind() != k)
            throw ConfigError("sequence '" + name + "' needs model " + allowed + ", got " +
                              m.to_string());
    };
    FolnerSeq seq = [&]() -> FolnerSeq {
        if (name == "interval") {
            require_kind(GroupKind::IntLine, "Z");
            return FolnerSeq::intervals(hi);
        }
        if (name == "pow2") {
            require_kind(GroupKind::IntLine, "Z");
            return FolnerSeq::pow2(hi);
        }
        if (name == "cuberoot") {
            require_kind(GroupKind::IntLine, "Z");
            return FolnerSeq::cuberoot_intervals(hi);
        }
        if (name == "shifted") {
            require_kind(GroupKind::IntLine, "Z");
            return FolnerSeq::shifted_intervals(hi);
        }
        if (name == "cubes") {
            if (m.kind() != GroupKind::IntGrid && m.kind() != GroupKind::IntLine)
                throw ConfigError("sequence 'cubes' needs Z or Z^d, got " + m.to_string());
            return FolnerSeq::cubes(m.dim(), hi);
        }
        if (name == "heis") {
            require_kind(GroupKind::Heisenberg, "heis");
            return FolnerSeq::heis_boxes(hi);
        }
        if (name == "lattice") {
            require_kind(GroupKind::LatticeR, "latticeR");
            return FolnerSeq::lattice_intervals(m.spacing(), hi);
        }
        if (name == "swiss") {
            require_kind(GroupKind::LatticeR, "latticeR");
            return FolnerSeq::swiss_cheese(m.spacing(), hi);
        }
        throw ConfigError("unknown Folner family: '" + name + "'");
    }();
    return SeqSpec{std::move(seq), lo, hi, spec};
}

// "rotation:theta=0.318", "bernoulli:seed=7", "product:theta=0.41,seed=9",
// "skew:theta=0.618". Multi-frequency rotations list thetas with ';'.
inline SystemModel parse_system(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    auto kv = parse_detail::kv_pairs(
        colon == std::string::npos ? "" : spec.substr(colon + 1), "system '" + head + "'");
    auto thetas = [&]() {
        std::vector<double> out;
        for (const auto& t :
             parse_detail::split(parse_detail::need(kv, "theta", "system '" + head + "'"), ';'))
            out.push_back(parse_detail::to_double(t, "theta"));
        return out;
    };
    if (head == "rotation") return SystemModel::rotation(thetas());
    if (head == "bernoulli")
        return SystemModel::bernoulli(
            parse_detail::to_seed(parse_detail::need(kv, "seed", "bernoulli"), "seed"));
    if (head == "product")
        return SystemModel::product(
            SystemModel::rotation(thetas()),
            SystemModel::bernoulli(
                parse_detail::to_seed(parse_detail::need(kv, "seed", "product"), "seed")));
    if (head == "skew") return SystemModel::skew(thetas().at(0));
    throw ConfigError("unknown system: '" + spec + "'");
}

// "cos", "cos:k=2", "sin", "coord", "const:0.5", and products "cos*coord"
inline Observable parse_obs(const std::string& spec) {
    if (auto star = spec.find('*'); star != std::string::npos)
        return Observable::product(parse_obs(spec.substr(0, star)),
                                   parse_obs(spec.substr(star + 1)));
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "cos" || head == "sin") {
        long k = 1;
        if (!rest.empty()) {
            auto kv = parse_detail::kv_pairs(rest, "observable '" + head + "'");
            if (kv.count("k")) k = parse_detail::to_int(kv.at("k"), "k");
        }
        return head == "cos" ? Observable::cos_char(k) : Observable::sin_char(k);
    }
    if (head == "coord") return Observable::coord();
    if (head == "const") {
        if (rest.empty()) throw ConfigError("const observable needs a value, e.g. const:0.5");
        return Observable::constant(parse_detail::to_double(rest, "const observable"));
    }
    throw ConfigError("unknown observable: '" + spec + "'");
}

// CSV weight file: one "coord[,coord[,coord]],value" line per element.
// Values outside [-1,1] are rejected. Blank lines and '#' comments skipped.
inline WeightFn load_weight_csv(const GroupModel& m, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open weight file: " + path);
    std::vector<std::pair<GroupElement, double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = parse_detail::split(line, ',');
        if (std::int64_t(cells.size()) != m.dim() + 1)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(m.dim()) + " coordinates and a value");
        GroupElement g;
        for (int i = 0; i < m.dim(); ++i)
            g.c[i] = parse_detail::to_int(cells[std::size_t(i)], "weight coordinate");
        double v = parse_detail::to_double(cells.back(), "weight value");
        if (std::abs(v) > 1.0)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": weight values must lie in [-1,1]");
        rows.emplace_back(g, v);
    }
    if (rows.empty()) throw ConfigError("weight file is empty: " + path);
    if (m.dim() == 1) {
        Coord lo = rows.front().first.c[0], hi = lo;
        for (const auto& [g, v] : rows) {
            lo = std::min(lo, g.c[0]);
            hi = std::max(hi, g.c[0]);
        }
        if (std::int64_t(rows.size()) == hi - lo + 1) {
            std::vector<double> vals(rows.size(), 0.0);
            std::vector<bool> seen(rows.size(), false);
            for (const auto& [g, v] : rows) {
                auto at = std::size_t(g.c[0] - lo);
                if (seen[at]) throw ConfigError(path + ": duplicate coordinate in weight file");
                seen[at] = true;
                vals[at] = v;
            }
            return WeightFn::from_samples(m, "file:" + path, lo, std::move(vals));
        }
    }
    auto table = std::make_shared<std::unordered_map<GroupElement, double, GroupElementHash>>();
    for (const auto& [g, v] : rows) {
        if (table->count(g)) throw ConfigError(path + ": duplicate coordinate in weight file");
        (*table)[g] = v;
    }
    return WeightFn::from_function(m, "file:" + path, [table, path](const GroupElement& g) {
        auto it = table->find(g);
        if (it == table->end())
            throw DomainWindowError("weight file " + path + " has no value at this element");
        return it->second;
    });
}

// Weight specs. Orbit weights keep their system/observable/start so callers
// can widen the window or resample the start point per replicate:
//   orbit:rotation:theta=0.41421356,obs=cos,x=0
//   orbit:bernoulli:seed=7            (obs defaults to the sign coordinate)
//   pm1:seed=5        independent signs
//   const:0.25        constant weight
//   file:path.csv     table from disk
struct WeightSpec {
    enum class Kind { Orbit, Pm1, Const, File };
    Kind kind = Kind::Const;
    std::string text;
    std::optional<SystemModel> sys;  // orbit only
    std::optional<Observable> obs;
    std::optional<SysPoint> start;
    std::uint64_t key = 0;
    double value = 0.0;
    std::string path;

    // weight on the window [0, window_hi], optionally from a fresh start point
    WeightFn build(const GroupModel& m, Coord window_hi,
                   const std::optional<SysPoint>& start_override = std::nullopt) const {
        switch (kind) {
            case Kind::Orbit: {
                if (!(m == sys->acting_group()))
                    throw ConfigError("orbit weight '" + text + "' acts on " +
                                      sys->acting_group().to_string() + ", not " + m.to_string());
                auto window = FiniteRegion::interval_1d(m, 0, window_hi);
                return orbit_weight(*sys, *obs, start_override ? *start_override : *start,
                                    window);
            }
            case Kind::Pm1:
                return pm1_weight(m, key);
            case Kind::Const: {
                double v = value;
                return WeightFn::from_function(m, text, [v](const GroupElement&) { return v; });
            }
            case Kind::File:
                return load_weight_csv(m, path);
        }
        throw ConfigError("unreachable weight kind");
    }
};

inline WeightSpec parse_weight(const std::string& spec) {
    WeightSpec w;
    w.text = spec;
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "orbit") {
        auto sys_colon = rest.find(':');
        std::string sys_head = rest.substr(0, sys_colon == std::string::npos ? rest.size()
                                                                             : sys_colon);
        auto kv = parse_detail::kv_pairs(
            sys_colon == std::string::npos ? "" : rest.substr(sys_colon + 1),
            "orbit weight '" + sys_head + "'");
        auto take = [&](const std::string& key) -> std::optional<std::string> {
            auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            std::string v = it->second;
            kv.erase(it);
            return v;
        };
        auto obs_spec = take("obs");
        auto x_spec = take("x");
        auto y_spec = take("y");
        // whatever remains belongs to the system spec
        std::string sys_spec = sys_head;
        char sep = ':';
        for (const auto& [key, val] : kv) {
            sys_spec += sep + key + "=" + val;
            sep = ',';
        }
        w.kind = WeightSpec::Kind::Orbit;
        w.sys = parse_system(sys_spec);
        w.obs = obs_spec ? parse_obs(*obs_spec)
                         : (w.sys->kind() == SysKind::Bernoulli ? Observable::coord()
                                                                : Observable::cos_char());
        SysPoint x = w.sys->seed_point();
        if (x_spec) x.x[0] = parse_detail::to_double(*x_spec, "orbit start x");
        if (y_spec) x.x[1] = parse_detail::to_double(*y_spec, "orbit start y");
        w.start = x;
        return w;
    }
    if (head == "pm1") {
        auto kv = parse_detail::kv_pairs(rest, "pm1 weight");
        w.kind = WeightSpec::Kind::Pm1;
        w.key = parse_detail::to_seed(parse_detail::need(kv, "seed", "pm1 weight"), "seed");
        return w;
    }
    if (head == "const") {
        if (rest.empty()) throw ConfigError("const weight needs a value, e.g. const:0");
        w.kind = WeightSpec::Kind::Const;
        w.value = parse_detail::to_double(rest, "const weight");
        if (std::abs(w.value) > 1.0) throw ConfigError("const weight must lie in [-1,1]");
        return w;
    }
    if (head == "file") {
        if (rest.empty()) throw ConfigError("file weight needs a path");
        w.kind = WeightSpec::Kind::File;
        w.path = rest;
        return w;
    }
    throw ConfigError("unknown weight spec: '" + spec + "'");
}

// Region specs for K sets and targets: "0,1" element list (';' separates
// elements in higher dimensions), "a..b" interval.
inline FiniteRegion parse_region(const GroupModel& m, const std::string& spec) {
    if (spec.find("..") != std::string::npos) {
        auto [lo, hi] = parse_range(spec);
        return FiniteRegion::interval_1d(m, lo, hi);
    }
    std::vector<GroupElement> elems;
    for (const auto& token : parse_detail::split(spec, ';')) {
        auto coords = parse_detail::split(token, ',');
        if (m.dim() == 1) {
            // 1-d convenience: "0,1,2" is a list of single-coordinate elements
            for (const auto& c : coords) elems.push_back(el(parse_detail::to_int(c, "region")));
            continue;
        }
        if (std::int64_t(coords.size()) != m.dim())
            throw ConfigError("region element '" + token + "' needs " + std::to_string(m.dim()) +
                              " coordinates");
        GroupElement g;
        for (int i = 0; i < m.dim(); ++i)
            g.c[i] = parse_detail::to_int(coords[std::size_t(i)], "region");
        elems.push_back(g);
    }
    if (elems.empty()) throw ConfigError("empty region spec");
    return FiniteRegion::from_elements(m, std::move(elems));
}

// Target sets for the covering sampler, one per scale in [lo, hi]:
//   random:density=0.3,window=1000,seed=11   fresh subset of [0,window) per scale
//   interval:0..999                          the same interval at every scale
inline std::vector<FiniteRegion> parse_targets(const GroupModel& m, const std::string& spec,
                                               std::int64_t lo, std::int64_t hi) {
    if (m.dim() != 1)
        throw ConfigError("target specs are 1-d; use the library API for other models");
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    std::vector<FiniteRegion> out;
    if (head == "random") {
        auto kv = parse_detail::kv_pairs(rest, "random targets");
        double density =
            parse_detail::to_double(parse_detail::need(kv, "density", "random targets"),
                                    "density");
        auto window = parse_detail::to_int(parse_detail::need(kv, "window", "random targets"),
                                           "window");
        auto seed = parse_detail::to_seed(parse_detail::need(kv, "seed", "random targets"),
                                          "seed");
        if (!(density >= 0.0 && density <= 1.0))
            throw ConfigError("target density must lie in [0,1]");
        if (window < 1) throw ConfigError("target window must be positive");
        for (std::int64_t n = lo; n <= hi; ++n) {
            auto s = rng::derive_stream(seed, {0x74617267ull, std::uint64_t(n)});
            std::vector<GroupElement> pts;
            for (Coord g = 0; g < window; ++g)
                if (s.next_unit() < density) pts.push_back(el(g));
            out.push_back(FiniteRegion::from_elements(m, std::move(pts)));
        }
        return out;
    }
    if (head == "interval") {
        auto [a, b] = parse_range(rest);
        for (std::int64_t n = lo; n <= hi; ++n)
            out.push_back(FiniteRegion::interval_1d(m, a, b));
        return out;
    }
    throw ConfigError("unknown targets spec: '" + spec + "'");
}

}  // namespace folnerlab
