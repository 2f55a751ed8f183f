// Group models with exact integer coordinates, finite regions, set algebra.
//
// Models: Z, Z^d (d<=3), discrete Heisenberg (triples), and a lattice proxy
// for R (integer multiples of a spacing eps; coordinates stored in eps units).
// All four are unimodular, so one Haar weight per element suffices and
// measure(region) = count * weight exactly.
#pragma once

#include <array>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "folnerlab/common.hpp"
#include "folnerlab/rng.hpp"

namespace folnerlab {

using Coord = std::int64_t;

struct GroupElement {
    std::array<Coord, 3> c{0, 0, 0};

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
    friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

inline GroupElement el(Coord a) { return GroupElement{{a, 0, 0}}; }
inline GroupElement el(Coord a, Coord b) { return GroupElement{{a, b, 0}}; }
inline GroupElement el(Coord a, Coord b, Coord c) { return GroupElement{{a, b, c}}; }

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const {
        std::uint64_t h = rng::mix64(static_cast<std::uint64_t>(g.c[0]));
        h = rng::mix64(h ^ static_cast<std::uint64_t>(g.c[1]));
        h = rng::mix64(h ^ static_cast<std::uint64_t>(g.c[2]));
        return static_cast<std::size_t>(h);
    }
};

enum class GroupKind { IntLine, IntGrid, Heisenberg, LatticeR };

namespace detail {
inline Coord checked_add(Coord a, Coord b) {
    Coord r;
    if (__builtin_add_overflow(a, b, &r)) throw UsageError("group op: coordinate overflow");
    return r;
}
inline Coord checked_mul(Coord a, Coord b) {
    Coord r;
    if (__builtin_mul_overflow(a, b, &r)) throw UsageError("group op: coordinate overflow");
    return r;
}
}  // namespace detail

class GroupModel {
public:
    static GroupModel int_line() { return GroupModel(GroupKind::IntLine, 1, 1.0); }
    static GroupModel int_grid(int d) {
        if (d < 1 || d > 3) throw UsageError("Z^d supports 1 <= d <= 3");
        return GroupModel(GroupKind::IntGrid, d, 1.0);
    }
    static GroupModel heisenberg() { return GroupModel(GroupKind::Heisenberg, 3, 1.0); }
    static GroupModel lattice_r(double eps) {
        if (!(eps > 0.0) || eps > 1.0) throw UsageError("latticeR spacing must be in (0,1]");
        return GroupModel(GroupKind::LatticeR, 1, eps);
    }

    // Config strings: "Z", "Z^2", "heis", "latticeR:0.01".
    static GroupModel parse(const std::string& s) {
        if (s == "Z" || s == "Z^1") return int_line();
        if (s == "Z^2") return int_grid(2);
        if (s == "Z^3") return int_grid(3);
        if (s == "heis") return heisenberg();
        if (s.rfind("latticeR:", 0) == 0) {
            try {
                return lattice_r(std::stod(s.substr(9)));
            } catch (const std::invalid_argument&) {
                throw ConfigError("bad latticeR spacing in model string: " + s);
            }
        }
        throw ConfigError("unknown group model: " + s);
    }

    GroupKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double spacing() const { return spacing_; }
    double haar_weight() const { return spacing_; }

    GroupElement identity() const { return GroupElement{}; }

    GroupElement multiply(const GroupElement& x, const GroupElement& y) const {
        using detail::checked_add;
        GroupElement r;
        if (kind_ == GroupKind::Heisenberg) {
            // (a,b,c)*(a',b',c') = (a+a', b+b', c+c'+a*b')
            r.c[0] = checked_add(x.c[0], y.c[0]);
            r.c[1] = checked_add(x.c[1], y.c[1]);
            r.c[2] = checked_add(checked_add(x.c[2], y.c[2]), detail::checked_mul(x.c[0], y.c[1]));
        } else {
            for (int i = 0; i < dim_; ++i) r.c[i] = checked_add(x.c[i], y.c[i]);
        }
        return r;
    }

    GroupElement invert(const GroupElement& x) const {
        GroupElement r;
        if (kind_ == GroupKind::Heisenberg) {
            r.c[0] = -x.c[0];
            r.c[1] = -x.c[1];
            r.c[2] = detail::checked_add(-x.c[2], detail::checked_mul(x.c[0], x.c[1]));
        } else {
            for (int i = 0; i < dim_; ++i) r.c[i] = -x.c[i];
        }
        return r;
    }

    // Real-valued coordinates (eps units scaled back for LatticeR).
    double coord_value(const GroupElement& g, int axis) const {
        return static_cast<double>(g.c[axis]) * spacing_;
    }

    std::string to_string() const {
        switch (kind_) {
            case GroupKind::IntLine: return "Z";
            case GroupKind::IntGrid: return "Z^" + std::to_string(dim_);
            case GroupKind::Heisenberg: return "heis";
            case GroupKind::LatticeR: return "latticeR:" + std::to_string(spacing_);
        }
        return "?";
    }

    friend bool operator==(const GroupModel&, const GroupModel&) = default;

private:
    GroupModel(GroupKind k, int d, double eps) : kind_(k), dim_(d), spacing_(eps) {}

    GroupKind kind_;
    int dim_;
    double spacing_;
};

// Hard budget from the build contract: unions/products larger than this error
// out with a "scale cap" message instead of thrashing memory.
inline constexpr std::size_t kRegionElementCap = 10'000'000;
inline constexpr std::uint64_t kPairWorkCap = 2'000'000'000ull;

// A finite subset of a group model. Elements are kept sorted and unique;
// measure is count * haar weight, exact by construction.
class FiniteRegion {
public:
    explicit FiniteRegion(GroupModel m) : model_(m) {}

    static FiniteRegion from_elements(GroupModel m, std::vector<GroupElement> v) {
        FiniteRegion r(m);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        if (v.size() > kRegionElementCap)
            throw ScaleCapError("scale cap: region would hold " + std::to_string(v.size()) +
                                " elements (cap " + std::to_string(kRegionElementCap) + ")");
        r.elems_ = std::move(v);
        return r;
    }

    // Contiguous 1-d run [lo, hi] in coordinate units (eps units for latticeR).
    static FiniteRegion interval_1d(GroupModel m, Coord lo, Coord hi) {
        if (m.dim() != 1) throw UsageError("interval_1d needs a 1-d model");
        FiniteRegion r(m);
        if (lo > hi) return r;
        std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
        if (n > kRegionElementCap)
            throw ScaleCapError("scale cap: interval of " + std::to_string(n) + " elements");
        r.elems_.reserve(static_cast<std::size_t>(n));
        for (Coord x = lo; x <= hi; ++x) r.elems_.push_back(el(x));
        return r;
    }

    const GroupModel& model() const { return model_; }
    const std::vector<GroupElement>& elements() const { return elems_; }
    std::size_t count() const { return elems_.size(); }
    bool empty() const { return elems_.empty(); }
    double measure() const { return static_cast<double>(elems_.size()) * model_.haar_weight(); }

    bool contains(const GroupElement& g) const {
        return std::binary_search(elems_.begin(), elems_.end(), g);
    }

    const GroupElement& front() const { return elems_.front(); }
    const GroupElement& back() const { return elems_.back(); }

    bool is_contiguous_1d() const {
        if (model_.dim() != 1 || elems_.empty()) return false;
        return elems_.back().c[0] - elems_.front().c[0] + 1 ==
               static_cast<Coord>(elems_.size());
    }

    friend bool operator==(const FiniteRegion& a, const FiniteRegion& b) {
        return a.model_ == b.model_ && a.elems_ == b.elems_;
    }

private:
    GroupModel model_;
    std::vector<GroupElement> elems_;
};

inline void require_same_model(const FiniteRegion& a, const FiniteRegion& b, const char* op) {
    if (!(a.model() == b.model()))
        throw UsageError(std::string(op) + ": group model mismatch (" + a.model().to_string() +
                         " vs " + b.model().to_string() + ")");
}

inline double set_measure(const FiniteRegion& a) { return a.measure(); }

// {a^-1 : a in A}
inline FiniteRegion inverse_set(const FiniteRegion& a) {
    if (a.is_contiguous_1d())
        return FiniteRegion::interval_1d(a.model(), -a.back().c[0], -a.front().c[0]);
    std::vector<GroupElement> out;
    out.reserve(a.count());
    for (const auto& g : a.elements()) out.push_back(a.model().invert(g));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

// {a*b : a in A, b in B}
inline FiniteRegion product_set(const FiniteRegion& a, const FiniteRegion& b) {
    require_same_model(a, b, "product_set");
    const GroupModel& m = a.model();
    if (a.empty() || b.empty()) return FiniteRegion(m);
    if (a.is_contiguous_1d() && b.is_contiguous_1d()) {
        // sums of two full integer intervals form a full interval
        return FiniteRegion::interval_1d(m, detail::checked_add(a.front().c[0], b.front().c[0]),
                                         detail::checked_add(a.back().c[0], b.back().c[0]));
    }
    std::uint64_t pairs = static_cast<std::uint64_t>(a.count()) * b.count();
    if (pairs > kPairWorkCap)
        throw ScaleCapError("scale cap: product_set over " + std::to_string(pairs) + " pairs");
    if (pairs <= (1u << 25)) {
        std::vector<GroupElement> out;
        out.reserve(static_cast<std::size_t>(pairs));
        for (const auto& x : a.elements())
            for (const auto& y : b.elements()) out.push_back(m.multiply(x, y));
        return FiniteRegion::from_elements(m, std::move(out));
    }
    // large products: stream through a hash set so memory tracks the result,
    // not the pair count
    std::unordered_set<GroupElement, GroupElementHash> seen;
    seen.reserve(1u << 20);
    for (const auto& x : a.elements())
        for (const auto& y : b.elements()) {
            seen.insert(m.multiply(x, y));
            if (seen.size() > kRegionElementCap)
                throw ScaleCapError("scale cap: product_set result exceeds " +
                                    std::to_string(kRegionElementCap) + " elements");
        }
    return FiniteRegion::from_elements(m, std::vector<GroupElement>(seen.begin(), seen.end()));
}

inline FiniteRegion left_translate(const GroupElement& g, const FiniteRegion& a) {
    std::vector<GroupElement> out;
    out.reserve(a.count());
    for (const auto& x : a.elements()) out.push_back(a.model().multiply(g, x));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

inline FiniteRegion right_translate(const FiniteRegion& a, const GroupElement& g) {
    std::vector<GroupElement> out;
    out.reserve(a.count());
    for (const auto& x : a.elements()) out.push_back(a.model().multiply(x, g));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

inline FiniteRegion union_regions(const FiniteRegion& a, const FiniteRegion& b) {
    require_same_model(a, b, "union");
    std::vector<GroupElement> out;
    out.reserve(a.count() + b.count());
    std::set_union(a.elements().begin(), a.elements().end(), b.elements().begin(),
                   b.elements().end(), std::back_inserter(out));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

inline FiniteRegion intersect_regions(const FiniteRegion& a, const FiniteRegion& b) {
    require_same_model(a, b, "intersect");
    std::vector<GroupElement> out;
    std::set_intersection(a.elements().begin(), a.elements().end(), b.elements().begin(),
                          b.elements().end(), std::back_inserter(out));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

inline FiniteRegion difference_regions(const FiniteRegion& a, const FiniteRegion& b) {
    require_same_model(a, b, "difference");
    std::vector<GroupElement> out;
    std::set_difference(a.elements().begin(), a.elements().end(), b.elements().begin(),
                        b.elements().end(), std::back_inserter(out));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

inline FiniteRegion symmetric_difference(const FiniteRegion& a, const FiniteRegion& b) {
    require_same_model(a, b, "symmetric_difference");
    std::vector<GroupElement> out;
    std::set_symmetric_difference(a.elements().begin(), a.elements().end(), b.elements().begin(),
                                  b.elements().end(), std::back_inserter(out));
    return FiniteRegion::from_elements(a.model(), std::move(out));
}

}  // namespace folnerlab
