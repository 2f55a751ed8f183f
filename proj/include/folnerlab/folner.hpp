// Folner sequences and their diagnostics: K-boundaries, weak/strong defects,
// temperedness, greedy tempered subsequences, densities along a sequence, and
// the strongification step (replace F_n by K*F_n).
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "folnerlab/group.hpp"

namespace folnerlab {

struct DensityEstimate {
    double inf_value = 0.0;
    double sup_value = 0.0;
    std::int64_t window_lo = 0;
    std::int64_t window_hi = 0;
};

// --- boundary and defects ---------------------------------------------------

// K-boundary: elements a whose translate K*a meets both F and its complement.
// Window-free and exact; equal to the windowed formula for any window
// containing K*(K^-1 F), which tests verify.
inline FiniteRegion k_boundary(const FiniteRegion& K, const FiniteRegion& F) {
    require_same_model(K, F, "k_boundary");
    if (K.empty()) throw UsageError("k_boundary: empty K");
    const GroupModel& m = K.model();
    if (F.empty()) return FiniteRegion(m);

    if (K.is_contiguous_1d() && F.is_contiguous_1d()) {
        Coord k0 = K.front().c[0], k1 = K.back().c[0];
        Coord f0 = F.front().c[0], f1 = F.back().c[0];
        // candidates [f0-k1, f1-k0]; interior (K*a inside F) is [f0-k0, f1-k1]
        if (f1 - f0 < k1 - k0) return FiniteRegion::interval_1d(m, f0 - k1, f1 - k0);
        FiniteRegion lo = FiniteRegion::interval_1d(m, f0 - k1, f0 - k0 - 1);
        FiniteRegion hi = FiniteRegion::interval_1d(m, f1 - k1 + 1, f1 - k0);
        return union_regions(lo, hi);
    }

    FiniteRegion cand = product_set(inverse_set(K), F);
    std::vector<GroupElement> out;
    for (const auto& a : cand.elements()) {
        bool inside = true;
        for (const auto& k : K.elements()) {
            if (!F.contains(m.multiply(k, a))) {
                inside = false;
                break;
            }
        }
        if (!inside) out.push_back(a);
    }
    return FiniteRegion::from_elements(m, std::move(out));
}

// Same boundary through the windowed formula; exists so tests can check
// window independence. W must contain K*(K^-1 F).
inline FiniteRegion k_boundary_windowed(const FiniteRegion& K, const FiniteRegion& F,
                                        const FiniteRegion& W) {
    require_same_model(K, F, "k_boundary_windowed");
    require_same_model(K, W, "k_boundary_windowed");
    if (K.empty()) throw UsageError("k_boundary_windowed: empty K");
    FiniteRegion kinv = inverse_set(K);
    FiniteRegion reach = product_set(kinv, F);
    FiniteRegion outside = difference_regions(W, F);
    return intersect_regions(reach, product_set(kinv, outside));
}

// |F delta K*F| / |F|, computed on exact element counts.
inline double weak_defect(const FiniteRegion& K, const FiniteRegion& F) {
    require_same_model(K, F, "weak_defect");
    if (K.empty() || F.empty()) throw UsageError("weak_defect: empty input");
    FiniteRegion kf = product_set(K, F);
    std::size_t sym = symmetric_difference(F, kf).count();
    return static_cast<double>(sym) / static_cast<double>(F.count());
}

// |bd_K(F)| / |F|
inline double strong_defect(const FiniteRegion& K, const FiniteRegion& F) {
    require_same_model(K, F, "strong_defect");
    if (K.empty() || F.empty()) throw UsageError("strong_defect: empty input");
    return static_cast<double>(k_boundary(K, F).count()) / static_cast<double>(F.count());
}

// --- sequences ---------------------------------------------------------------

namespace detail {
inline Coord ipow2(std::int64_t n) {
    if (n < 0 || n > 62) throw UsageError("ipow2: exponent out of range");
    return Coord(1) << n;
}
// smallest s >= 1 with s^3 >= n
inline Coord icbrt_ceil(std::int64_t n) {
    if (n <= 1) return 1;
    Coord lo = 1, hi = 2097152;  // 2^21, cube 2^63 > any int64 input
    while (lo < hi) {
        Coord mid = lo + (hi - lo) / 2;
        if (mid * mid * mid >= n)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}
}  // namespace detail

// Indexed family N -> F_N, N = 1..n_max. Sets come from a generator and are
// cached; n_max can be astronomically large for lazy families (only the
// indices actually touched are materialized).
class FolnerSeq {
public:
    using Generator = std::function<FiniteRegion(std::int64_t)>;
    // inclusive coordinate bounds of F_n for families whose sets are
    // contiguous 1-d intervals; lets big scans skip materializing every set
    using BoundsFn = std::function<std::pair<Coord, Coord>(std::int64_t)>;

    FolnerSeq(GroupModel m, std::string tag, std::int64_t n_max, Generator gen,
              BoundsFn bounds = nullptr)
        : model_(m), tag_(std::move(tag)), n_max_(n_max), gen_(std::move(gen)),
          bounds_(std::move(bounds)),
          cache_(std::make_shared<std::map<std::int64_t, FiniteRegion>>()) {
        if (n_max_ < 1) throw UsageError("FolnerSeq: n_max must be >= 1");
    }

    const GroupModel& model() const { return model_; }
    const std::string& tag() const { return tag_; }
    std::int64_t n_max() const { return n_max_; }

    bool has_interval_bounds() const { return static_cast<bool>(bounds_); }
    std::pair<Coord, Coord> interval_bounds(std::int64_t n) const {
        if (!bounds_) throw UsageError("FolnerSeq: no interval bounds for this family");
        if (n < 1 || n > n_max_)
            throw UsageError("FolnerSeq index " + std::to_string(n) + " outside 1.." +
                             std::to_string(n_max_));
        return bounds_(n);
    }

    FiniteRegion set(std::int64_t n) const {
        if (n < 1 || n > n_max_)
            throw UsageError("FolnerSeq index " + std::to_string(n) + " outside 1.." +
                             std::to_string(n_max_));
        auto it = cache_->find(n);
        if (it != cache_->end()) return it->second;
        FiniteRegion r = gen_(n);
        if (cache_->size() >= 512) cache_->clear();
        cache_->emplace(n, r);
        return r;
    }

    // F_N = [0, N) in Z
    static FolnerSeq intervals(std::int64_t n_max) {
        GroupModel m = GroupModel::int_line();
        return FolnerSeq(
            m, "interval", n_max,
            [m](std::int64_t n) { return FiniteRegion::interval_1d(m, 0, n - 1); },
            [](std::int64_t n) { return std::pair<Coord, Coord>{0, n - 1}; });
    }

    // F_N = [0, 2^N) in Z
    static FolnerSeq pow2(std::int64_t n_max) {
        if (n_max > 62) throw UsageError("pow2 family: n_max > 62");
        GroupModel m = GroupModel::int_line();
        return FolnerSeq(
            m, "pow2", n_max,
            [m](std::int64_t n) {
                return FiniteRegion::interval_1d(m, 0, detail::ipow2(n) - 1);
            },
            [](std::int64_t n) { return std::pair<Coord, Coord>{0, detail::ipow2(n) - 1}; });
    }

    // F_N = [0, ceil(N^(1/3))) in Z. Sizes plateau over long index runs, which
    // keeps R = 2L interval schemes inside int64 while measures stay small.
    static FolnerSeq cuberoot_intervals(std::int64_t n_max) {
        GroupModel m = GroupModel::int_line();
        return FolnerSeq(
            m, "cuberoot", n_max,
            [m](std::int64_t n) {
                return FiniteRegion::interval_1d(m, 0, detail::icbrt_ceil(n) - 1);
            },
            [](std::int64_t n) { return std::pair<Coord, Coord>{0, detail::icbrt_ceil(n) - 1}; });
    }

    // F_N = [0, N)^d in Z^d
    static FolnerSeq cubes(int d, std::int64_t n_max) {
        GroupModel m = GroupModel::int_grid(d);
        return FolnerSeq(m, "cube", n_max, [m, d](std::int64_t n) {
            std::vector<GroupElement> v;
            v.reserve(static_cast<std::size_t>(std::pow(double(n), d)));
            for (Coord x = 0; x < n; ++x) {
                if (d == 1) {
                    v.push_back(el(x));
                    continue;
                }
                for (Coord y = 0; y < n; ++y) {
                    if (d == 2)
                        v.push_back(el(x, y));
                    else
                        for (Coord z = 0; z < n; ++z) v.push_back(el(x, y, z));
                }
            }
            return FiniteRegion::from_elements(m, std::move(v));
        });
    }

    // F_N = [0,N)^2 x [0,N^2) in the discrete Heisenberg group
    static FolnerSeq heis_boxes(std::int64_t n_max) {
        GroupModel m = GroupModel::heisenberg();
        return FolnerSeq(m, "heisbox", n_max, [m](std::int64_t n) {
            std::vector<GroupElement> v;
            v.reserve(static_cast<std::size_t>(n * n * n * n));
            for (Coord a = 0; a < n; ++a)
                for (Coord b = 0; b < n; ++b)
                    for (Coord c = 0; c < n * n; ++c) v.push_back(el(a, b, c));
            return FiniteRegion::from_elements(m, std::move(v));
        });
    }

    // F_N = [0, N] in eps*Z
    static FolnerSeq lattice_intervals(double eps, std::int64_t n_max) {
        GroupModel m = GroupModel::lattice_r(eps);
        return FolnerSeq(
            m, "latticeinterval", n_max,
            [m, eps](std::int64_t n) {
                Coord hi = static_cast<Coord>(std::llround(double(n) / eps));
                return FiniteRegion::interval_1d(m, 0, hi);
            },
            [eps](std::int64_t n) {
                return std::pair<Coord, Coord>{0, static_cast<Coord>(std::llround(double(n) / eps))};
            });
    }

    // Nowhere-dense-flavored sets in eps*Z: [0, n] minus every P-th lattice
    // point, P = ceil(1/(2 eps)), so every unit window contains a gap. The
    // removed fraction is ~2 eps, the resolution floor of the lattice proxy.
    static FolnerSeq swiss_cheese(double eps, std::int64_t n_max) {
        GroupModel m = GroupModel::lattice_r(eps);
        return FolnerSeq(m, "swiss", n_max, [m, eps](std::int64_t n) {
            Coord hi = static_cast<Coord>(std::llround(double(n) / eps));
            Coord gap = std::max<Coord>(2, static_cast<Coord>(std::ceil(1.0 / (2.0 * eps))));
            std::vector<GroupElement> v;
            v.reserve(static_cast<std::size_t>(hi + 1));
            for (Coord k = 0; k <= hi; ++k)
                if (k % gap != 0) v.push_back(el(k));
            return FiniteRegion::from_elements(m, std::move(v));
        });
    }

    // F_N = [2^N, 2^N + N): deliberately non-tempered test family
    static FolnerSeq shifted_intervals(std::int64_t n_max) {
        if (n_max > 40) throw UsageError("shifted family: n_max > 40");
        GroupModel m = GroupModel::int_line();
        return FolnerSeq(
            m, "shifted", n_max,
            [m](std::int64_t n) {
                Coord base = detail::ipow2(n);
                return FiniteRegion::interval_1d(m, base, base + n - 1);
            },
            [](std::int64_t n) {
                Coord base = detail::ipow2(n);
                return std::pair<Coord, Coord>{base, base + n - 1};
            });
    }

    static FolnerSeq from_sets(GroupModel m, std::vector<FiniteRegion> sets,
                               std::string tag = "user") {
        if (sets.empty()) throw UsageError("from_sets: empty list");
        auto shared = std::make_shared<std::vector<FiniteRegion>>(std::move(sets));
        std::int64_t n = static_cast<std::int64_t>(shared->size());
        return FolnerSeq(m, std::move(tag), n, [shared](std::int64_t i) {
            return (*shared)[static_cast<std::size_t>(i - 1)];
        });
    }

private:
    GroupModel model_;
    std::string tag_;
    std::int64_t n_max_;
    Generator gen_;
    BoundsFn bounds_;
    std::shared_ptr<std::map<std::int64_t, FiniteRegion>> cache_;
};

// --- temperedness -------------------------------------------------------------

// max over 2 <= j <= up_to of |union_{i<j} F_i^-1 F_j| / |F_j|.
// Uses union_{i<j} F_i^-1 F_j = (union_{i<j} F_i^-1) * F_j, materialized
// exactly. Empty-union convention: up_to < 2 gives 0.
inline double tempered_constant(const FolnerSeq& seq, std::int64_t up_to) {
    up_to = std::min(up_to, seq.n_max());
    if (up_to < 2) return 0.0;
    FiniteRegion pool = inverse_set(seq.set(1));
    double worst = 0.0;
    for (std::int64_t j = 2; j <= up_to; ++j) {
        FiniteRegion fj = seq.set(j);
        if (fj.empty()) throw UsageError("tempered_constant: empty F_j");
        FiniteRegion u = product_set(pool, fj);
        worst = std::max(worst, static_cast<double>(u.count()) / static_cast<double>(fj.count()));
        if (j < up_to) pool = union_regions(pool, inverse_set(fj));
    }
    return worst;
}

// Ratio |union_{i<j} F_i^-1 F_j| / |F_j| for each j in 1..up_to (j=1 -> 0).
inline std::vector<double> tempered_ratios(const FolnerSeq& seq, std::int64_t up_to) {
    up_to = std::min(up_to, seq.n_max());
    std::vector<double> out;
    if (up_to < 1) return out;
    out.push_back(0.0);
    FiniteRegion pool = inverse_set(seq.set(1));
    for (std::int64_t j = 2; j <= up_to; ++j) {
        FiniteRegion fj = seq.set(j);
        FiniteRegion u = product_set(pool, fj);
        out.push_back(static_cast<double>(u.count()) / static_cast<double>(fj.count()));
        if (j < up_to) pool = union_regions(pool, inverse_set(fj));
    }
    return out;
}

// Greedy extraction: keep F_j iff the tempered ratio against already-kept
// sets stays below C. Returns kept indices (1-based).
inline std::vector<std::int64_t> tempered_subsequence(const FolnerSeq& seq, double C,
                                                      std::int64_t up_to = -1) {
    if (!(C > 1.0)) throw UsageError("tempered_subsequence: need C > 1");
    if (up_to < 0) up_to = seq.n_max();
    up_to = std::min(up_to, seq.n_max());
    std::vector<std::int64_t> kept;
    FiniteRegion pool(seq.model());
    for (std::int64_t j = 1; j <= up_to; ++j) {
        FiniteRegion fj = seq.set(j);
        if (fj.empty()) continue;
        bool take;
        if (kept.empty()) {
            take = true;  // empty union has measure 0 < C|F_j|
        } else {
            FiniteRegion u = product_set(pool, fj);
            take = static_cast<double>(u.count()) < C * static_cast<double>(fj.count());
        }
        if (take) {
            kept.push_back(j);
            pool = pool.empty() ? inverse_set(fj) : union_regions(pool, inverse_set(fj));
        }
    }
    return kept;
}

// --- strongification -----------------------------------------------------------

struct StrongifyResult {
    FiniteRegion set;            // K * F_n
    double precondition_defect;  // |K^-1 K F_n delta F_n| / |F_n|
    bool precondition_ok;
};

// Weak-to-strong step: hand back K*F_n. Precondition (the weak defect of F_n
// against K^-1 K below eps) is measured and reported; a violation is a
// warning, not an error, and the set is returned regardless.
inline StrongifyResult strongify(const FiniteRegion& K, const FiniteRegion& F, double eps) {
    require_same_model(K, F, "strongify");
    if (K.empty() || F.empty()) throw UsageError("strongify: empty input");
    FiniteRegion kk = product_set(inverse_set(K), K);
    FiniteRegion kkf = product_set(kk, F);
    double defect = static_cast<double>(symmetric_difference(kkf, F).count()) /
                    static_cast<double>(F.count());
    return StrongifyResult{product_set(K, F), defect, defect < eps};
}

// --- densities ------------------------------------------------------------------

// inf/sup of |{g in F_N : pred(g)}| / |F_N| over N in [window_lo, window_hi].
inline DensityEstimate lower_density(const std::function<bool(const GroupElement&)>& pred,
                                     const FolnerSeq& seq, std::int64_t window_lo,
                                     std::int64_t window_hi) {
    window_lo = std::max<std::int64_t>(1, window_lo);
    window_hi = std::min(window_hi, seq.n_max());
    if (window_lo > window_hi) throw UsageError("lower_density: empty window");
    DensityEstimate d{1.0, 0.0, window_lo, window_hi};
    for (std::int64_t n = window_lo; n <= window_hi; ++n) {
        FiniteRegion f = seq.set(n);
        if (f.empty()) throw UsageError("lower_density: empty F_N");
        std::size_t hit = 0;
        for (const auto& g : f.elements())
            if (pred(g)) ++hit;
        double dens = static_cast<double>(hit) / static_cast<double>(f.count());
        d.inf_value = std::min(d.inf_value, dens);
        d.sup_value = std::max(d.sup_value, dens);
    }
    return d;
}

}  // namespace folnerlab
