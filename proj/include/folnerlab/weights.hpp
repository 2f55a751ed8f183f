// Weight functions c : G -> [-1, 1] and the correlation machinery around
// them: averaged self-correlations along a Folner sequence, good sets of
// shifts, the decay certificate check_perp, and exceptional sets against a
// second function.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "folnerlab/folner.hpp"
#include "folnerlab/rng.hpp"

namespace folnerlab {

class WeightFn {
public:
    using Fn = std::function<double(const GroupElement&)>;

    static WeightFn from_function(GroupModel m, std::string tag, Fn fn) {
        WeightFn w;
        w.model_ = m;
        w.tag_ = std::move(tag);
        w.fn_ = std::move(fn);
        return w;
    }

    // Dense samples on the coordinate window [lo, lo + values.size()) of a
    // 1-d model. Evaluation outside the window is a domain error, values
    // outside [-1, 1] are rejected up front.
    static WeightFn from_samples(GroupModel m, std::string tag, Coord lo,
                                 std::vector<double> values) {
        if (m.dim() != 1)
            throw ConfigError("sampled weights need a one dimensional model");
        if (values.empty()) throw ConfigError("sampled weight with no values");
        for (double v : values) check_value(v);
        WeightFn w;
        w.model_ = m;
        w.tag_ = std::move(tag);
        w.lo_ = lo;
        w.vals_ = std::move(values);
        w.windowed_ = true;
        return w;
    }

    const GroupModel& model() const { return model_; }
    const std::string& tag() const { return tag_; }
    bool windowed() const { return windowed_; }
    Coord window_lo() const { return lo_; }
    Coord window_hi() const { return lo_ + static_cast<Coord>(vals_.size()) - 1; }

    double operator()(const GroupElement& g) const {
        if (windowed_) {
            Coord x = g.c[0];
            if (x < lo_ || x >= lo_ + static_cast<Coord>(vals_.size()))
                throw DomainWindowError("weight '" + tag_ + "' evaluated at coordinate " +
                                        std::to_string(x) + " outside [" + std::to_string(lo_) +
                                        ", " + std::to_string(window_hi()) + "]");
            return vals_[static_cast<std::size_t>(x - lo_)];
        }
        double v = fn_(g);
        check_value(v);
        return v;
    }

private:
    static void check_value(double v) {
        if (!(std::abs(v) <= 1.0 + 1e-12))
            throw ConfigError("weight value " + std::to_string(v) + " outside [-1, 1]");
    }

    GroupModel model_ = GroupModel::int_line();
    std::string tag_;
    Fn fn_;
    bool windowed_ = false;
    Coord lo_ = 0;
    std::vector<double> vals_;
};

// iid +-1 path keyed off a seed; defined on all of a 1-d model
inline WeightFn pm1_weight(GroupModel m, std::uint64_t key) {
    if (m.dim() != 1) throw ConfigError("pm1_weight needs a one dimensional model");
    return WeightFn::from_function(m, "pm1:" + std::to_string(key), [key](const GroupElement& g) {
        return rng::pm1_at(key, g.c[0]);
    });
}

// E_{g in F} c(g) c(g a), the averaged self-correlation at shift a.
inline double self_correlation(const WeightFn& c, const FiniteRegion& F, const GroupElement& a) {
    if (!(c.model() == F.model()))
        throw UsageError("self_correlation: weight and region models differ");
    if (F.empty()) throw UsageError("self_correlation: empty region");
    const GroupModel& m = F.model();
    CompensatedSum s;
    for (const auto& g : F.elements()) s.add(c(g) * c(m.multiply(g, a)));
    return s.value() / static_cast<double>(F.count());
}

// --- incremental scan support -------------------------------------------------

namespace detail {

// Flattened increments of a nested sequence prefix: added[offset[n-1]..offset[n])
// is F_n minus F_{n-1}. Rejects non-nested input.
struct NestedIncrements {
    std::vector<GroupElement> added;
    std::vector<std::size_t> offset;  // size H+1, offset[0] = 0
};

inline NestedIncrements nested_increments(const FolnerSeq& seq, std::int64_t H) {
    NestedIncrements inc;
    inc.offset.push_back(0);

    // interval families grow by coordinate ranges; never materialize the sets
    if (seq.has_interval_bounds()) {
        auto [lo, hi] = seq.interval_bounds(1);
        auto [flo, fhi] = seq.interval_bounds(H);
        if (fhi - flo + 1 > kRegionElementCap)
            throw ScaleCapError("nested scan would touch " + std::to_string(fhi - flo + 1) +
                                " elements");
        for (Coord x = lo; x <= hi; ++x) inc.added.push_back(el(x));
        inc.offset.push_back(inc.added.size());
        for (std::int64_t n = 2; n <= H; ++n) {
            auto [nlo, nhi] = seq.interval_bounds(n);
            if (nlo > lo || nhi < hi)
                throw UsageError("sequence is not nested at index " + std::to_string(n));
            for (Coord x = nlo; x < lo; ++x) inc.added.push_back(el(x));
            for (Coord x = hi + 1; x <= nhi; ++x) inc.added.push_back(el(x));
            inc.offset.push_back(inc.added.size());
            lo = nlo;
            hi = nhi;
        }
        return inc;
    }

    FiniteRegion prev(seq.model());
    for (std::int64_t n = 1; n <= H; ++n) {
        FiniteRegion cur = seq.set(n);
        FiniteRegion delta = difference_regions(cur, prev);
        if (prev.count() + delta.count() != cur.count())
            throw UsageError("sequence is not nested at index " + std::to_string(n));
        for (const auto& g : delta.elements()) inc.added.push_back(g);
        inc.offset.push_back(inc.added.size());
        prev = std::move(cur);
    }
    return inc;
}

// every-k-th element of a region, first element included
inline std::vector<GroupElement> strided_probe(const FiniteRegion& F, std::int64_t cap) {
    if (cap < 1) throw UsageError("probe cap must be >= 1");
    const auto& v = F.elements();
    std::size_t stride =
        (v.size() + static_cast<std::size_t>(cap) - 1) / static_cast<std::size_t>(cap);
    if (stride == 0) stride = 1;
    std::vector<GroupElement> out;
    for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
    return out;
}

// weight values over a contiguous coordinate range of a 1-d model
struct DenseWeight1D {
    Coord base = 0;
    std::vector<double> v;
    double at(Coord x) const { return v[static_cast<std::size_t>(x - base)]; }
};

inline DenseWeight1D materialize_1d(const WeightFn& c, Coord lo, Coord hi) {
    DenseWeight1D d;
    d.base = lo;
    d.v.resize(static_cast<std::size_t>(hi - lo + 1));
    for (Coord x = lo; x <= hi; ++x) d.v[static_cast<std::size_t>(x - lo)] = c(el(x));
    return d;
}

constexpr Coord kDenseRangeCap = 8'000'000;  // ~64 MB of doubles

}  // namespace detail

// Scale of the last violation |E_{g in F_n} c(g) c(g a)| >= delta over
// n = 1..H, or 0 when the shift a never violates. One incremental pass.
inline std::int64_t last_violation(const WeightFn& c, const detail::NestedIncrements& inc,
                                   const GroupModel& m, double delta, const GroupElement& a) {
    double s = 0.0;
    std::int64_t last = 0;
    const std::int64_t H = static_cast<std::int64_t>(inc.offset.size()) - 1;
    for (std::int64_t n = 1; n <= H; ++n) {
        for (std::size_t t = inc.offset[n - 1]; t < inc.offset[n]; ++t) {
            const GroupElement& g = inc.added[t];
            s += c(g) * c(m.multiply(g, a));
        }
        if (std::abs(s) >= delta * static_cast<double>(inc.offset[n])) last = n;
    }
    return last;
}

// {a in window : |E_{g in F_n} c(g) c(g a)| < delta for every n in [L, R]}
inline FiniteRegion good_set(const WeightFn& c, const FolnerSeq& seq, double delta,
                             std::int64_t L, std::int64_t R, const FiniteRegion& window) {
    if (L < 1 || R < L) throw UsageError("good_set: need 1 <= L <= R");
    if (R > seq.n_max()) throw UsageError("good_set: R beyond the sequence");
    auto inc = detail::nested_increments(seq, R);
    const GroupModel& m = seq.model();
    std::vector<GroupElement> out;
    for (const auto& a : window.elements()) {
        double s = 0.0;
        bool ok = true;
        for (std::int64_t n = 1; n <= R && ok; ++n) {
            for (std::size_t t = inc.offset[n - 1]; t < inc.offset[n]; ++t) {
                const GroupElement& g = inc.added[t];
                s += c(g) * c(m.multiply(g, a));
            }
            if (n >= L && std::abs(s) >= delta * static_cast<double>(inc.offset[n])) ok = false;
        }
        if (ok) out.push_back(a);
    }
    return FiniteRegion::from_elements(m, std::move(out));
}

// --- decay certificate ----------------------------------------------------------

struct PerpOptions {
    std::int64_t probe_cap = 2048;      // max shifts tested per density window
    double ladder_cap_fraction = 0.25;  // candidate thresholds stay <= H * this
    int density_windows = 4;            // scales H/4, H/2, 3H/4, H (deduplicated)
};

struct PerpWindowReport {
    std::int64_t scale = 0;     // sequence index the density is measured in
    std::int64_t probes = 0;    // shifts tested
    std::int64_t stride = 1;    // probe subsampling stride inside F_scale
    double good_density = 0.0;  // fraction with last violation below n_delta
};

struct PerpVerdict {
    bool passed = false;
    double delta = 0.0;
    std::int64_t horizon = 0;
    std::int64_t n_delta = 0;     // smallest threshold on the ladder that works, 0 if none
    std::int64_t ladder_cap = 0;  // largest threshold tried
    std::vector<PerpWindowReport> windows;
    double worst_density = 0.0;  // min over windows at n_delta (at ladder_cap on failure)
    double witness_bad_density = 0.0;  // failing-shift fraction in the worst window
    GroupElement witness{};            // shift with the latest violation seen
    std::int64_t witness_last_violation = 0;
    double witness_correlation = 0.0;  // its correlation at that scale
};

// Does c have uniformly decaying self-correlations along seq? Tests, for a
// power-of-two ladder of thresholds N, whether the shifts whose correlations
// stay below delta at every scale n in [N, H] fill density > 1 - delta of the
// late sequence sets. Probes are strided once the sets outgrow probe_cap,
// which the verdict records.
inline PerpVerdict check_perp(const WeightFn& c, const FolnerSeq& seq, double delta,
                              std::int64_t horizon, const PerpOptions& opt = {}) {
    if (!(delta > 0.0)) throw UsageError("check_perp: delta must be positive");
    std::int64_t H = std::min(horizon, seq.n_max());
    if (H < 4) throw UsageError("check_perp: horizon too small");
    if (!(c.model() == seq.model()))
        throw UsageError("check_perp: weight and sequence models differ");
    const GroupModel& m = seq.model();

    auto inc = detail::nested_increments(seq, H);

    std::vector<std::int64_t> scales;
    for (int j = 1; j <= opt.density_windows; ++j) {
        std::int64_t s = (H * j) / opt.density_windows;
        if (s >= 1 && (scales.empty() || scales.back() != s)) scales.push_back(s);
    }

    struct WindowScan {
        std::int64_t scale = 0;
        std::int64_t stride = 1;
        std::vector<GroupElement> probes;
        std::vector<std::int64_t> lastviol;
    };
    constexpr std::size_t kMinWindowElements = 32;  // tiny sets say nothing about density
    std::vector<WindowScan> scans;
    for (std::int64_t s : scales) {
        FiniteRegion fs = seq.set(s);
        if (fs.count() < kMinWindowElements && s != H) continue;
        WindowScan w;
        w.scale = s;
        w.probes = detail::strided_probe(fs, opt.probe_cap);
        w.stride = static_cast<std::int64_t>(
            (fs.count() + static_cast<std::size_t>(opt.probe_cap) - 1) /
            static_cast<std::size_t>(opt.probe_cap));
        w.lastviol.resize(w.probes.size());
        scans.push_back(std::move(w));
    }

    // dense 1-d fast path: one array lookup per term instead of a function call
    bool dense = (m.dim() == 1) && !inc.added.empty();
    Coord gmin = 0, gmax = 0, amin = 0, amax = 0;
    if (dense) {
        gmin = gmax = inc.added.front().c[0];
        for (const auto& g : inc.added) {
            gmin = std::min(gmin, g.c[0]);
            gmax = std::max(gmax, g.c[0]);
        }
        amin = amax = scans.front().probes.front().c[0];
        for (const auto& w : scans)
            for (const auto& a : w.probes) {
                amin = std::min(amin, a.c[0]);
                amax = std::max(amax, a.c[0]);
            }
        if ((gmax + amax) - (gmin + amin) >= detail::kDenseRangeCap) dense = false;
    }

    if (dense) {
        auto cv = detail::materialize_1d(c, std::min(gmin, gmin + amin),
                                         std::max(gmax, gmax + amax));
        std::vector<Coord> added;
        added.reserve(inc.added.size());
        for (const auto& g : inc.added) added.push_back(g.c[0]);
        const std::int64_t Hn = static_cast<std::int64_t>(inc.offset.size()) - 1;
        for (auto& w : scans) {
            parallel_for_index(w.probes.size(), [&](std::size_t i) {
                const Coord a = w.probes[i].c[0];
                double s = 0.0;
                std::int64_t last = 0;
                for (std::int64_t n = 1; n <= Hn; ++n) {
                    for (std::size_t t = inc.offset[n - 1]; t < inc.offset[n]; ++t)
                        s += cv.at(added[t]) * cv.at(added[t] + a);
                    if (std::abs(s) >= delta * static_cast<double>(inc.offset[n])) last = n;
                }
                w.lastviol[i] = last;
            });
        }
    } else {
        for (auto& w : scans) {
            parallel_for_index(w.probes.size(), [&](std::size_t i) {
                w.lastviol[i] = last_violation(c, inc, m, delta, w.probes[i]);
            });
        }
    }

    PerpVerdict v;
    v.delta = delta;
    v.horizon = H;
    v.ladder_cap = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(static_cast<double>(H) * opt.ladder_cap_fraction));

    std::vector<std::int64_t> ladder;
    for (std::int64_t N = 1; N < v.ladder_cap; N *= 2) ladder.push_back(N);
    ladder.push_back(v.ladder_cap);

    auto density_below = [](const WindowScan& w, std::int64_t N) {
        std::size_t good = 0;
        for (auto lv : w.lastviol)
            if (lv < N) ++good;
        return static_cast<double>(good) / static_cast<double>(w.lastviol.size());
    };

    for (std::int64_t N : ladder) {
        double worst = 1.0;
        for (const auto& w : scans) worst = std::min(worst, density_below(w, N));
        if (worst > 1.0 - delta) {
            v.passed = true;
            v.n_delta = N;
            break;
        }
    }

    std::int64_t report_at = v.passed ? v.n_delta : v.ladder_cap;
    double worst = 1.0;
    for (const auto& w : scans) {
        PerpWindowReport r;
        r.scale = w.scale;
        r.probes = static_cast<std::int64_t>(w.probes.size());
        r.stride = w.stride;
        r.good_density = density_below(w, report_at);
        worst = std::min(worst, r.good_density);
        v.windows.push_back(r);
    }
    v.worst_density = worst;
    v.witness_bad_density = 1.0 - worst;

    // the shift that stays correlated the longest, for the failure report
    std::int64_t best = -1;
    for (const auto& w : scans)
        for (std::size_t i = 0; i < w.probes.size(); ++i)
            if (w.lastviol[i] > best) {
                best = w.lastviol[i];
                v.witness = w.probes[i];
            }
    v.witness_last_violation = std::max<std::int64_t>(best, 0);
    if (v.witness_last_violation > 0)
        v.witness_correlation = self_correlation(c, seq.set(v.witness_last_violation), v.witness);
    return v;
}

// A_N = {a in window : |E_{g in F_N} c(g) f(g a)| >= eps}
inline FiniteRegion exceptional_set(const WeightFn& c, const WeightFn& f, const FiniteRegion& F,
                                    double eps, const FiniteRegion& window) {
    if (!(eps > 0.0)) throw UsageError("exceptional_set: eps must be positive");
    if (F.empty()) throw UsageError("exceptional_set: empty averaging set");
    const GroupModel& m = F.model();
    std::vector<GroupElement> out;
    for (const auto& a : window.elements()) {
        CompensatedSum s;
        for (const auto& g : F.elements()) s.add(c(g) * f(m.multiply(g, a)));
        if (std::abs(s.value()) >= eps * static_cast<double>(F.count())) out.push_back(a);
    }
    return FiniteRegion::from_elements(m, std::move(out));
}

}  // namespace folnerlab
