#pragma once
// Random covering by Folner pieces: independent Poisson center processes at
// every scale, thinned in descending order so a lower-scale piece never meets
// a piece that was already placed above it. The counting function Lambda
// tallies how many retained pieces sit on each group element; temperedness of
// the driving sequence is what keeps its conditional moments near 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "folnerlab/common.hpp"
#include "folnerlab/folner.hpp"
#include "folnerlab/group.hpp"
#include "folnerlab/rng.hpp"

namespace folnerlab {

struct PoissonParams {
    double c_const = 2.0;             // tempered constant, drives default intensity 1/(C |F_N|)
    std::optional<double> intensity;  // overrides the default with one alpha for every scale
    std::uint64_t seed = 0;
};

namespace detail {

constexpr std::uint64_t kScaleLabel = 0x7363616cull;
constexpr std::uint64_t kTrialLabel = 0x7472696cull;

// every element carries its own stream, so draws do not depend on scan order
inline std::uint64_t element_key(std::uint64_t base, const GroupElement& a) {
    return rng::derive_key(base, {rng::zigzag(a.c[0]), rng::zigzag(a.c[1]), rng::zigzag(a.c[2])});
}

inline void check_poisson_params(const PoissonParams& p) {
    if (!(p.c_const > 0.0)) throw UsageError("covering: tempered constant C must be positive");
    if (p.intensity && !(*p.intensity >= 0.0))
        throw UsageError("covering: intensity must be nonnegative");
}

// largest |union_{lo <= i < j} F_i^-1 F_j| / |F_j| over the scale window
inline double tempered_on_window(const FolnerSeq& seq, std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return 0.0;
    FiniteRegion pool = inverse_set(seq.set(lo));
    double worst = 0.0;
    for (std::int64_t j = lo + 1; j <= hi; ++j) {
        FiniteRegion fj = seq.set(j);
        worst = std::max(worst, product_set(pool, fj).measure() / fj.measure());
        if (j < hi) pool = union_regions(pool, inverse_set(fj));
    }
    return worst;
}

struct CoveringTrial {
    std::vector<std::vector<GroupElement>> centers;    // Sigma_N, multisets
    std::vector<std::vector<GroupElement>> survivors;  // A_{N|N+1}, when requested
    std::unordered_map<GroupElement, int, GroupElementHash> lambda;
    double mass = 0.0;  // integral of Lambda against right Haar measure
};

// Descending recursion. A target point a survives at scale N exactly when
// F_N a misses everything covered by scales above N; removed points are never
// visited again, so survival is checked on the fly instead of storing the
// shrinking sets. Retained centers are therefore screened against the
// cross-scale disjointness invariant on every single trial.
inline CoveringTrial run_covering_trial(const GroupModel& m,
                                        const std::vector<FiniteRegion>& fsets,
                                        const std::vector<FiniteRegion>& targets,
                                        std::int64_t scale_lo, const PoissonParams& params,
                                        std::uint64_t trial_seed, bool keep_survivors) {
    const std::size_t k = fsets.size();
    CoveringTrial out;
    out.centers.resize(k);
    if (keep_survivors) out.survivors.resize(k);
    std::unordered_set<GroupElement, GroupElementHash> covered;
    std::vector<GroupElement> fresh;
    for (std::size_t idx = k; idx-- > 0;) {
        const auto& fe = fsets[idx].elements();
        double alpha = params.intensity ? *params.intensity
                                        : 1.0 / (params.c_const * fsets[idx].measure());
        double lam = alpha * m.haar_weight();
        std::uint64_t scale_key = rng::derive_key(
            trial_seed, {kScaleLabel, std::uint64_t(scale_lo + std::int64_t(idx))});
        fresh.clear();
        for (const auto& a : targets[idx].elements()) {
            bool survives = true;
            if (!covered.empty()) {
                for (const auto& f : fe) {
                    if (covered.count(m.multiply(f, a)) != 0) {
                        survives = false;
                        break;
                    }
                }
            }
            if (!survives) continue;
            if (keep_survivors) out.survivors[idx].push_back(a);
            long mult = lam > 0.0 ? [&] {
                rng::Stream s(element_key(scale_key, a));
                return rng::poisson(s, lam);
            }()
                                  : 0;
            if (mult == 0) continue;
            out.centers[idx].insert(out.centers[idx].end(), std::size_t(mult), a);
            out.mass += double(mult) * fsets[idx].measure();
            for (const auto& f : fe) {
                GroupElement g = m.multiply(f, a);
                out.lambda[g] += int(mult);
                fresh.push_back(g);
            }
        }
        // same-scale pieces may overlap; only lower scales must avoid these
        covered.insert(fresh.begin(), fresh.end());
    }
    return out;
}

}  // namespace detail

// One realization of the Poisson process with the given intensity on a finite
// region: each element independently carries Poisson(alpha * haar weight)
// copies. Returned as a sorted multiset. Draws are keyed per element, so
// restricting the region restricts the process.
inline std::vector<GroupElement> sample_poisson(const FiniteRegion& region, double alpha,
                                                std::uint64_t seed) {
    if (!(alpha >= 0.0)) throw UsageError("sample_poisson: intensity must be nonnegative");
    std::vector<GroupElement> out;
    if (alpha == 0.0) return out;
    double lam = alpha * region.model().haar_weight();
    for (const auto& a : region.elements()) {
        rng::Stream s(detail::element_key(seed, a));
        long mult = rng::poisson(s, lam);
        out.insert(out.end(), std::size_t(mult), a);
    }
    return out;
}

struct CoveringSample {
    GroupModel model;
    std::int64_t scale_lo = 0, scale_hi = 0;
    std::vector<FiniteRegion> fsets;                 // F_N for N in [scale_lo, scale_hi]
    std::vector<FiniteRegion> targets;               // input target sets A_{N|R+1}
    std::vector<FiniteRegion> survivors;             // A_{N|N+1} at sampling time
    std::vector<std::vector<GroupElement>> centers;  // Sigma_N center multisets
    std::unordered_map<GroupElement, int, GroupElementHash> lambda;
    FiniteRegion window;  // union of F_N targets_N, where Lambda may live
    double mass = 0.0;    // integral of Lambda
    bool tempered_ok = true;
    double tempered_c = 0.0;
};

inline CoveringSample random_covering(const FolnerSeq& seq, std::int64_t scale_lo,
                                      std::int64_t scale_hi,
                                      const std::vector<FiniteRegion>& targets,
                                      const PoissonParams& params) {
    detail::check_poisson_params(params);
    if (scale_lo < 1 || scale_hi > seq.n_max() || scale_lo > scale_hi)
        throw UsageError("random_covering: bad scale window");
    if (std::int64_t(targets.size()) != scale_hi - scale_lo + 1)
        throw UsageError("random_covering: need one target set per scale");
    const GroupModel& m = seq.model();
    std::vector<FiniteRegion> fsets;
    for (std::int64_t n = scale_lo; n <= scale_hi; ++n) fsets.push_back(seq.set(n));
    for (const auto& t : targets) require_same_model(t, fsets.front(), "random_covering");

    FiniteRegion window = FiniteRegion::from_elements(m, {});
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i].empty()) continue;
        window = union_regions(window, product_set(fsets[i], targets[i]));
    }

    double tc = detail::tempered_on_window(seq, scale_lo, scale_hi);
    auto trial = detail::run_covering_trial(m, fsets, targets, scale_lo, params, params.seed, true);

    std::vector<FiniteRegion> survivors;
    for (auto& sv : trial.survivors) survivors.push_back(FiniteRegion::from_elements(m, sv));
    return CoveringSample{m,
                          scale_lo,
                          scale_hi,
                          std::move(fsets),
                          targets,
                          std::move(survivors),
                          std::move(trial.centers),
                          std::move(trial.lambda),
                          std::move(window),
                          trial.mass,
                          tc <= params.c_const,
                          tc};
}

inline int counting_function(const CoveringSample& s, const GroupElement& g) {
    if (!s.window.contains(g))
        throw DomainWindowError("counting_function: point outside the evaluation window");
    auto it = s.lambda.find(g);
    return it == s.lambda.end() ? 0 : it->second;
}

// Recomputes everything the construction promises from the stored pieces.
// Violations are implementation bugs, hence logic_error.
inline void verify_invariants(const CoveringSample& s) {
    const GroupModel& m = s.model;
    const std::size_t k = s.fsets.size();
    auto fail = [](const std::string& what) {
        throw std::logic_error("covering invariant violated: " + what);
    };

    std::unordered_map<GroupElement, int, GroupElementHash> recount;
    std::unordered_set<GroupElement, GroupElementHash> covered_above;
    double mass = 0.0;
    for (std::size_t idx = k; idx-- > 0;) {
        // centers live in the surviving set, survivors in the target set
        for (const auto& a : s.centers[idx])
            if (!s.survivors[idx].contains(a)) fail("center outside surviving set");
        for (const auto& a : s.survivors[idx].elements())
            if (!s.targets[idx].contains(a)) fail("survivor outside target set");
        // survivors are exactly the target points whose piece misses all
        // higher-scale pieces
        for (const auto& a : s.targets[idx].elements()) {
            bool clear = true;
            for (const auto& f : s.fsets[idx].elements())
                if (covered_above.count(m.multiply(f, a))) {
                    clear = false;
                    break;
                }
            if (clear != s.survivors[idx].contains(a)) fail("surviving set mismatch");
        }
        for (const auto& a : s.centers[idx]) {
            mass += s.fsets[idx].measure();
            for (const auto& f : s.fsets[idx].elements()) recount[m.multiply(f, a)] += 1;
        }
        for (const auto& a : s.centers[idx])
            for (const auto& f : s.fsets[idx].elements()) covered_above.insert(m.multiply(f, a));
    }
    if (recount.size() != s.lambda.size()) fail("counting function support mismatch");
    for (const auto& [g, v] : recount) {
        auto it = s.lambda.find(g);
        if (it == s.lambda.end() || it->second != v) fail("counting function value mismatch");
        if (!s.window.contains(g)) fail("counting function mass outside window");
    }
    if (std::abs(mass - s.mass) > 1e-9 * std::max(1.0, std::abs(s.mass)))
        fail("counting function integral mismatch");
}

struct MomentReport {
    std::int64_t trials = 0;
    double c_const = 0.0;
    double union_measure = 0.0;  // |union of targets|
    double bound_mean = 0.0, bound_second = 0.0, bound_mass = 0.0;
    double mean_given_hit = 0.0, second_given_hit = 0.0, mass_mean = 0.0;
    double se_mean = 0.0, se_second = 0.0, se_mass = 0.0;
    bool no_mass = false;
    bool pass_mean = false, pass_second = false, pass_mass = false, passed = false;
    bool tempered_ok = true;
    double tempered_c = 0.0;
};

// Monte Carlo check of the covering guarantees: pooled conditional moments of
// Lambda against 1 + 1/C and its square, and the mean covered mass against
// |union A| / (2C), each at three standard errors of slack. Ratio estimates
// pool hits over (trial, element) cells; their errors come from the delta
// method on per-trial sums.
inline MomentReport covering_moments(const FolnerSeq& seq, std::int64_t scale_lo,
                                     std::int64_t scale_hi,
                                     const std::vector<FiniteRegion>& targets,
                                     const PoissonParams& params, std::int64_t trials) {
    detail::check_poisson_params(params);
    if (trials < 100) throw UsageError("covering_moments: need at least 100 trials");
    if (scale_lo < 1 || scale_hi > seq.n_max() || scale_lo > scale_hi)
        throw UsageError("covering_moments: bad scale window");
    if (std::int64_t(targets.size()) != scale_hi - scale_lo + 1)
        throw UsageError("covering_moments: need one target set per scale");
    const GroupModel& m = seq.model();
    std::vector<FiniteRegion> fsets;
    for (std::int64_t n = scale_lo; n <= scale_hi; ++n) fsets.push_back(seq.set(n));
    for (const auto& t : targets) require_same_model(t, fsets.front(), "covering_moments");

    FiniteRegion target_union = FiniteRegion::from_elements(m, {});
    for (const auto& t : targets) target_union = union_regions(target_union, t);

    MomentReport rep;
    rep.trials = trials;
    rep.c_const = params.c_const;
    rep.union_measure = target_union.measure();
    rep.bound_mean = 1.0 + 1.0 / params.c_const;
    rep.bound_second = rep.bound_mean * rep.bound_mean;
    rep.bound_mass = rep.union_measure / (2.0 * params.c_const);
    rep.tempered_c = detail::tempered_on_window(seq, scale_lo, scale_hi);
    rep.tempered_ok = rep.tempered_c <= params.c_const;

    // per-trial pooled sums: hit cells, Lambda total, Lambda^2 total, mass.
    // Stored per trial and reduced in trial order, so the totals do not
    // depend on how trials were scheduled.
    std::vector<std::array<double, 4>> stats(static_cast<std::size_t>(trials));
    parallel_for_index(std::size_t(trials), [&](std::size_t t) {
        auto trial = detail::run_covering_trial(
            m, fsets, targets, scale_lo, params,
            rng::derive_key(params.seed, {detail::kTrialLabel, std::uint64_t(t)}), false);
        double hits = 0.0, total = 0.0, total_sq = 0.0;
        for (const auto& [g, v] : trial.lambda) {
            hits += 1.0;
            total += double(v);
            total_sq += double(v) * double(v);
        }
        stats[t] = {hits, total, total_sq, trial.mass};
    });

    CompensatedSum sm, ss, s2, smass, smm, sss, s22, ssm, s2m, smass2;
    for (const auto& st : stats) {
        sm.add(st[0]);
        ss.add(st[1]);
        s2.add(st[2]);
        smass.add(st[3]);
        smm.add(st[0] * st[0]);
        sss.add(st[1] * st[1]);
        s22.add(st[2] * st[2]);
        ssm.add(st[1] * st[0]);
        s2m.add(st[2] * st[0]);
        smass2.add(st[3] * st[3]);
    }
    const double n = double(trials);
    auto variance = [&](double sum, double sum_sq) {
        return std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    };
    auto covariance = [&](double sa, double sb, double sab) {
        return (sab - sa * sb / n) / (n - 1.0);
    };
    // delta-method standard error for (sum a)/(sum b)
    auto ratio_se = [&](double sa, double saa, double sb, double sbb, double sab, double r) {
        double mb = sb / n;
        double v = variance(sa, saa) - 2.0 * r * covariance(sa, sb, sab) +
                   r * r * variance(sb, sbb);
        return std::sqrt(std::max(0.0, v) / n) / mb;
    };

    rep.mass_mean = smass.value() / n;
    rep.se_mass = std::sqrt(variance(smass.value(), smass2.value()) / n);
    rep.pass_mass = rep.mass_mean >= rep.bound_mass - 3.0 * rep.se_mass;

    if (sm.value() == 0.0) {
        rep.no_mass = true;
        rep.pass_mean = rep.pass_second = true;  // no conditional mass to test
    } else {
        rep.mean_given_hit = ss.value() / sm.value();
        rep.second_given_hit = s2.value() / sm.value();
        rep.se_mean = ratio_se(ss.value(), sss.value(), sm.value(), smm.value(), ssm.value(),
                               rep.mean_given_hit);
        rep.se_second = ratio_se(s2.value(), s22.value(), sm.value(), smm.value(), s2m.value(),
                                 rep.second_given_hit);
        rep.pass_mean = rep.mean_given_hit <= rep.bound_mean + 3.0 * rep.se_mean;
        rep.pass_second = rep.second_given_hit <= rep.bound_second + 3.0 * rep.se_second;
    }
    rep.passed = rep.pass_mean && rep.pass_second && rep.pass_mass;
    return rep;
}

}  // namespace folnerlab
