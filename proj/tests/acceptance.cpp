// Release gate. Every criterion prints one [PASS]/[FAIL] line with its
// wall-clock time; budgets assume a single optimized desk core. Statistical
// criteria are deterministic because every stream is seeded.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <unordered_set>
#include <vector>

#include <folnerlab/experiments.hpp>

using namespace folnerlab;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Collects sub-checks for one criterion; close() prints the verdict line and
// enforces the runtime budget (budget 0 means none).
struct Gate {
    int id;
    std::string label;
    double budget_s;
    std::vector<std::string> problems;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    bool closed = false;

    Gate(int id_, std::string label_, double budget_s_)
        : id(id_), label(std::move(label_)), budget_s(budget_s_) {}

    void expect(bool cond, const std::string& what) {
        if (!cond) problems.push_back(what);
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    bool close() {
        closed = true;
        double secs = elapsed();
        if (budget_s > 0.0 && secs > budget_s)
            problems.push_back("runtime " + fmt(secs) + " s over the " + fmt(budget_s) +
                               " s budget");
        bool pass = problems.empty();
        std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, label.c_str(),
                    secs);
        for (const auto& p : problems) std::printf("       %s\n", p.c_str());
        std::fflush(stdout);
        return pass;
    }

    ~Gate() {
        if (!closed) {
            std::printf("[FAIL] criterion %d: %s (aborted, %.1f s)\n", id, label.c_str(),
                        elapsed());
            std::fflush(stdout);
        }
    }
};

using ElemSet = std::unordered_set<GroupElement, GroupElementHash>;

ElemSet to_set(const FiniteRegion& r) {
    return ElemSet(r.elements().begin(), r.elements().end());
}

// brute-force set algebra straight from the definitions, no FiniteRegion ops
FiniteRegion bf_boundary(const FiniteRegion& K, const FiniteRegion& F) {
    const GroupModel& m = K.model();
    ElemSet fset = to_set(F);
    ElemSet cand;
    for (const auto& k : K.elements())
        for (const auto& f : F.elements()) cand.insert(m.multiply(m.invert(k), f));
    std::vector<GroupElement> out;
    for (const auto& a : cand) {
        bool outside = false;
        for (const auto& k : K.elements())
            if (!fset.count(m.multiply(k, a))) {
                outside = true;
                break;
            }
        if (outside) out.push_back(a);
    }
    return FiniteRegion::from_elements(m, std::move(out));
}

double bf_weak_defect(const FiniteRegion& K, const FiniteRegion& F) {
    const GroupModel& m = K.model();
    ElemSet kf;
    for (const auto& k : K.elements())
        for (const auto& f : F.elements()) kf.insert(m.multiply(k, f));
    ElemSet fset = to_set(F);
    std::size_t sym = 0;
    for (const auto& g : kf)
        if (!fset.count(g)) ++sym;
    for (const auto& g : F.elements())
        if (!kf.count(g)) ++sym;
    return static_cast<double>(sym) / static_cast<double>(F.count());
}

GroupElement random_element(const GroupModel& m, rng::Stream& s, Coord span) {
    GroupElement g{};
    for (int i = 0; i < m.dim(); ++i)
        g.c[i] = static_cast<Coord>(s.next_u64() % (2 * span + 1)) - span;
    return g;
}

FiniteRegion random_region(const GroupModel& m, rng::Stream& s, std::size_t max_count,
                           Coord span) {
    std::size_t n = 1 + static_cast<std::size_t>(s.next_u64() % max_count);
    std::vector<GroupElement> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(random_element(m, s, span));
    return FiniteRegion::from_elements(m, std::move(v));
}

ExperimentConfig cfg_of(report::json j) { return ExperimentConfig::from_json(std::move(j)); }

}  // namespace

TEST_CASE("boundaries and defects match brute-force enumeration", "[acceptance]") {
    Gate gate(1, "set algebra agrees with brute force on seeded (K, F) pairs", 10.0);
    const std::vector<GroupModel> models{GroupModel::int_line(), GroupModel::int_grid(2),
                                         GroupModel::int_grid(3), GroupModel::heisenberg(),
                                         GroupModel::lattice_r(0.01)};
    const std::int64_t pairs = 200;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const GroupModel& m = models[mi];
        for (std::int64_t p = 0; p < pairs; ++p) {
            auto s = rng::derive_stream(0x5e7a15ull, {std::uint64_t(mi), std::uint64_t(p)});
            FiniteRegion K = random_region(m, s, 5, 4);
            FiniteRegion F = random_region(m, s, 100, 30);
            FiniteRegion lib = k_boundary(K, F);
            FiniteRegion ref = bf_boundary(K, F);
            if (!(lib == ref)) {
                gate.expect(false, m.to_string() + " pair " + std::to_string(p) +
                                       ": k_boundary mismatch (" + std::to_string(lib.count()) +
                                       " vs " + std::to_string(ref.count()) + " elements)");
                break;
            }
            double wlib = weak_defect(K, F), wref = bf_weak_defect(K, F);
            if (wlib != wref) {
                gate.expect(false, m.to_string() + " pair " + std::to_string(p) +
                                       ": weak defect " + fmt(wlib) + " != " + fmt(wref));
                break;
            }
            double slib = strong_defect(K, F);
            double sref = static_cast<double>(ref.count()) / static_cast<double>(F.count());
            if (slib != sref) {
                gate.expect(false, m.to_string() + " pair " + std::to_string(p) +
                                       ": strong defect " + fmt(slib) + " != " + fmt(sref));
                break;
            }
        }
    }
    REQUIRE(gate.close());
}

TEST_CASE("swiss cheese separates weak from strong invariance", "[acceptance]") {
    Gate gate(2, "lattice swiss cheese is weakly but not strongly invariant", 30.0);
    auto seq = FolnerSeq::swiss_cheese(0.01, 100);
    FiniteRegion F = seq.set(100);
    // K = [-1, 0] in real units, 101 lattice points
    FiniteRegion K = FiniteRegion::interval_1d(seq.model(), -100, 0);

    double wd = weak_defect(K, F);
    double sd = strong_defect(K, F);
    gate.expect(wd <= 0.05, "weak defect " + fmt(wd) + " > 0.05");
    gate.expect(sd >= 0.9, "strong defect " + fmt(sd) + " < 0.9");

    StrongifyResult sr = strongify(K, F, 0.05);
    double sd2 = strong_defect(K, sr.set);
    gate.expect(sr.precondition_ok,
                "strongify precondition defect " + fmt(sr.precondition_defect) + " >= 0.05");
    gate.expect(sd2 < 0.1, "strongified strong defect " + fmt(sd2) + " >= 0.1");
    REQUIRE(gate.close());
}

TEST_CASE("interval temperedness is exact and subsequences re-verify", "[acceptance]") {
    Gate gate(3, "tempered constants: exact intervals, re-verified subsequences", 30.0);
    double c = tempered_constant(FolnerSeq::intervals(1000), 1000);
    gate.expect(c == 2.0 - 2.0 / 1000.0,
                "interval constant " + fmt(c) + " != 2 - 2/1000 exactly");

    struct Case {
        FolnerSeq seq;
        double C;
    };
    std::vector<Case> cases;
    cases.push_back({FolnerSeq::intervals(200), 1.5});
    cases.push_back({FolnerSeq::pow2(10), 2.0});
    cases.push_back({FolnerSeq::shifted_intervals(20), 2.0});
    cases.push_back({FolnerSeq::cuberoot_intervals(100000), 2.0});
    for (const auto& cs : cases) {
        auto kept = tempered_subsequence(cs.seq, cs.C);
        gate.expect(!kept.empty(), cs.seq.tag() + ": empty subsequence");
        if (kept.empty()) continue;
        std::vector<FiniteRegion> sets;
        for (auto n : kept) sets.push_back(cs.seq.set(n));
        auto sub = FolnerSeq::from_sets(cs.seq.model(), std::move(sets), cs.seq.tag() + "-sub");
        double csub = tempered_constant(sub, sub.n_max());
        gate.expect(csub < cs.C, cs.seq.tag() + ": kept subsequence has constant " + fmt(csub) +
                                     " >= C = " + fmt(cs.C));
    }
    REQUIRE(gate.close());
}

TEST_CASE("covering moments meet the bounds and the Poisson closed forms", "[acceptance]") {
    Gate gate(4, "covering moments: near-disjointness bounds and single-scale oracle", 60.0);
    GroupModel m = GroupModel::int_line();
    auto seq = FolnerSeq::pow2(6);
    PoissonParams params;
    params.c_const = 2.0;
    params.seed = 7;
    const std::int64_t trials = 10000;

    // multi-scale standard scenario against the lemma bounds
    auto targets = parse_targets(m, "random:density=0.3,window=1000,seed=11", 1, 6);
    MomentReport mr = covering_moments(seq, 1, 6, targets, params, trials);
    gate.expect(mr.tempered_ok, "pow2 window not C-tempered");
    gate.expect(mr.mean_given_hit <= mr.bound_mean + 3.0 * mr.se_mean,
                "E(count | hit) " + fmt(mr.mean_given_hit) + " above " + fmt(mr.bound_mean) +
                    " + 3 SE");
    gate.expect(mr.second_given_hit <= mr.bound_second + 3.0 * mr.se_second,
                "E(count^2 | hit) " + fmt(mr.second_given_hit) + " above " +
                    fmt(mr.bound_second) + " + 3 SE");
    gate.expect(mr.mass_mean >= mr.bound_mass - 3.0 * mr.se_mass,
                "mass " + fmt(mr.mass_mean) + " below " + fmt(mr.bound_mass) + " - 3 SE");
    gate.expect(mr.passed, "moment report failed its own bounds");

    // single scale: every target point carries Poisson(lam) copies of F+a, so
    // the count at g is Poisson with mean lam * |A cap (g - F)| and the pooled
    // conditional moments have exact closed forms
    auto single = parse_targets(m, "random:density=0.3,window=1000,seed=13", 6, 6);
    MomentReport sr = covering_moments(seq, 6, 6, single, params, trials);
    const FiniteRegion& F6 = seq.set(6);
    const FiniteRegion& A = single[0];
    const Coord flo = F6.front().c[0], fhi = F6.back().c[0];
    const double lam = 1.0 / (params.c_const * F6.measure());
    double sum_mu = 0.0, sum_hit = 0.0, sum_sec = 0.0;
    for (Coord g = A.front().c[0] + flo; g <= A.back().c[0] + fhi; ++g) {
        auto lo = std::lower_bound(A.elements().begin(), A.elements().end(), el(g - fhi));
        auto hi = std::upper_bound(A.elements().begin(), A.elements().end(), el(g - flo));
        auto n = static_cast<double>(hi - lo);
        if (n == 0.0) continue;
        double mu = lam * n;
        sum_mu += mu;
        sum_hit += 1.0 - std::exp(-mu);
        sum_sec += mu + mu * mu;
    }
    const double want_mean = sum_mu / sum_hit;
    const double want_second = sum_sec / sum_hit;
    const double want_mass = sr.union_measure / params.c_const;
    gate.expect(std::abs(sr.mean_given_hit - want_mean) <= 3.0 * sr.se_mean,
                "single-scale E(count | hit) " + fmt(sr.mean_given_hit) + " vs oracle " +
                    fmt(want_mean) + " beyond 3 SE = " + fmt(3.0 * sr.se_mean));
    gate.expect(std::abs(sr.second_given_hit - want_second) <= 3.0 * sr.se_second,
                "single-scale E(count^2 | hit) " + fmt(sr.second_given_hit) + " vs oracle " +
                    fmt(want_second) + " beyond 3 SE = " + fmt(3.0 * sr.se_second));
    gate.expect(std::abs(sr.mass_mean - want_mass) <= 3.0 * sr.se_mass,
                "single-scale mass " + fmt(sr.mass_mean) + " vs oracle " + fmt(want_mass) +
                    " beyond 3 SE = " + fmt(3.0 * sr.se_mass));
    REQUIRE(gate.close());
}

TEST_CASE("self-correlation gate separates sign paths from characters", "[acceptance]") {
    Gate gate(5, "correlation decay: sign paths pass, characters fail with a witness", 60.0);
    GroupModel m = GroupModel::int_line();
    const std::int64_t horizon = 100000;
    const double delta = 0.1;
    auto seq = FolnerSeq::intervals(horizon);

    WeightFn good = parse_weight("orbit:bernoulli:seed=7").build(m, 2 * horizon);
    PerpVerdict pv = check_perp(good, seq, delta, horizon);
    gate.expect(pv.passed, "sign-path weight failed at delta 0.1 (worst density " +
                               fmt(pv.worst_density) + ")");

    const double theta = 0.41421356237309503;
    WeightFn bad = WeightFn::from_function(m, "cos-char", [theta](const GroupElement& g) {
        return std::cos(kTau * theta * static_cast<double>(g.c[0]));
    });
    PerpVerdict pb = check_perp(bad, seq, delta, horizon);
    gate.expect(!pb.passed, "character weight unexpectedly passed at delta 0.1");
    gate.expect(pb.witness_bad_density > delta,
                "witness bad density " + fmt(pb.witness_bad_density) + " <= delta");
    gate.expect(pb.witness_last_violation > 0, "failing verdict carries no witness scale");
    REQUIRE(gate.close());
}

TEST_CASE("sign-path weighted rotation averages vanish", "[acceptance]") {
    Gate gate(6, "weighted averages vanish for sign paths on rotations", 120.0);
    ExperimentReport rep = run_experiment(cfg_of({{"experiment", "orthogonality"},
                                                  {"seed", 101},
                                                  {"weight", "orbit:bernoulli:seed=7"},
                                                  {"system", "rotation:theta=0.61803398874989485"},
                                                  {"obs", "cos"},
                                                  {"horizon", 1000000},
                                                  {"samples", 20},
                                                  {"tolerance", 0.02}}));
    gate.expect(rep.hypothesis_met, "weight failed the correlation gate");
    double worst = rep.doc.at("max_final_abs").get<double>();
    gate.expect(rep.passed && worst <= 0.02,
                "max |average| at the top rung is " + fmt(worst) + " > 0.02");

    // decay along the ladder: the worst replicate at the first rung dominates
    // the worst at the last
    double first = 0.0, last = 0.0;
    for (const auto& row : rep.doc.at("replicates")) {
        const auto& avgs = row.at("averages");
        first = std::max(first, std::abs(avgs.front().get<double>()));
        last = std::max(last, std::abs(avgs.back().get<double>()));
    }
    gate.expect(last < first, "no decay: first-rung worst " + fmt(first) +
                                  ", top-rung worst " + fmt(last));
    gate.expect(rep.exit_code() == 0, "exit code " + std::to_string(rep.exit_code()));
    REQUIRE(gate.close());
}

TEST_CASE("character averages hit one half on the matched frequency", "[acceptance]") {
    Gate gate(7, "matched character average is 1/2, mismatched stays small", 60.0);
    ExperimentReport rep = run_experiment(
        cfg_of({{"experiment", "wiener-wintner"},
                {"seed", 7},
                {"weight", "orbit:rotation:theta=0.31830988618367168,obs=cos,x=0"},
                {"horizon", 1000000}}));
    gate.expect(rep.passed && rep.exit_code() == 0, "experiment verdict failed");

    int matched = 0, mismatched = 0;
    for (const auto& row : rep.doc.at("characters")) {
        double modulus = row.at("modulus").get<double>();
        std::string cls = row.at("class").get<std::string>();
        if (cls == "matched") {
            ++matched;
            gate.expect(std::abs(modulus - 0.5) <= 1e-3,
                        "matched modulus " + fmt(modulus) + " misses 1/2 by more than 1e-3");
        } else {
            ++mismatched;
            gate.expect(modulus <= 0.02,
                        "character " + fmt(row.at("theta").get<double>()) + " has modulus " +
                            fmt(modulus) + " > 0.02");
        }
    }
    gate.expect(matched == 1, "expected exactly one matched character, saw " +
                                  std::to_string(matched));
    gate.expect(mismatched >= 2, "expected at least two mismatched characters");
    REQUIRE(gate.close());
}

TEST_CASE("return-time ladders are Cauchy and constants recover Birkhoff", "[acceptance]") {
    Gate gate(8, "return-time ladders: Cauchy tops and a Birkhoff control", 120.0);
    auto run = [&](const char* src, const char* sobs, const char* tgt) {
        return run_experiment(cfg_of({{"experiment", "return-times"},
                                      {"seed", 23},
                                      {"source_system", src},
                                      {"source_obs", sobs},
                                      {"target_system", tgt},
                                      {"target_obs", "cos"},
                                      {"horizon", 500000},
                                      {"samples", 10},
                                      {"tolerance", 0.01}}));
    };

    ExperimentReport a =
        run("bernoulli:seed=3", "coord", "rotation:theta=0.61803398874989485");
    double da = a.doc.at("max_top_diff").get<double>();
    gate.expect(a.passed && da <= 0.01,
                "sign-path source: top ladder difference " + fmt(da) + " > 0.01");

    ExperimentReport b = run("rotation:theta=0.41421356237309503", "cos",
                             "rotation:theta=0.61803398874989485");
    double db = b.doc.at("max_top_diff").get<double>();
    gate.expect(b.passed && db <= 0.01,
                "rotation source: top ladder difference " + fmt(db) + " > 0.01");

    ExperimentReport c = run("rotation:theta=0.41421356237309503", "const:1",
                             "rotation:theta=0.61803398874989485");
    gate.expect(c.doc.contains("birkhoff"), "constant-weight control missing its limit");
    if (c.doc.contains("birkhoff")) {
        double dev = c.doc.at("birkhoff").at("max_deviation").get<double>();
        double want = c.doc.at("birkhoff").at("expected").get<double>();
        gate.expect(want == 0.0, "control limit should be the observable mean 0");
        gate.expect(c.passed && dev <= 0.01,
                    "constant weight misses the Birkhoff limit by " + fmt(dev));
    }
    REQUIRE(gate.close());
}

TEST_CASE("block averages respect the density bound at K=25", "[acceptance]") {
    Gate gate(9, "25 admissible blocks: densities under min(bound, 0.1)", 120.0);
    ExperimentReport rep = run_experiment(cfg_of({{"experiment", "orth-lemma-bound"},
                                                  {"seed", 5},
                                                  {"weight", "orbit:bernoulli:seed=7"},
                                                  {"epsilon", 0.2},
                                                  {"C", 2.0},
                                                  {"K", 25},
                                                  {"delta", 2.0},
                                                  {"base_size", 64},
                                                  {"observed_cap", 0.1}}));
    const auto& con = rep.doc.at("construction");
    gate.expect(con.at("ok").get<bool>(), "construction failed");
    if (con.at("ok").get<bool>())
        gate.expect(con.at("blocks").size() == 25,
                    "built " + std::to_string(con.at("blocks").size()) + " blocks, wanted 25");
    double bound = rep.doc.at("bound").get<double>();
    gate.expect(std::abs(bound - 10.0) < 1e-12, "bound " + fmt(bound) + " != 5C/(eps sqrt K)");
    gate.expect(rep.doc.at("bound_vacuous").get<bool>(), "bound 10 > 1 must be flagged vacuous");
    double observed = rep.doc.at("max_mean_density").get<double>();
    gate.expect(observed <= std::min(bound, 0.1),
                "observed mean density " + fmt(observed) + " above min(bound, 0.1)");
    gate.expect(rep.hypothesis_met, "hypotheses not verified");
    gate.expect(rep.exit_code() == 0, "exit code " + std::to_string(rep.exit_code()));
    REQUIRE(gate.close());
}

TEST_CASE("experiment reports are byte-identical on rerun", "[acceptance]") {
    Gate gate(10, "identical config and seed reproduce reports byte for byte", 0.0);
    const char* names[] = {"orthogonality", "return-times", "wiener-wintner", "covering-verify",
                           "orth-lemma-bound"};
    for (const char* name : names) {
        std::string path = std::string(FOLNERLAB_CONFIG_DIR) + "/" + name + ".json";
        ExperimentConfig cfg = ExperimentConfig::from_file(path);
        ExperimentReport r1 = run_experiment(cfg);
        ExperimentReport r2 = run_experiment(cfg);
        gate.expect(r1.doc.dump(2) == r2.doc.dump(2),
                    std::string(name) + ": JSON reports differ between reruns");
        gate.expect(r1.csv == r2.csv, std::string(name) + ": CSV outputs differ between reruns");
    }
    REQUIRE(gate.close());
}
