// Model measure-preserving systems (torus rotations, iid sign shifts, their
// products, and a skew product), observables with closed-form integrals,
// orbit-generated weights, weighted and character averages, and analytic
// Kronecker decompositions for the catalog systems.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "folnerlab/weights.hpp"

namespace folnerlab {

inline constexpr double kTau = 6.283185307179586476925286766559;

// frac(n * theta + base) in [0, 1). The product n*theta is split exactly via
// fma so phases stay accurate to ~1e-16 absolute over 1e7-step orbits.
inline double torus_phase(std::int64_t n, double theta, double base = 0.0) {
    double nd = static_cast<double>(n);
    double hi = nd * theta;
    double lo = std::fma(nd, theta, -hi);
    double r = hi - std::floor(hi);
    double s = r + lo + base;
    s -= std::floor(s);
    if (s >= 1.0 || s < 0.0) s = 0.0;  // rounding landed exactly on the seam
    return s;
}

// A point of a catalog system: torus coordinates plus a keyed iid sign path
// at some shift. Product systems use both halves.
struct SysPoint {
    std::array<double, 3> x{};
    std::uint64_t omega_key = 0;
    std::int64_t omega_shift = 0;
};

enum class SysKind { Rotation, Bernoulli, Product, Skew };

class SystemModel {
public:
    // Z^d acts on the d-torus, generator i advancing coordinate i by theta[i].
    // d = 1 is the circle rotation.
    static SystemModel rotation(std::vector<double> theta) {
        if (theta.empty() || theta.size() > 3)
            throw ConfigError("rotation: need 1 to 3 frequencies");
        SystemModel s;
        s.kind_ = SysKind::Rotation;
        s.dim_ = static_cast<int>(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double t = theta[i] - std::floor(theta[i]);
            s.theta_[i] = t;
        }
        return s;
    }

    // left shift on iid +-1 coordinates keyed by seed
    static SystemModel bernoulli(std::uint64_t seed) {
        SystemModel s;
        s.kind_ = SysKind::Bernoulli;
        s.seed_ = seed;
        return s;
    }

    // rotation x sign shift acting diagonally; the one product whose Kronecker
    // structure we can write down
    static SystemModel product(SystemModel a, SystemModel b) {
        if (a.kind_ != SysKind::Rotation || b.kind_ != SysKind::Bernoulli)
            throw ConfigError("product systems pair a rotation with a sign shift");
        if (a.dim_ != 1) throw ConfigError("product systems use a circle rotation base");
        SystemModel s;
        s.kind_ = SysKind::Product;
        s.theta_ = a.theta_;
        s.dim_ = 1;
        s.seed_ = b.seed_;
        return s;
    }

    // T(x, y) = (x + theta, y + x) on the 2-torus
    static SystemModel skew(double theta) {
        SystemModel s;
        s.kind_ = SysKind::Skew;
        s.dim_ = 2;
        s.theta_[0] = theta - std::floor(theta);
        return s;
    }

    SysKind kind() const { return kind_; }
    int torus_dim() const { return dim_; }
    double theta(int i = 0) const { return theta_[static_cast<std::size_t>(i)]; }
    std::uint64_t seed() const { return seed_; }

    GroupModel acting_group() const {
        if (kind_ == SysKind::Rotation && dim_ > 1) return GroupModel::int_grid(dim_);
        return GroupModel::int_line();
    }

    // g applied to p, in closed form (no step-by-step iteration)
    SysPoint act(const SysPoint& p, const GroupElement& g) const {
        SysPoint q = p;
        switch (kind_) {
            case SysKind::Rotation:
                for (int i = 0; i < dim_; ++i)
                    q.x[static_cast<std::size_t>(i)] =
                        torus_phase(g.c[static_cast<std::size_t>(i)],
                                    theta_[static_cast<std::size_t>(i)],
                                    p.x[static_cast<std::size_t>(i)]);
                break;
            case SysKind::Bernoulli:
                q.omega_shift = detail_checked_shift(p.omega_shift, g.c[0]);
                break;
            case SysKind::Product:
                q.x[0] = torus_phase(g.c[0], theta_[0], p.x[0]);
                q.omega_shift = detail_checked_shift(p.omega_shift, g.c[0]);
                break;
            case SysKind::Skew: {
                // T^n(x, y) = (x + n theta, y + n x + n(n-1)/2 theta)
                std::int64_t n = g.c[0];
                if (std::abs(n) > (std::int64_t(1) << 26))
                    throw UsageError("skew action: |n| too large for exact n(n-1)/2");
                std::int64_t tri = n * (n - 1) / 2;
                q.x[0] = torus_phase(n, theta_[0], p.x[0]);
                q.x[1] = torus_phase(tri, theta_[0], torus_phase(n, p.x[0], p.x[1]));
                break;
            }
        }
        return q;
    }

    // a draw from the invariant measure
    SysPoint sample_point(rng::Stream& s) const {
        SysPoint p;
        switch (kind_) {
            case SysKind::Rotation:
            case SysKind::Skew:
                for (int i = 0; i < dim_; ++i) p.x[static_cast<std::size_t>(i)] = s.next_unit();
                break;
            case SysKind::Bernoulli:
                p.omega_key = s.next_u64();
                break;
            case SysKind::Product:
                p.x[0] = s.next_unit();
                p.omega_key = s.next_u64();
                break;
        }
        return p;
    }

    // the fixed path keyed directly by the system seed, shift 0
    SysPoint seed_point() const {
        SysPoint p;
        if (kind_ == SysKind::Bernoulli || kind_ == SysKind::Product)
            p.omega_key = rng::derive_key(seed_, {0x6f6d656761ull});
        return p;
    }

    std::string to_string() const {
        switch (kind_) {
            case SysKind::Rotation: {
                std::string s = "rotation:theta=" + std::to_string(theta_[0]);
                for (int i = 1; i < dim_; ++i) s += "," + std::to_string(theta_[size_t(i)]);
                return s;
            }
            case SysKind::Bernoulli: return "bernoulli:seed=" + std::to_string(seed_);
            case SysKind::Product:
                return "product:theta=" + std::to_string(theta_[0]) +
                       ",seed=" + std::to_string(seed_);
            case SysKind::Skew: return "skew:theta=" + std::to_string(theta_[0]);
        }
        return "?";
    }

private:
    static std::int64_t detail_checked_shift(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw UsageError("path shift overflow");
        return r;
    }

    SysKind kind_ = SysKind::Rotation;
    int dim_ = 1;
    std::array<double, 3> theta_{};
    std::uint64_t seed_ = 0;
};

// --- observables -----------------------------------------------------------------

enum class ObsShape { Const, CosChar, SinChar, Coord, Product, Composite };

// Bounded evaluator on system points. Catalog shapes carry closed-form
// integrals; composite ones carry whatever they were built with.
class Observable {
public:
    static Observable constant(double v) {
        if (std::abs(v) > 1.0 + 1e-12) throw ConfigError("constant observable outside [-1,1]");
        Observable o;
        o.shape_ = ObsShape::Const;
        o.scale_ = v;
        o.tag_ = "const:" + std::to_string(v);
        return o;
    }

    // cos(2 pi k x_i) / sin(2 pi k x_i)
    static Observable cos_char(int k = 1, int coord = 0) {
        Observable o;
        o.shape_ = ObsShape::CosChar;
        o.freq_ = k;
        o.coord_ = coord;
        o.tag_ = (k == 1 && coord == 0) ? "cos" : "cos:k=" + std::to_string(k) + ",i=" +
                                                      std::to_string(coord);
        return o;
    }
    static Observable sin_char(int k = 1, int coord = 0) {
        Observable o;
        o.shape_ = ObsShape::SinChar;
        o.freq_ = k;
        o.coord_ = coord;
        o.tag_ = (k == 1 && coord == 0) ? "sin" : "sin:k=" + std::to_string(k) + ",i=" +
                                                      std::to_string(coord);
        return o;
    }

    // the sign coordinate at the path's current shift
    static Observable coord() {
        Observable o;
        o.shape_ = ObsShape::Coord;
        o.tag_ = "coord";
        return o;
    }

    // phi(x) * psi(omega) on a product system
    static Observable product(Observable phi, Observable psi) {
        if (phi.shape_ != ObsShape::CosChar && phi.shape_ != ObsShape::SinChar &&
            phi.shape_ != ObsShape::Const)
            throw ConfigError("product observable: left factor must be a torus character");
        if (psi.shape_ != ObsShape::Coord && psi.shape_ != ObsShape::Const)
            throw ConfigError("product observable: right factor must be a path coordinate");
        Observable o;
        o.shape_ = ObsShape::Product;
        o.left_ = std::make_shared<Observable>(std::move(phi));
        o.right_ = std::make_shared<Observable>(std::move(psi));
        o.tag_ = o.left_->tag_ + "*" + o.right_->tag_;
        return o;
    }

    // escape hatch for derived observables; bound is the caller's business
    static Observable from_function(std::string tag, std::function<double(const SysPoint&)> fn,
                                    std::optional<double> integral = std::nullopt) {
        Observable o;
        o.shape_ = ObsShape::Composite;
        o.fn_ = std::move(fn);
        o.integral_ = integral;
        o.tag_ = std::move(tag);
        return o;
    }

    ObsShape shape() const { return shape_; }
    const std::string& tag() const { return tag_; }
    int freq() const { return freq_; }
    const Observable& left() const { return *left_; }
    const Observable& right() const { return *right_; }

    double eval(const SysPoint& p) const {
        switch (shape_) {
            case ObsShape::Const: return scale_;
            case ObsShape::CosChar:
                return std::cos(kTau * static_cast<double>(freq_) *
                                p.x[static_cast<std::size_t>(coord_)]);
            case ObsShape::SinChar:
                return std::sin(kTau * static_cast<double>(freq_) *
                                p.x[static_cast<std::size_t>(coord_)]);
            case ObsShape::Coord: return rng::pm1_at(p.omega_key, p.omega_shift);
            case ObsShape::Product: return left_->eval(p) * right_->eval(p);
            case ObsShape::Composite: return fn_(p);
        }
        return 0.0;
    }

    std::optional<double> integral() const {
        switch (shape_) {
            case ObsShape::Const: return scale_;
            case ObsShape::CosChar: return freq_ == 0 ? 1.0 : 0.0;
            case ObsShape::SinChar: return 0.0;
            case ObsShape::Coord: return 0.0;
            case ObsShape::Product: {
                auto a = left_->integral();
                auto b = right_->integral();
                if (a && b) return *a * *b;
                return std::nullopt;
            }
            case ObsShape::Composite: return integral_;
        }
        return std::nullopt;
    }

private:
    ObsShape shape_ = ObsShape::Const;
    double scale_ = 0.0;
    int freq_ = 1;
    int coord_ = 0;
    std::shared_ptr<Observable> left_, right_;
    std::function<double(const SysPoint&)> fn_;
    std::optional<double> integral_;
    std::string tag_;
};

// --- orbit weights ----------------------------------------------------------------

// c(g) = f(g x), materialized on the window. Contiguous 1-d windows become
// sampled weights (fast lookups, hard domain edges); anything else keeps a
// membership-checked closure.
inline WeightFn orbit_weight(const SystemModel& sys, const Observable& f, const SysPoint& x,
                             const FiniteRegion& window) {
    if (!(window.model() == sys.acting_group()))
        throw UsageError("orbit_weight: window model differs from the acting group");
    if (window.empty()) throw UsageError("orbit_weight: empty window");
    std::string tag = "orbit:" + sys.to_string() + ",obs=" + f.tag();
    if (window.is_contiguous_1d()) {
        Coord lo = window.front().c[0];
        std::vector<double> vals;
        vals.reserve(window.count());
        for (const auto& g : window.elements()) vals.push_back(f.eval(sys.act(x, g)));
        return WeightFn::from_samples(window.model(), std::move(tag), lo, std::move(vals));
    }
    auto win = std::make_shared<FiniteRegion>(window);
    SystemModel sys_copy = sys;
    Observable f_copy = f;
    return WeightFn::from_function(window.model(), std::move(tag),
                                   [sys_copy, f_copy, x, win](const GroupElement& g) {
                                       if (!win->contains(g))
                                           throw DomainWindowError(
                                               "orbit weight evaluated outside its window");
                                       return f_copy.eval(sys_copy.act(x, g));
                                   });
}

// --- averages ----------------------------------------------------------------------

// E_{g in F} c(g) * obs(g y)
inline double weighted_average(const WeightFn& c, const SystemModel& sys, const Observable& obs,
                               const SysPoint& y, const FiniteRegion& F) {
    if (F.empty()) throw UsageError("weighted_average: empty region");
    if (!(c.model() == F.model())) throw UsageError("weighted_average: model mismatch");
    if (!(F.model() == sys.acting_group()))
        throw UsageError("weighted_average: region model differs from the acting group");
    CompensatedSum s;
    for (const auto& g : F.elements()) s.add(c(g) * obs.eval(sys.act(y, g)));
    return s.value() / static_cast<double>(F.count());
}

// E_{n in [0,N)} c(n) obs(T^n y) at each requested N, one incremental pass.
// Ns must be ascending; the action is the Z case.
inline std::vector<double> average_ladder(const WeightFn& c, const SystemModel& sys,
                                          const Observable& obs, const SysPoint& y,
                                          const std::vector<std::int64_t>& Ns) {
    if (Ns.empty()) throw UsageError("average_ladder: no scales");
    for (std::size_t i = 0; i + 1 < Ns.size(); ++i)
        if (Ns[i] >= Ns[i + 1]) throw UsageError("average_ladder: scales must ascend");
    if (Ns.front() < 1) throw UsageError("average_ladder: scales start at 1");
    if (!(sys.acting_group() == GroupModel::int_line()))
        throw UsageError("average_ladder: Z actions only");
    std::vector<double> out;
    CompensatedSum s;
    std::size_t next = 0;
    for (std::int64_t n = 0; n < Ns.back() && next < Ns.size(); ++n) {
        s.add(c(el(n)) * obs.eval(sys.act(y, el(n))));
        while (next < Ns.size() && n + 1 == Ns[next]) {
            out.push_back(s.value() / static_cast<double>(Ns[next]));
            ++next;
        }
    }
    return out;
}

// A frequency vector in [0,1)^d naming the character g -> e^{2 pi i theta.g}
struct CharacterId {
    std::array<double, 3> theta{};
    int dim = 1;

    static CharacterId circle(double t) {
        CharacterId c;
        c.theta[0] = t - std::floor(t);
        c.dim = 1;
        return c;
    }
};

// E_{g in F} c(g) e^{2 pi i theta . g}
inline std::complex<double> character_average(const WeightFn& c, const CharacterId& chi,
                                              const FiniteRegion& F) {
    if (F.empty()) throw UsageError("character_average: empty region");
    if (!(c.model() == F.model())) throw UsageError("character_average: model mismatch");
    if (F.model().dim() != chi.dim)
        throw UsageError("character_average: character dimension mismatch");
    CompensatedSum re, im;
    for (const auto& g : F.elements()) {
        double phase = 0.0;
        for (int i = 0; i < chi.dim; ++i)
            phase = torus_phase(g.c[static_cast<std::size_t>(i)],
                                chi.theta[static_cast<std::size_t>(i)], phase);
        double w = c(g);
        re.add(w * std::cos(kTau * phase));
        im.add(w * std::sin(kTau * phase));
    }
    double n = static_cast<double>(F.count());
    return {re.value() / n, im.value() / n};
}

// character averages over [0,N) at each requested N, one incremental pass
inline std::vector<std::complex<double>> character_average_ladder(
    const WeightFn& c, const CharacterId& chi, const std::vector<std::int64_t>& Ns) {
    if (Ns.empty()) throw UsageError("character_average_ladder: no scales");
    for (std::size_t i = 0; i + 1 < Ns.size(); ++i)
        if (Ns[i] >= Ns[i + 1]) throw UsageError("character_average_ladder: scales must ascend");
    if (Ns.front() < 1) throw UsageError("character_average_ladder: scales start at 1");
    std::vector<std::complex<double>> out;
    CompensatedSum re, im;
    std::size_t next = 0;
    for (std::int64_t n = 0; n < Ns.back() && next < Ns.size(); ++n) {
        double phase = torus_phase(n, chi.theta[0]);
        double w = c(el(n));
        re.add(w * std::cos(kTau * phase));
        im.add(w * std::sin(kTau * phase));
        while (next < Ns.size() && n + 1 == Ns[next]) {
            double m = static_cast<double>(Ns[next]);
            out.emplace_back(re.value() / m, im.value() / m);
            ++next;
        }
    }
    return out;
}

// --- Kronecker decomposition --------------------------------------------------------

// f = f_kr + f_perp with f_perp orthogonal to the Kronecker factor, in closed
// form for the catalog pairs. Anything else is refused rather than estimated.
inline std::pair<Observable, Observable> kronecker_project(const SystemModel& sys,
                                                           const Observable& f) {
    switch (sys.kind()) {
        case SysKind::Rotation:
            // a group rotation is its own Kronecker factor, whatever f is
            return {f, Observable::constant(0.0)};
        case SysKind::Bernoulli: {
            // trivial Kronecker factor: project to the mean
            if (f.shape() != ObsShape::Coord && f.shape() != ObsShape::Const)
                throw NoDecompositionError(
                    "no analytic decomposition for this sign-shift observable");
            Observable kr = Observable::constant(*f.integral());
            if (f.shape() == ObsShape::Const) return {kr, Observable::constant(0.0)};
            return {kr, f};  // coord has mean zero, so f_perp is f itself
        }
        case SysKind::Product: {
            // phi(x) psi(omega): factor through psi's mean
            if (f.shape() == ObsShape::Const || f.shape() == ObsShape::CosChar ||
                f.shape() == ObsShape::SinChar)
                return {f, Observable::constant(0.0)};  // depends on the rotation half only
            if (f.shape() == ObsShape::Coord) return {Observable::constant(0.0), f};
            if (f.shape() != ObsShape::Product)
                throw NoDecompositionError("no analytic decomposition for this product observable");
            // right factor is a path coordinate (mean 0) or a constant, so
            // f_kr is either 0 or f itself; nothing in between can arise
            double psi_mean = *f.right().integral();
            if (psi_mean == 0.0) return {Observable::constant(0.0), f};
            return {f, Observable::constant(0.0)};
        }
        case SysKind::Skew:
            throw NoDecompositionError(
                "no analytic decomposition in the catalog for skew products");
    }
    throw NoDecompositionError("unreachable");
}

// --- genericity ---------------------------------------------------------------------

// max over N in [window_lo, window_hi] of |E_{g in F_N} f(g x) - integral(f)|
inline double genericity_gap(const SystemModel& sys, const Observable& f, const SysPoint& x,
                             const FolnerSeq& seq, std::int64_t window_lo,
                             std::int64_t window_hi) {
    auto integral = f.integral();
    if (!integral) throw ConfigError("genericity_gap: observable has no closed-form integral");
    if (!(seq.model() == sys.acting_group()))
        throw UsageError("genericity_gap: sequence model differs from the acting group");
    window_lo = std::max<std::int64_t>(1, window_lo);
    window_hi = std::min(window_hi, seq.n_max());
    if (window_lo > window_hi) throw UsageError("genericity_gap: empty window");
    auto inc = detail::nested_increments(seq, window_hi);
    CompensatedSum s;
    double worst = 0.0;
    for (std::int64_t n = 1; n <= window_hi; ++n) {
        for (std::size_t t = inc.offset[n - 1]; t < inc.offset[n]; ++t)
            s.add(f.eval(sys.act(x, inc.added[t])));
        if (n >= window_lo) {
            double mean = s.value() / static_cast<double>(inc.offset[n]);
            worst = std::max(worst, std::abs(mean - *integral));
        }
    }
    return worst;
}

}  // namespace folnerlab
