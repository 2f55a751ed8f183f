// Seeded generators for property-style tests.
#pragma once

#include <set>
#include <vector>

#include "folnerlab/group.hpp"
#include "folnerlab/rng.hpp"

namespace testgen {

using folnerlab::Coord;
using folnerlab::FiniteRegion;
using folnerlab::GroupElement;
using folnerlab::GroupModel;

inline Coord coord_in(folnerlab::rng::Stream& s, Coord lo, Coord hi) {
    return lo + static_cast<Coord>(s.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline GroupElement element(folnerlab::rng::Stream& s, const GroupModel& m, Coord radius) {
    GroupElement g;
    for (int i = 0; i < m.dim(); ++i) g.c[i] = coord_in(s, -radius, radius);
    return g;
}

inline FiniteRegion region(folnerlab::rng::Stream& s, const GroupModel& m, std::size_t max_size,
                           Coord radius) {
    std::size_t n = 1 + s.next_u64() % max_size;
    std::vector<GroupElement> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(element(s, m, radius));
    return FiniteRegion::from_elements(m, std::move(v));
}

inline std::vector<GroupModel> all_models() {
    return {GroupModel::int_line(), GroupModel::int_grid(2), GroupModel::heisenberg(),
            GroupModel::lattice_r(0.01)};
}

}  // namespace testgen
