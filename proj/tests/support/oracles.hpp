#pragma once

#include <functional>
#include <set>
#include <vector>

#include "simrel/system.hpp"
#include "simrel/relations.hpp"

// Naive evaluations written straight from the quantified formulas, kept apart
// from the library so that tests compare two independent implementations.
namespace simrel::oracle {

inline bool exists(std::size_t n, const std::function<bool(Index)>& p) {
    for (Index i = 0; i < n; ++i)
        if (p(i)) return true;
    return false;
}

inline bool forall(std::size_t n, const std::function<bool(Index)>& p) {
    for (Index i = 0; i < n; ++i)
        if (!p(i)) return false;
    return true;
}

inline bool in(const IndexSet& s, Index v) { return std::find(s.begin(), s.end(), v) != s.end(); }

inline bool avail(const FiniteSystem& s, Index x, Index u) { return !s.post(x, u).empty(); }

inline bool related(const BinaryRelation& r, Index a, Index b) {
    for (auto [x, y] : r.pairs())
        if (x == a && y == b) return true;
    return false;
}

inline bool holds(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r) {
    const std::size_t n1 = s1.num_states(), n2 = s2.num_states();
    const std::size_t m1 = s1.num_inputs(), m2 = s2.num_inputs();
    auto R = [&](Index a, Index b) { return related(r, a, b); };
    auto each_pair = [&](const std::function<bool(Index, Index)>& body) {
        return forall(n1, [&](Index x1) { return forall(n2, [&](Index x2) { return !R(x1, x2) || body(x1, x2); }); });
    };
    auto each_u2 = [&](Index x2, const std::function<bool(Index)>& body) {
        return forall(m2, [&](Index u2) { return !avail(s2, x2, u2) || body(u2); });
    };
    auto some_u1 = [&](Index x1, const std::function<bool(Index)>& body) {
        return exists(m1, [&](Index u1) { return avail(s1, x1, u1) && body(u1); });
    };
    auto all_next1 = [&](Index x1, Index u1, const std::function<bool(Index)>& body) {
        return forall(n1, [&](Index xp) { return !in(s1.post(x1, u1), xp) || body(xp); });
    };
    auto refines = [&](Index xp, Index x2, Index u2) {
        const bool nonempty = exists(n2, [&](Index y) { return R(xp, y); });
        const bool inside = forall(n2, [&](Index y) { return !R(xp, y) || in(s2.post(x2, u2), y); });
        return nonempty && inside;
    };

    switch (t) {
        case RelationType::asr:
            return each_pair([&](Index x1, Index x2) {
                return each_u2(x2, [&](Index u2) {
                    return some_u1(x1, [&](Index u1) {
                        return all_next1(x1, u1, [&](Index xp) {
                            return exists(n2, [&](Index y) { return R(xp, y) && in(s2.post(x2, u2), y); });
                        });
                    });
                });
            });
        case RelationType::asrb:
            return each_pair([&](Index x1, Index x2) {
                return each_u2(x2, [&](Index u2) {
                    return some_u1(x1, [&](Index u1) {
                        return exists(n2, [&](Index y) {
                            return in(s2.post(x2, u2), y) && all_next1(x1, u1, [&](Index xp) { return R(xp, y); });
                        });
                    });
                });
            });
        case RelationType::asrbb:
            return forall(n2, [&](Index x2) {
                return each_u2(x2, [&](Index u2) {
                    return exists(n2, [&](Index y) {
                        if (!in(s2.post(x2, u2), y)) return false;
                        return forall(n1, [&](Index x1) {
                            if (!R(x1, x2)) return true;
                            return some_u1(x1, [&](Index u1) {
                                return all_next1(x1, u1, [&](Index xp) { return R(xp, y); });
                            });
                        });
                    });
                });
            });
        case RelationType::mcr:
            return each_pair([&](Index x1, Index x2) {
                return each_u2(x2, [&](Index u2) {
                    return some_u1(x1, [&](Index u1) {
                        return all_next1(x1, u1, [&](Index xp) { return refines(xp, x2, u2); });
                    });
                });
            });
        case RelationType::frr:
            return each_pair([&](Index x1, Index x2) {
                return each_u2(x2, [&](Index u2) {
                    const auto u1 = s1.inputs().find(s2.inputs()[u2]);
                    if (!u1 || !avail(s1, x1, *u1)) return false;
                    return all_next1(x1, *u1, [&](Index xp) { return refines(xp, x2, u2); });
                });
            });
    }
    return false;
}

/// Output traces of an autonomous or general system by plain recursion over
/// every (input, output, internal) choice. Same conventions as the library:
/// blocked when F is empty, otherwise truncated at the horizon, dead ends
/// apart.
inline BehaviorSet behavior(const GeneralSystem& sys, const IndexSet& x0, std::size_t horizon) {
    BehaviorSet b;
    b.horizon = horizon;
    std::vector<Index> ys;
    std::function<void(Index)> go = [&](Index x) {
        bool any = false;
        for (Index u = 0; u < sys.inputs().size(); ++u)
            for (const auto& c : sys.output(x, u)) {
                any = true;
                ys.push_back(c.y);
                if (sys.next(x, c.v).empty()) {
                    b.traces.insert({ys, TraceEnd::blocked});
                } else if (ys.size() == horizon) {
                    b.traces.insert({ys, TraceEnd::truncated});
                } else {
                    for (Index xn : sys.next(x, c.v)) go(xn);
                }
                ys.pop_back();
            }
        if (!any && !ys.empty()) b.dead_ends.insert(ys);
    };
    for (Index x : x0) go(x);
    return b;
}

}  // namespace simrel::oracle
