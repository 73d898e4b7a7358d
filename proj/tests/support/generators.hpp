#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "simrel/relations.hpp"

namespace simrel::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline bool coin(Rng& rng, double p) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

inline LabelSet labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
    return LabelSet(std::move(v));
}

/// Every (x, u) gets each successor independently with probability `density`.
inline FiniteSystem random_system(Rng& rng, LabelSet states, LabelSet inputs, double density) {
    FiniteSystem s(std::move(states), std::move(inputs));
    for (Index x = 0; x < s.num_states(); ++x)
        for (Index u = 0; u < s.num_inputs(); ++u)
            for (Index y = 0; y < s.num_states(); ++y)
                if (coin(rng, density)) s.add_transition(x, u, y);
    return s;
}

/// As random_system, but each F(x, u) is empty or a singleton.
inline FiniteSystem random_deterministic(Rng& rng, LabelSet states, LabelSet inputs, double avail) {
    FiniteSystem s(std::move(states), std::move(inputs));
    for (Index x = 0; x < s.num_states(); ++x)
        for (Index u = 0; u < s.num_inputs(); ++u)
            if (coin(rng, avail)) s.add_transition(x, u, pick(rng, 0, s.num_states() - 1));
    return s;
}

inline BinaryRelation random_relation(Rng& rng, std::size_t n1, std::size_t n2, double density) {
    BinaryRelation r(n1, n2);
    for (Index a = 0; a < n1; ++a)
        for (Index b = 0; b < n2; ++b)
            if (coin(rng, density)) r.add(a, b);
    return r;
}

/// Relation that is the graph of a random map, possibly with a few extra pairs.
inline BinaryRelation random_map_relation(Rng& rng, std::size_t n1, std::size_t n2, double extra) {
    BinaryRelation r(n1, n2);
    for (Index a = 0; a < n1; ++a) {
        r.add(a, pick(rng, 0, n2 - 1));
        for (Index b = 0; b < n2; ++b)
            if (coin(rng, extra)) r.add(a, b);
    }
    return r;
}

struct Instance {
    FiniteSystem s1;
    FiniteSystem s2;
    BinaryRelation r;
};

/// Instances with at most 5 concrete states, 4 abstract states and 3 inputs
/// on each side. Input labels are shared ("u0", "u1", ...), and roughly half
/// of the abstract systems are built as the existential image of S1 under R
/// so that the stronger relations hold often enough to be exercised.
inline Instance random_instance(Rng& rng) {
    const std::size_t n1 = pick(rng, 1, 5), n2 = pick(rng, 1, 4);
    const std::size_t m1 = pick(rng, 1, 3), m2 = pick(rng, 1, m1);
    Instance in;
    const auto mode = pick(rng, 0, 5);
    in.s1 = coin(rng, 0.5) ? random_deterministic(rng, labels("p", n1), labels("u", m1), 0.8)
                           : random_system(rng, labels("p", n1), labels("u", m1), 0.3);
    in.r = mode % 2 == 0 ? random_relation(rng, n1, n2, 0.35) : random_map_relation(rng, n1, n2, 0.1);
    if (mode < 3) {
        in.s2 = mode == 2 ? random_deterministic(rng, labels("q", n2), labels("u", m2), 0.7)
                          : random_system(rng, labels("q", n2), labels("u", m2), 0.35);
        return in;
    }
    // existential image, optionally thinned to a deterministic system
    in.s2 = FiniteSystem(labels("q", n2), labels("u", m2));
    for (Index x1 = 0; x1 < n1; ++x1)
        for (Index x2 : in.r.image(x1))
            for (Index u = 0; u < m2; ++u)
                for (Index xp : in.s1.post(x1, u))
                    for (Index y : in.r.image(xp)) in.s2.add_transition(x2, u, y);
    if (mode == 5) {
        FiniteSystem d(in.s2.states(), in.s2.inputs());
        for (Index x = 0; x < n2; ++x)
            for (Index u = 0; u < m2; ++u) {
                const auto& p = in.s2.post(x, u);
                if (!p.empty()) d.add_transition(x, u, p[pick(rng, 0, p.size() - 1)]);
            }
        in.s2 = std::move(d);
    }
    for (Index x = 0; x < n2; ++x)
        for (Index u = 0; u < m2; ++u)
            if (coin(rng, 0.1)) in.s2.add_transition(x, u, pick(rng, 0, n2 - 1));
    return in;
}

/// Draws instances until one satisfies relation type t (bounded attempts).
inline std::optional<Instance> passing_instance(Rng& rng, RelationType t, std::size_t attempts = 10000) {
    for (std::size_t i = 0; i < attempts; ++i) {
        auto in = random_instance(rng);
        if (in.r.empty()) continue;
        if (check_relation_serial(t, in.s1, in.s2, in.r).holds) return in;
    }
    return std::nullopt;
}

// Fixtures ---------------------------------------------------------------------

/// States {a, b}, input {u}, F(a, u) = {b}; b deadlocks.
inline FiniteSystem sys_a() {
    FiniteSystem s(LabelSet({"a", "b"}), LabelSet({"u"}));
    s.add_transition(0, 0, 1);
    return s;
}

/// S1 = SYS_A, S2 = ({A, B, C}, {U}) with F2(A, U) = {B} and
/// R = {(a, A), (b, B), (b, C)}: ASR holds, MCR fails at (a, A, U).
inline Instance abc_fixture() {
    Instance in;
    in.s1 = sys_a();
    in.s2 = FiniteSystem(LabelSet({"A", "B", "C"}), LabelSet({"U"}));
    in.s2.add_transition(0, 0, 1);
    in.r = BinaryRelation(2, 3, {{0, 0}, {1, 1}, {1, 2}});
    return in;
}

/// Deterministic three-state system related to itself by the identity.
inline Instance identity_fixture() {
    FiniteSystem s(LabelSet({"p", "q", "r"}), LabelSet({"u", "w"}));
    s.add_transition(0, 0, 1);
    s.add_transition(0, 1, 2);
    s.add_transition(1, 0, 2);
    s.add_transition(2, 0, 2);
    s.add_transition(2, 1, 0);
    return {s, s, BinaryRelation::identity(3)};
}

/// Quotient of a three-state system onto two cells; MCR and FRR hold.
inline Instance quotient_fixture() {
    Instance in;
    in.s1 = FiniteSystem(LabelSet({"a", "b", "c"}), LabelSet({"u", "w"}));
    in.s1.add_transition(0, 0, 1);
    in.s1.add_transition(0, 1, 2);
    in.s1.add_transition(1, 0, 2);
    in.s1.add_transition(1, 1, 0);
    in.s1.add_transition(2, 0, 1);
    in.s1.add_transition(2, 1, 0);
    in.s2 = FiniteSystem(LabelSet({"A", "B"}), LabelSet({"u", "w"}));
    in.s2.add_transition(0, 0, 1);
    in.s2.add_transition(0, 1, 1);
    in.s2.add_transition(1, 0, 1);
    in.s2.add_transition(1, 1, 0);
    in.r = BinaryRelation(3, 2, {{0, 0}, {1, 1}, {2, 1}});
    return in;
}

/// Concrete system with a choice between two inputs, one of which is safe,
/// abstracted by a nondeterministic two-cell system with disjoint input
/// labels. Every type except FRR holds.
inline Instance choice_fixture() {
    Instance in;
    in.s1 = FiniteSystem(LabelSet({"s", "t", "v"}), LabelSet({"l", "r"}));
    in.s1.add_transition(0, 0, 1);
    in.s1.add_transition(0, 1, 2);
    in.s1.add_transition(1, 0, 0);
    in.s1.add_transition(1, 1, 1);
    in.s1.add_transition(2, 0, 2);
    in.s2 = FiniteSystem(LabelSet({"S", "T"}), LabelSet({"go", "stay"}));
    in.s2.add_transition(0, 0, 1);
    in.s2.add_transition(1, 0, 0);
    in.s2.add_transition(1, 1, 1);
    in.s2.add_transition(1, 1, 0);
    in.r = BinaryRelation(3, 2, {{0, 0}, {1, 1}});
    return in;
}

inline std::vector<Instance> all_fixtures() {
    return {abc_fixture(), identity_fixture(), quotient_fixture(), choice_fixture()};
}

}  // namespace simrel::testing
