#include <doctest.h>

#include "simrel/grid.hpp"
#include "simrel/synthesis.hpp"
#include "support/generators.hpp"

using namespace simrel;
using namespace simrel::testing;

namespace {

bool controlled_invariant(const FiniteSystem& s, const IndexSet& set) {
    for (Index x : set) {
        bool ok = false;
        for (Index u = 0; u < s.num_inputs() && !ok; ++u) {
            const auto& p = s.post(x, u);
            ok = !p.empty() && is_subset(p, set);
        }
        if (!ok) return false;
    }
    return true;
}

// Union of every controlled-invariant subset of `safe`, by enumeration.
IndexSet brute_force_invariant(const FiniteSystem& s, const IndexSet& safe) {
    IndexSet best;
    for (std::uint32_t mask = 0; mask < (1u << safe.size()); ++mask) {
        IndexSet sub;
        for (std::size_t i = 0; i < safe.size(); ++i)
            if (mask & (1u << i)) sub.push_back(safe[i]);
        if (controlled_invariant(s, sub)) best = set_union(best, sub);
    }
    return best;
}

// Worst-case steps to target by value iteration over the full game, no
// bound: returns kUnreachable for states that cannot be forced in.
std::vector<std::size_t> game_value(const FiniteSystem& s, const IndexSet& target) {
    std::vector<std::size_t> v(s.num_states(), kUnreachable);
    for (Index x : target) v[x] = 0;
    for (std::size_t round = 0; round < s.num_states(); ++round) {
        auto nv = v;
        for (Index x = 0; x < s.num_states(); ++x) {
            if (v[x] == 0) continue;
            for (Index u = 0; u < s.num_inputs(); ++u) {
                const auto& p = s.post(x, u);
                if (p.empty()) continue;
                std::size_t w = 0;
                for (Index y : p) w = std::max(w, v[y]);
                if (w != kUnreachable) nv[x] = std::min(nv[x], w + 1);
            }
        }
        v = nv;
    }
    return v;
}

BehaviorSet closed_loop(const StaticController& sc, const FiniteSystem& s2, std::size_t h) {
    auto loop = feedback_compose(controller_as_system(sc), GeneralSystem::from_simple(s2));
    return project_plant(behavior(loop, sc.domain, h), s2.num_states());
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("safety on a self-loop system") {
    FiniteSystem s(LabelSet({"a", "b"}), LabelSet({"u", "w"}));
    s.add_transition(0, 0, 0);
    s.add_transition(0, 1, 0);
    s.add_transition(1, 0, 1);
    auto sc = synthesize_safety(s, {0, 1});
    CHECK(sc.domain == IndexSet{0, 1});
    CHECK(sc.choices[0] == IndexSet{0, 1});
    CHECK(sc.choices[1] == IndexSet{0});
    CHECK(describe(sc.spec, s.states()) == "safety {a,b}");
}

TEST_CASE("safety on a chain into an unsafe sink") {
    FiniteSystem s(LabelSet({"a", "b", "sink"}), LabelSet({"u"}));
    s.add_transition(0, 0, 1);
    s.add_transition(1, 0, 2);
    s.add_transition(2, 0, 2);
    auto sc = synthesize_safety(s, {0, 1});
    CHECK_FALSE(sc.feasible());
    CHECK_THROWS_AS(controller_as_system(sc), InfeasibleController);
    CHECK_THROWS_AS(synthesize_safety(s, {3}), UsageError);
}

TEST_CASE("safety is the maximal controlled invariant subset") {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        auto s = random_system(rng, labels("x", pick(rng, 1, 6)), labels("u", pick(rng, 1, 3)), 0.3);
        IndexSet safe;
        for (Index x = 0; x < s.num_states(); ++x)
            if (coin(rng, 0.7)) safe.push_back(x);
        auto sc = synthesize_safety(s, safe);
        REQUIRE(sc.domain == brute_force_invariant(s, safe));
        for (Index x : sc.domain) {
            CHECK_FALSE(sc.choices[x].empty());
            for (Index u = 0; u < s.num_inputs(); ++u) {
                const auto& p = s.post(x, u);
                CHECK(contains(sc.choices[x], u) == (!p.empty() && is_subset(p, sc.domain)));
            }
        }
        if (!sc.feasible()) continue;
        for (std::size_t h = 1; h <= 8; h += 7) {
            for (const auto& t : closed_loop(sc, s, h).traces) {
                CHECK(t.end == TraceEnd::truncated);
                for (Index y : t.outputs) CHECK(contains(safe, y));
            }
        }
    }
}

TEST_CASE("reach values follow the worst-case distance") {
    // chain 0 -> 1 -> 2 -> 3 (target), 4 isolated
    FiniteSystem s(LabelSet({"c0", "c1", "c2", "c3", "c4"}), LabelSet({"u"}));
    for (Index i = 0; i < 3; ++i) s.add_transition(i, 0, i + 1);
    s.add_transition(3, 0, 3);
    s.add_transition(4, 0, 4);
    auto sc = synthesize_reach(s, {3}, 10);
    CHECK(sc.value == std::vector<std::size_t>{3, 2, 1, 0, kUnreachable});
    CHECK(sc.domain == IndexSet{0, 1, 2, 3});
    CHECK(sc.choices[3] == IndexSet{0});
    auto bounded = synthesize_reach(s, {3}, 2);
    CHECK(bounded.domain == IndexSet{1, 2, 3});
    CHECK(describe(bounded.spec, s.states()) == "reach {c3} within 2");
}

TEST_CASE("reach controllers on random systems") {
    Rng rng(23);
    for (int i = 0; i < 400; ++i) {
        auto s = random_system(rng, labels("x", pick(rng, 1, 6)), labels("u", pick(rng, 1, 3)), 0.3);
        IndexSet target{pick(rng, 0, s.num_states() - 1)};
        const std::size_t bound = pick(rng, 1, 6);
        auto sc = synthesize_reach(s, target, bound);
        auto oracle = game_value(s, target);
        for (Index x = 0; x < s.num_states(); ++x) {
            const bool in_domain = oracle[x] != kUnreachable && oracle[x] <= bound;
            REQUIRE(contains(sc.domain, x) == in_domain);
            if (in_domain) CHECK(sc.value[x] == oracle[x]);
        }
        if (!sc.feasible()) continue;
        // every closed-loop trace from the domain visits the target in time
        for (const auto& t : closed_loop(sc, s, bound + 1).traces) {
            bool hit = false;
            for (std::size_t k = 0; k < t.outputs.size() && k <= bound; ++k) hit = hit || contains(target, t.outputs[k]);
            CHECK(hit);
        }
    }
}

TEST_CASE("controller as a static system") {
    auto s = sys_a();
    auto sc = permissive_controller(s);
    auto c = controller_as_system(sc);
    CHECK(c.is_static());
    CHECK(c.inputs() == s.states());
    CHECK(c.outputs() == s.inputs());
    CHECK(feedback_composable(c, GeneralSystem::from_simple(s)).ok);
    // b has no available input, so the loop emits nothing there and the
    // prefix a is a dead end rather than a trace
    auto b = closed_loop(sc, s, 4);
    CHECK(b.traces.empty());
    CHECK(b.dead_ends == std::set<std::vector<Index>>{{0}});
}

TEST_CASE("noisier abstractions have smaller safe domains") {
    auto tb = make_affine_testbed(1);
    GridParams gp{0.25, 0.25, {}, {}};
    auto asr = construct_abstraction(RelationType::asr, tb.dyn, tb.gb, gp);
    auto mcr = construct_abstraction(RelationType::mcr, tb.dyn, tb.gb, gp);
    IndexSet safe;
    for (Index x = 0; x < asr.grid.size(); ++x)
        if (asr.grid[x][0] <= 0.75 + 1e-12) safe.push_back(x);
    auto da = synthesize_safety(asr.s2, safe).domain;
    auto dm = synthesize_safety(mcr.s2, safe).domain;
    CHECK(is_subset(dm, da));

    Rng rng(29);
    for (int i = 0; i < 300; ++i) {
        auto coarse = random_system(rng, labels("x", 5), labels("u", 2), 0.3);
        // adding transitions can only shrink the domain
        auto noisy = coarse;
        for (Index x = 0; x < 5; ++x)
            for (Index u = 0; u < 2; ++u)
                if (!noisy.post(x, u).empty() && coin(rng, 0.3)) noisy.add_transition(x, u, pick(rng, 0, 4));
        IndexSet sf{0, 1, 2, 3};
        CHECK(is_subset(synthesize_safety(noisy, sf).domain, synthesize_safety(coarse, sf).domain));
    }
}

}  // TEST_SUITE
