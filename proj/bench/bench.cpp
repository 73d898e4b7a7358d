// Parallel kernels against their serial references.
//   bench [--quick]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

#include "simrel/grid.hpp"

using namespace simrel;

namespace {

template <class Fn>
double seconds(Fn&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

LabelSet names(const char* prefix, std::size_t n) {
    std::vector<std::string> l;
    for (std::size_t i = 0; i < n; ++i) l.push_back(prefix + std::to_string(i));
    return LabelSet(std::move(l));
}

FiniteSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t m, double density) {
    FiniteSystem s(names("x", n), names("u", m));
    std::bernoulli_distribution coin(density);
    for (Index x = 0; x < n; ++x)
        for (Index u = 0; u < m; ++u)
            for (Index y = 0; y < n; ++y)
                if (coin(rng)) s.add_transition(x, u, y);
    return s;
}

void row(const char* what, double serial, double parallel, bool same) {
    std::printf("%-36s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", what, serial, parallel,
                serial / parallel, same ? "results equal" : "RESULTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const int reps = quick ? 1 : 3;
    std::printf("threads: %d%s\n", omp_get_max_threads(), quick ? " (quick)" : "");
    bool all = true;

    {
        std::mt19937_64 rng(1);
        const auto s = random_system(rng, quick ? 8 : 40, 2, quick ? 0.2 : 0.06);
        const auto g = GeneralSystem::from_simple(s);
        const std::size_t h = quick ? 4 : 6;
        BehaviorSet a, b;
        const double ts = seconds([&] { a = behavior_serial(g, iota_set(s.num_states()), h); }, reps);
        const double tp = seconds([&] { b = behavior(g, iota_set(s.num_states()), h); }, reps);
        row("behavior", ts, tp, a == b);
        all = all && a == b;
    }
    {
        std::mt19937_64 rng(2);
        const std::size_t n1 = quick ? 30 : 400, n2 = quick ? 20 : 200;
        const auto s1 = random_system(rng, n1, 3, 0.02);
        const auto s2 = random_system(rng, n2, 3, 0.05);
        BinaryRelation r(n1, n2);
        std::bernoulli_distribution coin(0.3);
        for (Index a = 0; a < n1; ++a)
            for (Index b = 0; b < n2; ++b)
                if (coin(rng)) r.add(a, b);
        // a dense relation fails early, the identity on S1 is scanned in full
        const BinaryRelation id = BinaryRelation::identity(n1);
        for (auto t : kAllRelationTypes) {
            for (bool full : {false, true}) {
                const auto& rel = full ? id : r;
                const auto& abs = full ? s1 : s2;
                CheckReport a, b;
                const double ts = seconds([&] { a = check_relation_serial(t, s1, abs, rel); }, reps);
                const double tp = seconds([&] { b = check_relation(t, s1, abs, rel); }, reps);
                const bool same = a.holds == b.holds && a.counterexample == b.counterexample;
                row(("check_relation " + to_string(t) + (full ? " identity" : " dense")).c_str(), ts, tp, same);
                all = all && same;
            }
        }
    }
    {
        const auto tb = make_affine_testbed(2);
        const double eta = quick ? 0.1 : 0.02;
        const GridParams gp{eta, eta * 1.5, eta * 0.7, eta * 0.5};
        for (auto t : {RelationType::asr, RelationType::mcr, RelationType::asrbb, RelationType::asrb}) {
            if (!check_parameters(t, tb.gb, gp, 2).ok()) continue;
            GridAbstraction a, b;
            const double ts = seconds([&] { a = construct_abstraction_serial(t, tb.dyn, tb.gb, gp); }, reps);
            const double tp = seconds([&] { b = construct_abstraction(t, tb.dyn, tb.gb, gp); }, reps);
            bool same = a.grid.size() == b.grid.size();
            for (Index x = 0; same && x < a.grid.size(); ++x)
                for (Index u = 0; u < a.s2.num_inputs(); ++u) same = same && a.s2.post(x, u) == b.s2.post(x, u);
            row(("construct_abstraction " + to_string(t)).c_str(), ts, tp, same);
            all = all && same;
        }
    }
    return all ? 0 : 1;
}
