#pragma once

#include <random>

#include "simrel/grid.hpp"
#include "simrel/pipeline.hpp"
#include "support/generators.hpp"

namespace simrel::testing {

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Uniform draw from S(c, eps) ∩ bounds by rejection, for the Euclidean V.
inline Vec sample_cell(Rng& rng, const Vec& c, double eps, const Box& bounds) {
    while (true) {
        Vec x(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i)
            x[i] = uniform(rng, std::max(c[i] - eps, bounds.lo[i]), std::min(c[i] + eps, bounds.hi[i]));
        if ((x - c).norm() <= eps) return x;
    }
}

struct TestbedSetup {
    AffineTestbed tb;
    GridParams gp;
};

/// Testbed and parameters of a named fixture; the 1-D fixture uses η = 0.5
/// for ASR and MCR.
inline TestbedSetup testbed_setup(const std::string& fixture, RelationType t) {
    auto cfg = fixture_config(fixture);
    TestbedSetup s{make_affine_testbed(cfg.n), cfg.params};
    if (fixture == "1d" && t != RelationType::asrbb && t != RelationType::asrb) s.gp.eta = 0.5;
    return s;
}

/// Draws x1 ∈ S(x2, ε), steps it with the closed-form h1 and checks the
/// defining formula of the construction. Returns (checked, violations).
inline std::pair<int, int> sampled_soundness(Rng& rng, const TestbedSetup& s, const GridAbstraction& a, int samples) {
    const double eps = s.gp.eps;
    int bad = 0, checked = 0;
    while (checked < samples) {
        const Index x2 = pick(rng, 0, a.grid.size() - 1);
        const Index u2 = pick(rng, 0, a.s2.num_inputs() - 1);
        const auto& post = a.s2.post(x2, u2);
        if (post.empty()) continue;
        const Vec x1 = sample_cell(rng, a.grid[x2], eps, s.tb.dyn.bounds);
        const Vec x1n = s.tb.dyn.f(x1, interface_input(a, s.tb.dyn, s.tb.gb, x2, u2, x1));
        const auto q = quantize(s.tb.gb, a.grid, eps, x1n);
        bool ok = true;
        switch (a.type) {
            case RelationType::mcr: ok = !q.empty() && is_subset(q, post); break;
            case RelationType::asr:
                // the cover is clipped to the bounds
                if (!s.tb.dyn.bounds.contains(x1n, 1e-12)) continue;
                ok = intersects(q, post);
                break;
            default: {
                const Index d = designated_successor(a, s.tb.dyn, s.tb.gb, x2, u2, x1);
                ok = d != kNoIndex && contains(post, d) && (x1n - a.grid[d]).norm() <= eps + 1e-9;
            }
        }
        ++checked;
        bad += !ok;
    }
    return {checked, bad};
}

}  // namespace simrel::testing
