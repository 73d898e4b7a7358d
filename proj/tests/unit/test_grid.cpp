#include <doctest.h>

#include <cmath>

#include "simrel/grid.hpp"
#include "simrel/pipeline.hpp"
#include "support/sampling.hpp"

using namespace simrel;
using namespace simrel::testing;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grids") {
    auto g = build_grid(Box::cube(1, 0, 1), 0.5);
    REQUIRE(g.size() == 3);
    CHECK(g[0][0] == 0.0);
    CHECK(g[1][0] == 0.5);
    CHECK(g[2][0] == 1.0);
    CHECK(g.labels() == LabelSet({"0", "0.5", "1"}));
    CHECK(build_grid(Box::cube(2, 0, 1), 0.5).size() == 9);
    CHECK(build_grid(Box::cube(2, 0, 1), 0.5).labels()[1] == "(0,0.5)");
    CHECK_THROWS_AS(build_grid(Box::cube(1, 0, 1), 0.0), UsageError);
    CHECK_THROWS_AS(build_grid(Box::cube(1, 0, 1), -1.0), UsageError);

    auto wide = build_grid(Box::cube(1, 0, 1), 2.0);
    CHECK(wide.size() == 1);
    CHECK(wide.warnings().empty());
    auto none = build_grid(Box::cube(1, 0.5, 0.9), 2.0);
    CHECK(none.size() == 0);
    CHECK(none.warnings().size() == 1);
    CHECK(none.nearest(v1(0.7)) == kNoIndex);

    auto h = build_grid(Box::cube(2, -0.3, 0.7), 0.25);
    for (Index i = 0; i < h.size(); ++i) CHECK(h.index_of(h.lattice_coords(i)) == i);
    CHECK(h.index_of({100, 0}) == kNoIndex);
}

TEST_CASE("quantizer and nearest cell") {
    auto tb = make_affine_testbed(1);
    auto g = build_grid(Box::cube(1, 0, 1), 0.5);
    CHECK(quantize(tb.gb, g, 0.25, v1(0.45)) == IndexSet{1});
    CHECK(quantize(tb.gb, g, 0.25, v1(0.25)) == IndexSet{0, 1});
    CHECK(g.nearest(v1(0.25)) == 0);
    CHECK(g.nearest(v1(0.26)) == 1);
    CHECK(g.nearest(v1(7.0)) == 2);
    CHECK(nearest_lattice_point(v1(0.25), 0.5)[0] == 0.0);

    // nearest is the ∞-norm argmin with the lowest index on ties
    Rng rng(3);
    auto h = build_grid(Box::cube(2, 0, 1), 0.2);
    for (int i = 0; i < 2000; ++i) {
        // snap some samples onto cell boundaries to exercise ties
        Vec x = v2(uniform(rng, -0.2, 1.2), uniform(rng, -0.2, 1.2));
        if (coin(rng, 0.3)) x[0] = std::round(x[0] * 10) / 10;
        double bd = 1e300;
        for (Index p = 0; p < h.size(); ++p) bd = std::min(bd, (h[p] - x).lpNorm<Eigen::Infinity>());
        Index best = 0;
        while ((h[best] - x).lpNorm<Eigen::Infinity>() > bd + 1e-12) ++best;
        CHECK(h.nearest(x) == best);
        // under strictness the nearest cell is related
        const double eps = 0.15;
        if (Box::cube(2, 0, 1).contains(x)) CHECK(contains(quantize(tb.gb, h, eps, x), h.nearest(x)));
        IndexSet brute;
        for (Index p = 0; p < h.size(); ++p)
            if ((h[p] - x).norm() <= eps) brute.push_back(p);
        CHECK(quantize(tb.gb, h, eps, x) == brute);
    }
}

TEST_CASE("over-approximation target") {
    auto tb = make_affine_testbed(1);
    CHECK(tb.gb.rho == doctest::Approx(0.5));
    auto s = over_approx_target(tb.dyn, tb.gb, v1(0.5), v1(0.0), 0.25);
    CHECK(s.center[0] == doctest::Approx(0.45));
    CHECK(s.level == doctest::Approx(0.125));
    // the closed-loop image of [0.25, 0.75] is [0.325, 0.575]
    auto g = [&](double x) { return tb.dyn.f(v1(x), tb.gb.kappa(v1(x), v1(0.5), v1(0.0)))[0]; };
    CHECK(g(0.25) == doctest::Approx(0.325));
    CHECK(g(0.75) == doctest::Approx(0.575));

    auto loose = make_affine_testbed(1, 0.9, 0.0);
    CHECK(over_approx_target(loose.dyn, loose.gb, v1(0.5), v1(0.0), 0.25).level == doctest::Approx(0.9 * 0.25));
    auto unit = make_affine_testbed(1, 1.0, 0.0);
    CHECK(over_approx_target(unit.dyn, unit.gb, v1(0.5), v1(0.0), 0.25).level == doctest::Approx(0.25));
    CHECK(over_approx_target(tb.dyn, tb.gb, v1(0.5), v1(0.1), 0.0).level == 0.0);
}

TEST_CASE("parameter inequalities") {
    auto gb = make_affine_testbed(1).gb;
    auto fail = check_parameters(RelationType::asrbb, gb, {0.5, 0.25, {}, {}}, 1);
    CHECK_FALSE(fail.ok());
    REQUIRE(fail.first_failure());
    CHECK(fail.first_failure()->name == "asrbb_step");
    CHECK(fail.first_failure()->rhs == doctest::Approx(0.25));
    CHECK(check_parameters(RelationType::asrbb, gb, {0.25, 0.25, {}, {}}, 1).ok());

    auto asrb = check_parameters(RelationType::asrb, gb, {0.25, 0.25, 0.2, 0.1}, 1);
    CHECK(asrb.ok());
    CHECK(asrb.items.size() == 4);
    CHECK(asrb.items.back().rhs == doctest::Approx(0.4));
    CHECK_THROWS_AS(check_parameters(RelationType::asrb, gb, {0.25, 0.25, {}, {}}, 1), UsageError);
    CHECK_THROWS_AS(check_parameters(RelationType::frr, gb, {0.25, 0.25, {}, {}}, 1), UsageError);
    CHECK_FALSE(check_parameters(RelationType::mcr, gb, {0.6, 0.25, {}, {}}, 1).ok());
    CHECK(check_parameters(RelationType::mcr, gb, {0.5, 0.25, {}, {}}, 1).ok());

    // ASRB does not need contraction
    auto expanding = make_affine_testbed(1, 1.2, 0.0).gb;
    CHECK(expanding.rho > 1.0);
    CHECK_FALSE(check_parameters(RelationType::asrbb, expanding, {0.01, 0.25, {}, {}}, 1).ok());
    CHECK(check_parameters(RelationType::asrb, expanding, {0.1, 0.25, 0.1, 0.1}, 1).ok());

    auto tb = make_affine_testbed(1);
    CHECK_THROWS_AS(construct_abstraction(RelationType::asrbb, tb.dyn, tb.gb, {0.5, 0.25, {}, {}}), ParameterError);
    try {
        construct_abstraction(RelationType::asrbb, tb.dyn, tb.gb, {0.5, 0.25, {}, {}});
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("asrbb_step") != std::string::npos);
    }
}

TEST_CASE("transition maps on the one-dimensional fixture") {
    auto tb = make_affine_testbed(1);
    GridParams coarse{0.5, 0.25, {}, {}};
    auto mcr = construct_abstraction(RelationType::mcr, tb.dyn, tb.gb, coarse);
    auto asr = construct_abstraction(RelationType::asr, tb.dyn, tb.gb, coarse);
    CHECK(mcr.s2.post(1, 0) == IndexSet{1});
    CHECK(asr.s2.post(1, 0) == IndexSet{1});
    CHECK(mcr.s2.states() == LabelSet({"0", "0.5", "1"}));
    CHECK(mcr.s2.inputs() == LabelSet({"0", "0.1"}));

    auto asrbb = construct_abstraction(RelationType::asrbb, tb.dyn, tb.gb, {0.25, 0.25, {}, {}});
    CHECK(asrbb.s2.post(2, 0) == IndexSet{2});

    auto asrb = construct_abstraction(RelationType::asrb, tb.dyn, tb.gb, {0.25, 0.25, 0.2, 0.1});
    REQUIRE(asrb.subgrid);
    // cover of [0.25, 0.75] by the 0.2 lattice: 0.2, 0.4, 0.6, 0.8
    CHECK(asrb.covers[2] == IndexSet{1, 2, 3, 4});
    // f(z, κ(z, 0.5, 0)) = 0.5 z + 0.2 gives 0.3, 0.4, 0.5, 0.6 -> cells 0.25 and 0.5
    CHECK(asrb.s2.post(2, 0) == IndexSet{1, 2});
    for (Index x = 0; x < asrb.grid.size(); ++x)
        for (Index u = 0; u < 2; ++u) CHECK(asrb.s2.post(x, u).size() <= asrb.covers[x].size());
}

TEST_CASE("sub-grid covers") {
    auto gb = make_affine_testbed(1).gb;
    auto sub = build_grid(Box::cube(1, 0, 1), 0.2);
    auto z = subgrid_cover(gb, sub, Box::cube(1, 0, 1), v1(0.5), 0.25);
    CHECK(z == IndexSet{1, 2, 3, 4});
    // same grid and a level at least eps gives the cell itself
    auto g = build_grid(Box::cube(1, 0, 1), 0.25);
    CHECK(subgrid_cover(gb, g, Box::cube(1, 0, 1), v1(0.5), 0.1) == IndexSet{2});
    CHECK(subgrid_cover(gb, sub, Box::cube(1, 0, 1), v1(0.5), 0.0).size() <= 2);

    // covers contain every sampled point of the clipped cell
    Rng rng(5);
    auto sub2 = build_grid(Box::cube(2, 0, 1), 0.07);
    for (int i = 0; i < 30; ++i) {
        Vec c = v2(0.1 * pick(rng, 0, 10), 0.1 * pick(rng, 0, 10));
        auto cover = subgrid_cover(gb, sub2, Box::cube(2, 0, 1), c, 0.15);
        for (int s = 0; s < 200; ++s) {
            Vec x = sample_cell(rng, c, 0.15, Box::cube(2, 0, 1));
            bool hit = false;
            for (Index p : cover) hit = hit || (sub2[p] - x).norm() <= 0.05 + 1e-12;
            CHECK(hit);
        }
    }
}

TEST_CASE("structural properties of the constructions") {
    for (std::string fx : {"1d", "2d"}) {
        auto s = testbed_setup(fx, RelationType::mcr);
        auto asr = construct_abstraction(RelationType::asr, s.tb.dyn, s.tb.gb, s.gp);
        auto mcr = construct_abstraction(RelationType::mcr, s.tb.dyn, s.tb.gb, s.gp);
        auto bb = testbed_setup(fx, RelationType::asrbb);
        auto asrbb = construct_abstraction(RelationType::asrbb, bb.tb.dyn, bb.tb.gb, bb.gp);
        for (Index x = 0; x < asr.grid.size(); ++x) {
            for (Index u = 0; u < asr.s2.num_inputs(); ++u) CHECK(is_subset(asr.s2.post(x, u), mcr.s2.post(x, u)));
        }
        for (Index x = 0; x < asrbb.grid.size(); ++x)
            for (Index u = 0; u < asrbb.s2.num_inputs(); ++u) CHECK(asrbb.s2.post(x, u).size() == 1);
        CHECK(is_deterministic(asrbb.s2));
    }
}

TEST_CASE("parallel construction equals serial") {
    for (std::string fx : {"1d", "2d"}) {
        for (auto t : {RelationType::asr, RelationType::mcr, RelationType::asrbb, RelationType::asrb}) {
            auto s = testbed_setup(fx, t);
            auto par = construct_abstraction(t, s.tb.dyn, s.tb.gb, s.gp);
            auto ser = construct_abstraction_serial(t, s.tb.dyn, s.tb.gb, s.gp);
            REQUIRE(par.grid.size() == ser.grid.size());
            for (Index x = 0; x < par.grid.size(); ++x)
                for (Index u = 0; u < par.s2.num_inputs(); ++u) CHECK(par.s2.post(x, u) == ser.s2.post(x, u));
            CHECK(par.covers == ser.covers);
            CHECK(par.dropped == ser.dropped);
            CHECK(par.warnings == ser.warnings);
        }
    }
}

TEST_CASE("sampled soundness of the constructions") {
    Rng rng(11);
    for (std::string fx : {"1d", "2d"}) {
        for (auto t : {RelationType::asr, RelationType::mcr, RelationType::asrbb, RelationType::asrb}) {
            auto s = testbed_setup(fx, t);
            auto a = construct_abstraction(t, s.tb.dyn, s.tb.gb, s.gp);
            auto [checked, bad] = sampled_soundness(rng, s, a, 2000);
            CHECK(checked > 1000);
            CHECK_MESSAGE(bad == 0, fx << " " << to_string(t));
        }
    }
}

TEST_CASE("contraction bound on sampled cells") {
    Rng rng(13);
    auto tb = make_affine_testbed(2);
    auto g = build_grid(tb.dyn.bounds, 0.1);
    for (int i = 0; i < 2000; ++i) {
        const Vec& c = g[pick(rng, 0, g.size() - 1)];
        const Vec& u = tb.dyn.inputs[pick(rng, 0, tb.dyn.inputs.size() - 1)];
        const Vec x = sample_cell(rng, c, 0.15, Box::cube(2, -1, 2));
        const auto target = over_approx_target(tb.dyn, tb.gb, c, u, 0.15);
        CHECK(tb.gb.V(tb.dyn.f(x, tb.gb.kappa(x, c, u)), target.center) <= target.level + 1e-9);
    }
}

TEST_CASE("boundary leakage is reported") {
    auto tb = make_affine_testbed(1, 1.0, -0.5, Box::cube(1, 0, 1), {v1(0.3)});
    auto a = construct_abstraction(RelationType::asrbb, tb.dyn, tb.gb, {0.25, 0.25, {}, {}});
    // 0.75 + 0.3 and 1 + 0.3 leave the box
    CHECK(a.dropped == std::vector<std::pair<Index, Index>>{{3, 0}, {4, 0}});
    CHECK_FALSE(a.warnings.empty());
}

}  // TEST_SUITE
