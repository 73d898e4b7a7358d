#include "simrel/grid.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace simrel {

namespace {

constexpr double kSlack = 1e-12;

bool leq(double lhs, double rhs) { return lhs <= rhs + kSlack * std::max(1.0, std::abs(rhs)); }

std::string num(double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Euclidean distance from x to the box [lo, hi].
double box_distance(const Vec& x, const Vec& lo, const Vec& hi) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double d = 0.0;
        if (x[i] < lo[i]) d = lo[i] - x[i];
        else if (x[i] > hi[i]) d = x[i] - hi[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Euclidean distance from x to the farthest point of [lo, hi].
double box_far_distance(const Vec& x, const Vec& lo, const Vec& hi) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = std::max(std::abs(x[i] - lo[i]), std::abs(x[i] - hi[i]));
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

bool Box::contains(const Vec& x, double tol) const {
    if (x.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
}

Box Box::cube(std::size_t n, double lo, double hi) {
    return {Vec::Constant(static_cast<Eigen::Index>(n), lo), Vec::Constant(static_cast<Eigen::Index>(n), hi)};
}

AffineTestbed make_affine_testbed(std::size_t n, double a, double k, std::optional<Box> box, std::vector<Vec> inputs) {
    if (n == 0) throw UsageError("dimension must be positive");
    const auto N = static_cast<Eigen::Index>(n);
    AffineTestbed tb;
    tb.A = a * Eigen::MatrixXd::Identity(N, N);
    tb.K = k * Eigen::MatrixXd::Identity(N, N);
    if (inputs.empty()) {
        // {0, 0.1}^n in lexicographic order
        for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
            Vec u(N);
            for (std::size_t i = 0; i < n; ++i) u[static_cast<Eigen::Index>(i)] = (m >> (n - 1 - i)) & 1 ? 0.1 : 0.0;
            inputs.push_back(u);
        }
    }
    for (const auto& u : inputs)
        if (u.size() != N) throw UsageError("input dimension differs from state dimension");

    const Eigen::MatrixXd A = tb.A, K = tb.K;
    tb.dyn.n = n;
    tb.dyn.nu = n;
    tb.dyn.f = [A](const Vec& x, const Vec& u) -> Vec { return A * x + u; };
    tb.dyn.bounds = box ? *box : Box::cube(n, 0.0, 1.0);
    tb.dyn.inputs = std::move(inputs);

    auto id = [](double r) { return r; };
    tb.gb.name = "euclidean";
    tb.gb.V = [](const Vec& x, const Vec& y) { return (x - y).norm(); };
    tb.gb.kappa = [K](const Vec& y, const Vec& x, const Vec& u) -> Vec { return u + K * (y - x); };
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A + K);
    tb.gb.rho = svd.singularValues()(0);
    tb.gb.alpha_lo = tb.gb.alpha_hi = tb.gb.gamma = id;
    tb.gb.alpha_lo_inv = tb.gb.alpha_hi_inv = tb.gb.gamma_inv = id;
    return tb;
}

// Grid -------------------------------------------------------------------------

Grid::Grid(const Box& bounds, double eta) : eta_(eta) {
    if (!(eta > 0.0)) throw UsageError("grid step must be positive");
    if (bounds.lo.size() != bounds.hi.size() || bounds.lo.size() == 0) throw UsageError("malformed bounds");
    const std::size_t n = bounds.dim();
    first_.resize(n);
    count_.resize(n);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        const long a = static_cast<long>(std::ceil(bounds.lo[e] / eta - 1e-9));
        const long b = static_cast<long>(std::floor(bounds.hi[e] / eta + 1e-9));
        first_[i] = a;
        count_[i] = std::max(0L, b - a + 1);
        total *= static_cast<std::size_t>(count_[i]);
    }
    if (total == 0) {
        warnings_.push_back("no lattice point of step " + num(eta) + " lies inside the bounds");
        return;
    }
    points_.reserve(total);
    std::vector<long> k(first_);
    for (std::size_t p = 0; p < total; ++p) {
        Vec x(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) x[static_cast<Eigen::Index>(i)] = static_cast<double>(k[i]) * eta;
        points_.push_back(std::move(x));
        for (std::size_t i = n; i-- > 0;) {
            if (++k[i] < first_[i] + count_[i]) break;
            k[i] = first_[i];
        }
    }
}

Index Grid::index_of(const std::vector<long>& k) const {
    if (k.size() != dim() || points_.empty()) return kNoIndex;
    Index idx = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const long off = k[i] - first_[i];
        if (off < 0 || off >= count_[i]) return kNoIndex;
        idx = idx * static_cast<Index>(count_[i]) + static_cast<Index>(off);
    }
    return idx;
}

std::vector<long> Grid::lattice_coords(Index i) const {
    if (i >= size()) throw UsageError("grid index out of range");
    std::vector<long> k(dim());
    for (std::size_t d = dim(); d-- > 0;) {
        const auto c = static_cast<Index>(count_[d]);
        k[d] = first_[d] + static_cast<long>(i % c);
        i /= c;
    }
    return k;
}

Index Grid::nearest(const Vec& x) const {
    if (points_.empty()) return kNoIndex;
    const std::size_t n = dim();
    auto clamp = [&](std::size_t i, long k) { return std::clamp(k, first_[i], first_[i] + count_[i] - 1); };
    auto dist = [&](std::size_t i, long k) { return std::abs(x[static_cast<Eigen::Index>(i)] - static_cast<double>(k) * eta_); };

    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = x[static_cast<Eigen::Index>(i)] / eta_;
        const long lo = clamp(i, static_cast<long>(std::floor(q))), hi = clamp(i, static_cast<long>(std::ceil(q)));
        worst = std::max(worst, std::min(dist(i, lo), dist(i, hi)));
    }
    std::vector<long> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double q = (x[static_cast<Eigen::Index>(i)] - worst) / eta_;
        long c = clamp(i, static_cast<long>(std::floor(q)) - 1);
        while (dist(i, c) > worst) ++c;
        k[i] = c;
    }
    return index_of(k);
}

template <class Fn>
void Grid::for_range(const std::vector<long>& lo, const std::vector<long>& hi, Fn&& fn) const {
    const std::size_t n = dim();
    std::vector<long> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::max(lo[i], first_[i]);
        b[i] = std::min(hi[i], first_[i] + count_[i] - 1);
        if (a[i] > b[i]) return;
    }
    std::vector<long> k = a;
    while (true) {
        fn(index_of(k));
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++k[i] <= b[i]) break;
            k[i] = a[i];
            if (i == 0) return;
        }
    }
}

IndexSet Grid::within(const Vec& x, double radius) const {
    IndexSet out;
    if (points_.empty() || radius < 0) return out;
    std::vector<long> lo(dim()), hi(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const double c = x[static_cast<Eigen::Index>(i)];
        lo[i] = static_cast<long>(std::ceil((c - radius) / eta_ - 1e-9));
        hi[i] = static_cast<long>(std::floor((c + radius) / eta_ + 1e-9));
    }
    for_range(lo, hi, [&](Index p) {
        if ((points_[p] - x).norm() <= radius) out.push_back(p);
    });
    return out;
}

IndexSet Grid::voronoi_within(const Vec& x, double radius) const {
    IndexSet out;
    if (points_.empty() || radius < 0) return out;
    const double h = eta_ / 2;
    std::vector<long> lo(dim()), hi(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const double c = x[static_cast<Eigen::Index>(i)];
        lo[i] = static_cast<long>(std::ceil((c - radius - h) / eta_ - 1e-9));
        hi[i] = static_cast<long>(std::floor((c + radius + h) / eta_ + 1e-9));
    }
    const Vec half = Vec::Constant(x.size(), h);
    for_range(lo, hi, [&](Index p) {
        if (box_distance(x, points_[p] - half, points_[p] + half) <= radius + kSlack) out.push_back(p);
    });
    return out;
}

IndexSet Grid::voronoi_meeting(const Vec& lo_box, const Vec& hi_box) const {
    IndexSet out;
    if (points_.empty()) return out;
    const double h = eta_ / 2;
    std::vector<long> lo(dim()), hi(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        lo[i] = static_cast<long>(std::ceil((lo_box[e] - h) / eta_ - 1e-9));
        hi[i] = static_cast<long>(std::floor((hi_box[e] + h) / eta_ + 1e-9));
    }
    for_range(lo, hi, [&](Index p) { out.push_back(p); });
    return out;
}

LabelSet Grid::labels() const {
    std::vector<std::string> l;
    l.reserve(points_.size());
    for (const auto& p : points_) l.push_back(point_label(p));
    return LabelSet(std::move(l));
}

Grid build_grid(const Box& bounds, double eta) { return Grid(bounds, eta); }

Vec nearest_lattice_point(const Vec& x, double eta) {
    if (!(eta > 0.0)) throw UsageError("grid step must be positive");
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        // ties resolve to the lower lattice point
        const double q = x[i] / eta;
        const double lo = std::floor(q);
        out[i] = (q - lo <= 0.5 ? lo : lo + 1) * eta;
    }
    return out;
}

IndexSet quantize(const GrowthBound& gb, const Grid& grid, double eps, const Vec& x) {
    IndexSet out;
    for (Index p : grid.within(x, gb.alpha_lo_inv(eps) + 1e-9))
        if (gb.V(x, grid[p]) <= eps) out.push_back(p);
    return out;
}

std::string point_label(const Vec& x) {
    if (x.size() == 1) return num(x[0]);
    std::string s = "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? "," : "") + num(x[i]);
    return s + ")";
}

SublevelSet over_approx_target(const Dynamics& dyn, const GrowthBound& gb, const Vec& x2, const Vec& u2, double eps) {
    return {dyn.f(x2, u2), gb.rho * eps};
}

// Parameters -------------------------------------------------------------------

bool ParameterReport::ok() const { return first_failure() == nullptr; }

const Inequality* ParameterReport::first_failure() const {
    for (const auto& i : items)
        if (!i.holds) return &i;
    return nullptr;
}

std::string ParameterReport::describe() const {
    std::ostringstream os;
    os << to_string(type) << " parameters";
    for (const auto& i : items)
        os << "\n  " << (i.holds ? "ok   " : "FAIL ") << i.name << ": " << i.expression << " (" << num(i.lhs)
           << (i.strict ? " < " : " <= ") << num(i.rhs) << ")";
    return os.str();
}

ParameterReport check_parameters(RelationType t, const GrowthBound& gb, const GridParams& gp, std::size_t n) {
    if (t == RelationType::frr) throw UsageError("no grid construction exists for FRR");
    if (n == 0) throw UsageError("dimension must be positive");
    if (!(gp.eta > 0.0) || !(gp.eps > 0.0)) throw UsageError("eta and eps must be positive");
    const double c = 2.0 / std::sqrt(static_cast<double>(n));

    ParameterReport rep;
    rep.type = t;
    auto add = [&](std::string name, std::string expr, double lhs, double rhs, bool strict) {
        rep.items.push_back({std::move(name), std::move(expr), lhs, rhs, strict, strict ? lhs < rhs : leq(lhs, rhs)});
    };

    add("strictness", "eta <= 2/sqrt(n) * alpha_hi^-1(eps)", gp.eta, c * gb.alpha_hi_inv(gp.eps), false);
    if (t == RelationType::asrbb) {
        add("contraction", "rho < 1", gb.rho, 1.0, true);
        add("asrbb_step", "eta <= 2/sqrt(n) * min(alpha_hi^-1(eps), gamma^-1((1-rho)*eps))", gp.eta,
            c * std::min(gb.alpha_hi_inv(gp.eps), gb.gamma_inv((1.0 - gb.rho) * gp.eps)), false);
    }
    if (t == RelationType::asrb) {
        if (!gp.eta2 || !gp.eps2) throw UsageError("ASRB needs the sub-grid parameters eta2 and eps2");
        if (!(*gp.eta2 > 0.0) || !(*gp.eps2 > 0.0)) throw UsageError("eta2 and eps2 must be positive");
        const double eta2 = *gp.eta2, eps2 = *gp.eps2;
        add("subgrid_strictness", "eta2 <= 2/sqrt(n) * alpha_hi^-1(eps2)", eta2, c * gb.alpha_hi_inv(eps2), false);
        add("subgrid_level", "rho * eps2 < eps", gb.rho * eps2, gp.eps, true);
        add("asrb_step", "eta <= 2/sqrt(n) * min(alpha_hi^-1(eps), gamma^-1(eps - rho*eps2))", gp.eta,
            c * std::min(gb.alpha_hi_inv(gp.eps), gb.gamma_inv(gp.eps - gb.rho * eps2)), false);
    }
    return rep;
}

// Construction -----------------------------------------------------------------

bool GridAbstraction::related(const GrowthBound& gb, const Vec& x1, Index x2) const {
    return gb.V(x1, grid[x2]) <= params.eps;
}

IndexSet subgrid_cover(const GrowthBound& gb, const Grid& subgrid, const Box& bounds, const Vec& x2, double eps) {
    const double r = gb.alpha_lo_inv(eps);
    const Vec half = Vec::Constant(x2.size(), subgrid.eta() / 2);
    IndexSet out;
    for (Index p : subgrid.voronoi_within(x2, r)) {
        const Vec lo = (subgrid[p] - half).cwiseMax(bounds.lo);
        const Vec hi = (subgrid[p] + half).cwiseMin(bounds.hi);
        if ((lo.array() > hi.array() + kSlack).any()) continue;
        if (box_distance(x2, lo, hi) <= r + kSlack) out.push_back(p);
    }
    return out;
}

namespace {

IndexSet mcr_targets(const Grid& grid, const GrowthBound& gb, const SublevelSet& target, double eps) {
    return grid.within(target.center, gb.alpha_lo_inv(eps) + gb.alpha_lo_inv(target.level) + 1e-9);
}

IndexSet asr_targets(const Grid& grid, const GrowthBound& gb, const Box& bounds, const SublevelSet& target,
                     double eps) {
    const double rt = gb.alpha_lo_inv(target.level);
    const double rc = gb.alpha_hi_inv(eps);
    const Vec lo0 = (target.center.array() - rt).matrix().cwiseMax(bounds.lo);
    const Vec hi0 = (target.center.array() + rt).matrix().cwiseMin(bounds.hi);
    if ((lo0.array() > hi0.array()).any()) return {};

    const IndexSet candidates = grid.within(target.center, rt + rc + 1e-9);
    const int max_depth = grid.dim() <= 2 ? 10 : 5;
    const auto n = lo0.size();

    struct Piece {
        Vec lo, hi;
        int depth;
    };
    std::vector<IndexSet> leaves;
    IndexSet forced;
    std::vector<Piece> stack{{lo0, hi0, 0}};
    while (!stack.empty()) {
        Piece p = std::move(stack.back());
        stack.pop_back();
        if (box_distance(target.center, p.lo, p.hi) > rt + kSlack) continue;
        IndexSet covering;
        for (Index c : candidates)
            if (box_far_distance(grid[c], p.lo, p.hi) <= rc) covering.push_back(c);
        if (!covering.empty()) {
            leaves.push_back(std::move(covering));
        } else if (p.depth == max_depth) {
            forced = set_union(forced, grid.voronoi_meeting(p.lo, p.hi));
        } else {
            const Vec mid = (p.lo + p.hi) / 2;
            for (long m = 0; m < (1L << n); ++m) {
                Piece child{p.lo, p.hi, p.depth + 1};
                for (Eigen::Index i = 0; i < n; ++i) {
                    if ((m >> i) & 1) child.lo[i] = mid[i];
                    else child.hi[i] = mid[i];
                }
                stack.push_back(std::move(child));
            }
        }
    }

    // greedy set cover of the leaves, lowest index on ties
    IndexSet chosen = forced;
    std::vector<char> done(leaves.size(), 0);
    for (std::size_t i = 0; i < leaves.size(); ++i) done[i] = intersects(leaves[i], chosen);
    while (true) {
        Index best = kNoIndex;
        std::size_t best_count = 0;
        for (Index c : candidates) {
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < leaves.size(); ++i)
                if (!done[i] && contains(leaves[i], c)) ++cnt;
            if (cnt > best_count) {
                best = c;
                best_count = cnt;
            }
        }
        if (best == kNoIndex) break;
        chosen = set_union(chosen, {best});
        for (std::size_t i = 0; i < leaves.size(); ++i)
            if (!done[i] && contains(leaves[i], best)) done[i] = 1;
    }
    return chosen;
}

Index nearest_cover_point(const Grid& subgrid, const IndexSet& cover, const Vec& x1) {
    Index best = kNoIndex;
    double best_d = 0.0;
    for (Index z : cover) {
        const double d = (subgrid[z] - x1).lpNorm<Eigen::Infinity>();
        if (best == kNoIndex || d < best_d) {
            best = z;
            best_d = d;
        }
    }
    return best;
}

IndexSet pair_targets(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb, Index x2, Index u2) {
    const Vec& c = a.grid[x2];
    const Vec& u = dyn.inputs[u2];
    const double eps = a.params.eps;
    switch (a.type) {
        case RelationType::mcr: return mcr_targets(a.grid, gb, over_approx_target(dyn, gb, c, u, eps), eps);
        case RelationType::asr: return asr_targets(a.grid, gb, dyn.bounds, over_approx_target(dyn, gb, c, u, eps), eps);
        case RelationType::asrbb: {
            const Vec y = dyn.f(c, u);
            if (!dyn.bounds.contains(y, 1e-9)) return {};
            return {a.grid.nearest(y)};
        }
        case RelationType::asrb: {
            IndexSet out;
            for (Index z : a.covers[x2]) {
                const Vec& zp = (*a.subgrid)[z];
                const Vec y = dyn.f(zp, gb.kappa(zp, c, u));
                if (dyn.bounds.contains(y, 1e-9)) out.push_back(a.grid.nearest(y));
            }
            normalize(out);
            return out;
        }
        case RelationType::frr: break;
    }
    throw UsageError("no grid construction exists for FRR");
}

GridAbstraction build(RelationType t, const Dynamics& dyn, const GrowthBound& gb, const GridParams& gp, bool parallel) {
    if (dyn.inputs.empty()) throw UsageError("abstract input set is empty");
    if (dyn.bounds.dim() != dyn.n) throw UsageError("bounds dimension differs from the state dimension");
    auto report = check_parameters(t, gb, gp, dyn.n);
    if (!report.ok()) throw ParameterError(std::move(report));

    GridAbstraction a;
    a.type = t;
    a.grid = build_grid(dyn.bounds, gp.eta);
    a.params = gp;
    a.v_name = gb.name;
    a.rho = gb.rho;
    a.warnings = a.grid.warnings();

    std::vector<std::string> ulabels;
    for (const auto& u : dyn.inputs) ulabels.push_back(point_label(u));
    a.s2 = FiniteSystem(a.grid.labels(), LabelSet(std::move(ulabels)));

    const std::size_t nx = a.grid.size(), nu = dyn.inputs.size();
    const auto nxs = static_cast<std::ptrdiff_t>(nx);
    if (t == RelationType::asrb) {
        a.subgrid = build_grid(dyn.bounds, *gp.eta2);
        a.covers.resize(nx);
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (std::ptrdiff_t x = 0; x < nxs; ++x)
            a.covers[x] = subgrid_cover(gb, *a.subgrid, dyn.bounds, a.grid[static_cast<Index>(x)], gp.eps);
        for (Index x = 0; x < nx; ++x)
            if (a.covers[x].empty()) a.warnings.push_back("empty sub-grid cover at " + point_label(a.grid[x]));
    }

    std::vector<IndexSet> targets(nx * nu);
    const auto pairs = static_cast<std::ptrdiff_t>(nx * nu);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t p = 0; p < pairs; ++p)
        targets[p] = pair_targets(a, dyn, gb, static_cast<Index>(p) / nu, static_cast<Index>(p) % nu);

    for (Index x = 0; x < nx; ++x) {
        for (Index u = 0; u < nu; ++u) {
            auto& tgt = targets[x * nu + u];
            if (tgt.empty()) a.dropped.emplace_back(x, u);
            a.s2.set_post(x, u, std::move(tgt));
        }
    }
    if (!a.dropped.empty())
        a.warnings.push_back(std::to_string(a.dropped.size()) + " transitions dropped: target outside the bounds");
    return a;
}

}  // namespace

GridAbstraction construct_abstraction(RelationType t, const Dynamics& dyn, const GrowthBound& gb,
                                      const GridParams& gp) {
    return build(t, dyn, gb, gp, true);
}

GridAbstraction construct_abstraction_serial(RelationType t, const Dynamics& dyn, const GrowthBound& gb,
                                             const GridParams& gp) {
    return build(t, dyn, gb, gp, false);
}

Vec interface_input(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb, Index x2, Index u2,
                    const Vec& x1) {
    const Vec& c = a.grid[x2];
    const Vec& u = dyn.inputs.at(u2);
    if (a.type != RelationType::asrb) return gb.kappa(x1, c, u);
    const Index z = nearest_cover_point(*a.subgrid, a.covers.at(x2), x1);
    if (z == kNoIndex) throw InvariantViolation("empty sub-grid cover at " + point_label(c));
    const Vec& zp = (*a.subgrid)[z];
    return gb.kappa(x1, zp, gb.kappa(zp, c, u));
}

Index designated_successor(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb, Index x2, Index u2,
                           const Vec& x1) {
    const Vec& c = a.grid[x2];
    const Vec& u = dyn.inputs.at(u2);
    if (a.type == RelationType::asrbb) return a.grid.nearest(dyn.f(c, u));
    if (a.type == RelationType::asrb) {
        const Index z = nearest_cover_point(*a.subgrid, a.covers.at(x2), x1);
        if (z == kNoIndex) return kNoIndex;
        const Vec& zp = (*a.subgrid)[z];
        return a.grid.nearest(dyn.f(zp, gb.kappa(zp, c, u)));
    }
    return kNoIndex;
}

// Continuous closed loop -------------------------------------------------------

ContinuousTrace simulate_closed_loop(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb,
                                     const StaticController& c2, const Vec& x1_0, std::size_t horizon,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](const IndexSet& s) { return s[rng() % s.size()]; };
    const bool safety = std::holds_alternative<SafetySpec>(c2.spec);
    const double eps = a.params.eps;
    const auto& f2 = a.s2;

    ContinuousTrace tr;
    auto fail = [&](const std::string& what, std::size_t k) {
        tr.violations.push_back("step " + std::to_string(k) + ": " + what);
    };

    Vec x1 = x1_0;
    const IndexSet start = set_intersection(quantize(gb, a.grid, eps, x1), c2.domain);
    if (start.empty()) {
        fail("initial state has no related abstract state in the controller domain", 0);
        tr.blocked = true;
        return tr;
    }
    Index x2 = pick(start);

    for (std::size_t k = 0; k < horizon; ++k) {
        if (gb.V(x1, a.grid[x2]) > eps + 1e-9) fail("V(x1, x2) exceeds eps", k);
        if (!contains(c2.domain, x2)) fail("abstract state left the controller domain", k);
        const auto& choices = c2.choices.at(x2);
        if (choices.empty()) {
            tr.steps.push_back({x1, Vec(), x2, x2, kNoIndex});
            tr.blocked = true;
            fail("no admissible abstract input", k);
            break;
        }
        const Index u2 = pick(choices);
        const Vec u1 = interface_input(a, dyn, gb, x2, u2, x1);
        const Vec x1n = dyn.f(x1, u1);
        tr.steps.push_back({x1, u1, x2, x2, u2});

        Index x2n = kNoIndex;
        const auto& post = f2.post(x2, u2);
        switch (a.type) {
            case RelationType::asr: {
                const auto cand = set_intersection(post, quantize(gb, a.grid, eps, x1n));
                if (cand.empty()) fail("memory update has no candidate", k);
                else x2n = pick(cand);
                break;
            }
            case RelationType::mcr: {
                const auto q = quantize(gb, a.grid, eps, x1n);
                if (q.empty()) fail("successor has no related abstract state", k);
                else if (!is_subset(q, post)) fail("successor cells leave F2(x2, u2)", k);
                else x2n = pick(q);
                break;
            }
            case RelationType::asrbb:
            case RelationType::asrb: {
                x2n = designated_successor(a, dyn, gb, x2, u2, x1);
                if (x2n == kNoIndex || !contains(post, x2n)) {
                    fail("designated successor is not in F2(x2, u2)", k);
                    x2n = kNoIndex;
                } else if (gb.V(x1n, a.grid[x2n]) > eps + 1e-9) {
                    fail("successor is not related to the designated cell", k);
                }
                break;
            }
            case RelationType::frr: throw UsageError("no grid construction exists for FRR");
        }
        if (x2n == kNoIndex) {
            tr.blocked = true;
            break;
        }
        if (safety && !contains(c2.domain, x2n)) fail("successor left the controller domain", k);
        if (!tr.violations.empty()) break;
        x1 = x1n;
        x2 = x2n;
    }
    return tr;
}

std::string continuous_traces_to_csv(const std::vector<ContinuousTrace>& traces, const GridAbstraction& a) {
    auto vec = [](const Vec& v) {
        std::string s;
        char buf[32];
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10g", std::abs(v[i]) < 1e-15 ? 0.0 : v[i]);
            s += (i ? " " : "") + std::string(buf);
        }
        return s;
    };
    std::ostringstream os;
    os << "trace,k,x1,u1,z1,x2,u2,blocked_flag\n";
    for (std::size_t id = 0; id < traces.size(); ++id) {
        const auto& t = traces[id];
        for (std::size_t k = 0; k < t.steps.size(); ++k) {
            const auto& s = t.steps[k];
            const bool last = t.blocked && k + 1 == t.steps.size();
            os << id << ',' << k << ',' << vec(s.x1) << ',' << vec(s.u1) << ','
               << (s.z1 == kNoIndex ? "" : a.s2.states()[s.z1]) << ','
               << (s.x2 == kNoIndex ? "" : a.s2.states()[s.x2]) << ','
               << (s.u2 == kNoIndex ? "" : a.s2.inputs()[s.u2]) << ',' << (last ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

}  // namespace simrel
