#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "simrel/relations.hpp"
#include "simrel/synthesis.hpp"

namespace simrel {

using Vec = Eigen::VectorXd;

struct Box {
    Vec lo;
    Vec hi;

    std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
    bool contains(const Vec& x, double tol = 0.0) const;
    static Box cube(std::size_t n, double lo, double hi);
};

/// x+ = f(x, u) on a box, with the finite abstract input set U2.
struct Dynamics {
    std::size_t n = 1;
    std::size_t nu = 1;
    std::function<Vec(const Vec&, const Vec&)> f;
    Box bounds;
    std::vector<Vec> inputs;
};

using Scalar = std::function<double(double)>;

/// V with its feedback κ, contraction factor ρ and comparison functions.
struct GrowthBound {
    std::string name;
    std::function<double(const Vec&, const Vec&)> V;
    /// κ(y, x, u): input applied at y to track the move of x under u.
    std::function<Vec(const Vec&, const Vec&, const Vec&)> kappa;
    double rho = 1.0;
    Scalar alpha_lo, alpha_hi, gamma;
    Scalar alpha_lo_inv, alpha_hi_inv, gamma_inv;
};

struct AffineTestbed {
    Eigen::MatrixXd A;
    Eigen::MatrixXd K;
    Dynamics dyn;
    GrowthBound gb;
};

/// f(x, u) = A x + u, κ(y, x, u) = u + K (y - x), V = Euclidean distance and
/// ρ = ‖A + K‖2. With `inputs` empty, U2 = {0, 0.1}^n.
AffineTestbed make_affine_testbed(std::size_t n, double a = 0.9, double k = -0.4, std::optional<Box> box = {},
                                  std::vector<Vec> inputs = {});

struct GridParams {
    double eta = 0.0;
    double eps = 0.0;
    std::optional<double> eta2;
    std::optional<double> eps2;
};

/// Points of [η Z^n] inside a box, lexicographic with the first coordinate
/// most significant.
class Grid {
public:
    Grid() = default;
    Grid(const Box& bounds, double eta);

    double eta() const { return eta_; }
    std::size_t dim() const { return static_cast<std::size_t>(first_.size()); }
    std::size_t size() const { return points_.size(); }
    const Vec& operator[](Index i) const { return points_.at(i); }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Grid index of the lattice point k·η, or kNoIndex outside the grid.
    Index index_of(const std::vector<long>& k) const;
    std::vector<long> lattice_coords(Index i) const;

    /// argmin ‖x - x2‖∞ over the grid, lexicographic tie-break. kNoIndex on
    /// an empty grid.
    Index nearest(const Vec& x) const;
    /// Grid points within Euclidean distance `radius` of x.
    IndexSet within(const Vec& x, double radius) const;
    /// Grid points whose ∞-norm Voronoi box (half-width η/2) lies within
    /// Euclidean distance `radius` of x.
    IndexSet voronoi_within(const Vec& x, double radius) const;
    /// Grid points whose Voronoi box intersects the box [lo, hi].
    IndexSet voronoi_meeting(const Vec& lo, const Vec& hi) const;

    LabelSet labels() const;

private:
    template <class Fn>
    void for_range(const std::vector<long>& lo, const std::vector<long>& hi, Fn&& fn) const;

    double eta_ = 0.0;
    std::vector<long> first_;
    std::vector<long> count_;
    std::vector<Vec> points_;
    std::vector<std::string> warnings_;
};

/// Throws UsageError for η <= 0.
Grid build_grid(const Box& bounds, double eta);

/// Nearest point of the unrestricted lattice [η Z^n] in the ∞-norm.
Vec nearest_lattice_point(const Vec& x, double eta);

/// {x2 : V(x, x2) <= ε}.
IndexSet quantize(const GrowthBound& gb, const Grid& grid, double eps, const Vec& x);

/// Label of a point: "0.5" in one dimension, "(0.1,0.2)" otherwise.
std::string point_label(const Vec& x);

struct SublevelSet {
    Vec center;
    double level = 0.0;
};

/// The target S(f(x2, u2), ρε) containing the image of S(x2, ε).
SublevelSet over_approx_target(const Dynamics& dyn, const GrowthBound& gb, const Vec& x2, const Vec& u2, double eps);

struct Inequality {
    std::string name;
    std::string expression;
    double lhs = 0.0;
    double rhs = 0.0;
    bool strict = false;
    bool holds = false;
};

struct ParameterReport {
    RelationType type = RelationType::asr;
    std::vector<Inequality> items;

    bool ok() const;
    /// First failing inequality, or nullptr.
    const Inequality* first_failure() const;
    std::string describe() const;
};

/// Evaluates the step and level conditions of the grid construction for
/// type t. Non-strict comparisons allow a relative slack of 1e-12.
/// FRR has no construction and throws UsageError.
ParameterReport check_parameters(RelationType t, const GrowthBound& gb, const GridParams& gp, std::size_t n);

class ParameterError : public std::runtime_error {
public:
    explicit ParameterError(ParameterReport report)
        : std::runtime_error(report.describe()), report_(std::move(report)) {}
    const ParameterReport& report() const { return report_; }

private:
    ParameterReport report_;
};

struct GridAbstraction {
    RelationType type = RelationType::asr;
    Grid grid;
    FiniteSystem s2;
    GridParams params;
    std::string v_name;
    double rho = 0.0;
    /// ASRB only: the sub-grid and, per abstract state, the cover Z(x2) as
    /// indices into it.
    std::optional<Grid> subgrid;
    std::vector<IndexSet> covers;
    /// Pairs (x2, u2) whose target set did not meet any cell.
    std::vector<std::pair<Index, Index>> dropped;
    std::vector<std::string> warnings;

    /// (x1, x2) ∈ R.
    bool related(const GrowthBound& gb, const Vec& x1, Index x2) const;
};

/// Abstract system for type t ∈ {ASR, MCR, ASRBB, ASRB}, parallel over the
/// (x2, u2) pairs. Throws ParameterError when check_parameters fails.
GridAbstraction construct_abstraction(RelationType t, const Dynamics& dyn, const GrowthBound& gb,
                                      const GridParams& gp);
/// Serial reference for `construct_abstraction`.
GridAbstraction construct_abstraction_serial(RelationType t, const Dynamics& dyn, const GrowthBound& gb,
                                             const GridParams& gp);

/// Sub-grid points whose Voronoi box meets S(x2, ε) ∩ bounds.
IndexSet subgrid_cover(const GrowthBound& gb, const Grid& subgrid, const Box& bounds, const Vec& x2, double eps);

/// The closed-form h1: κ(x1, x2, u2) for ASR, MCR and ASRBB, and
/// κ(x1, z, κ(z, x2, u2)) with z the nearest cover point for ASRB.
Vec interface_input(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb, Index x2, Index u2,
                    const Vec& x1);

/// Designated successor cell for ASRBB (nearest cell of f(x2, u2)) and
/// ASRB (nearest cell of f(z, κ(z, x2, u2))). kNoIndex for other types.
Index designated_successor(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb, Index x2,
                           Index u2, const Vec& x1);

// Continuous closed loop -------------------------------------------------------

struct ContinuousStep {
    Vec x1;
    Vec u1;
    Index z1 = kNoIndex;
    Index x2 = kNoIndex;
    Index u2 = kNoIndex;
};

struct ContinuousTrace {
    std::vector<ContinuousStep> steps;
    bool blocked = false;
    /// Empty when every per-step check passed.
    std::vector<std::string> violations;
};

/// Runs the interface closed loop with the real dynamics from x1_0 for
/// `horizon` steps. Nondeterministic choices of u2 and memory are drawn from
/// `seed`. Every step checks V(x1, x2) <= ε, x2+ ∈ F2(x2, u2), u2 ∈ C2(x2)
/// and that x2 stays in the controller domain.
ContinuousTrace simulate_closed_loop(const GridAbstraction& a, const Dynamics& dyn, const GrowthBound& gb,
                                     const StaticController& c2, const Vec& x1_0, std::size_t horizon,
                                     std::uint64_t seed);

std::string continuous_traces_to_csv(const std::vector<ContinuousTrace>& traces, const GridAbstraction& a);

}  // namespace simrel
