#pragma once

#include <compare>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "simrel/common.hpp"

namespace simrel {

/// Simple system (X, U, F). F(x, u) is a possibly empty set of successor
/// states; an empty set means that u is not available at x.
class FiniteSystem {
public:
    FiniteSystem() = default;
    FiniteSystem(LabelSet states, LabelSet inputs);

    const LabelSet& states() const { return states_; }
    const LabelSet& inputs() const { return inputs_; }
    std::size_t num_states() const { return states_.size(); }
    std::size_t num_inputs() const { return inputs_.size(); }

    const IndexSet& post(Index x, Index u) const;
    void set_post(Index x, Index u, IndexSet successors);
    void add_transition(Index x, Index u, Index successor);

private:
    void check_pair(Index x, Index u) const;

    LabelSet states_;
    LabelSet inputs_;
    std::vector<IndexSet> trans_;
};

/// Inputs u with F(x, u) nonempty.
IndexSet available_inputs(const FiniteSystem& sys, Index x);

/// True iff every F(x, u) is empty or a singleton.
bool is_deterministic(const FiniteSystem& sys);

/// One element of an output map value H(x, u): an (output, internal) pair.
struct OutputChoice {
    Index y = 0;
    Index v = 0;
    auto operator<=>(const OutputChoice&) const = default;
};
using OutputSet = std::vector<OutputChoice>;

/// Full system (X, U, V, Y, F, H) with F: X x V -> 2^X and H: X x U -> 2^(Y x V).
class GeneralSystem {
public:
    GeneralSystem() = default;
    GeneralSystem(LabelSet states, LabelSet inputs, LabelSet internal, LabelSet outputs);

    /// The simple-system embedding V = U, Y = X, H = identity.
    static GeneralSystem from_simple(const FiniteSystem& sys);

    /// Static system ({0}, U, {0}, Y, F, H) with H(0, u) = map(u) x {0}.
    static GeneralSystem static_map(LabelSet inputs, LabelSet outputs,
                                    const std::function<IndexSet(Index)>& map);

    const LabelSet& states() const { return states_; }
    const LabelSet& inputs() const { return inputs_; }
    const LabelSet& internal() const { return internal_; }
    const LabelSet& outputs() const { return outputs_; }

    const IndexSet& next(Index x, Index v) const;
    const OutputSet& output(Index x, Index u) const;

    void set_next(Index x, Index v, IndexSet successors);
    void add_next(Index x, Index v, Index successor);
    void set_output(Index x, Index u, OutputSet choices);
    void add_output(Index x, Index u, Index y, Index v);

    /// |X| = 1, |V| = 1 and F(0, 0) = {0}.
    bool is_static() const;
    /// |U| = 1.
    bool is_autonomous() const;
    /// V = U and Y = X label-wise and H(x, u) = {(x, u)} everywhere.
    bool is_simple() const;

private:
    LabelSet states_, inputs_, internal_, outputs_;
    std::vector<IndexSet> next_;
    std::vector<OutputSet> output_;
};

/// Recovers the (X, U, F) view of a general system that is simple.
FiniteSystem to_finite(const GeneralSystem& sys);

// Composition ----------------------------------------------------------------

/// Thrown when a composition precondition fails.
class CompositionError : public std::runtime_error {
public:
    CompositionError(std::string clause, const std::string& detail)
        : std::runtime_error(clause + ": " + detail), clause_(std::move(clause)) {}
    const std::string& clause() const { return clause_; }

private:
    std::string clause_;
};

/// second ∘ first. Requires every output label of `first` to be an input
/// label of `second`. States and internal variables are pair-lexicographic.
GeneralSystem serial_compose(const GeneralSystem& first, const GeneralSystem& second);

struct ComposabilityReport {
    bool ok = true;
    /// "outputs", "condition (i)" or "condition (ii)"; empty when ok.
    std::string clause;
    std::string detail;
    explicit operator bool() const { return ok; }
};

/// Checks that `controller` is feedback composable with `plant`.
ComposabilityReport feedback_composable(const GeneralSystem& controller, const GeneralSystem& plant);

/// controller × plant. Throws CompositionError if not feedback composable.
GeneralSystem feedback_compose(const GeneralSystem& controller, const GeneralSystem& plant);

/// The product of the feedback composition without the composability
/// precondition. Used to observe what an ill-formed loop would do.
GeneralSystem feedback_product(const GeneralSystem& controller, const GeneralSystem& plant);

// Behaviors ------------------------------------------------------------------

enum class TraceEnd { truncated, blocked };

struct OutputTrace {
    std::vector<Index> outputs;
    TraceEnd end = TraceEnd::truncated;
    auto operator<=>(const OutputTrace&) const = default;
};

/// Bounded-horizon behavior. `traces` holds every maximal trace shorter than
/// or equal to the horizon (blocked) and every trace cut at the horizon
/// (truncated). `dead_ends` collects nonempty output prefixes after which no
/// output was possible for any input; they are not trajectories and are kept
/// apart for diagnostics.
struct BehaviorSet {
    std::size_t horizon = 0;
    std::set<OutputTrace> traces;
    std::set<std::vector<Index>> dead_ends;

    bool operator==(const BehaviorSet&) const = default;
};

/// Exhaustive enumeration from the initial set `x0`, parallel over `x0`.
BehaviorSet behavior(const GeneralSystem& sys, const IndexSet& x0, std::size_t horizon);
/// Serial reference for `behavior`.
BehaviorSet behavior_serial(const GeneralSystem& sys, const IndexSet& x0, std::size_t horizon);
/// Behavior from every state.
BehaviorSet behavior(const GeneralSystem& sys, std::size_t horizon);

/// Applies `component` to every output (the projection π onto one factor).
BehaviorSet project(const BehaviorSet& b, const std::function<Index(Index)>& component);

/// Projection of a feedback composition's behavior onto the plant outputs.
BehaviorSet project_plant(const BehaviorSet& b, std::size_t plant_outputs);
/// Projection onto the controller outputs.
BehaviorSet project_controller(const BehaviorSet& b, std::size_t plant_outputs);

}  // namespace simrel
