#pragma once

#include <variant>

#include "simrel/system.hpp"

namespace simrel {

struct SafetySpec {
    IndexSet safe;
};

/// Reach `target` within `bound` steps.
struct ReachSpec {
    IndexSet target;
    std::size_t bound = 0;
};

using Specification = std::variant<SafetySpec, ReachSpec>;

std::string describe(const Specification& spec, const LabelSet& states);

/// Set-valued static controller over the abstract states. `inputs[x]` is
/// empty outside the controllable domain.
struct StaticController {
    Specification spec;
    LabelSet states;
    LabelSet inputs;
    IndexSet domain;
    std::vector<IndexSet> choices;
    /// Steps-to-target for reach controllers, 0 on the domain for safety.
    std::vector<std::size_t> value;

    bool feasible() const { return !domain.empty(); }
};

inline constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1);

/// Maximal controlled-invariant subset of `safe` and every input keeping the
/// state in it.
StaticController synthesize_safety(const FiniteSystem& s2, const IndexSet& safe);

/// Worst-case attractor of `target`, truncated at `bound`. Inside the target
/// every available input is allowed; elsewhere the inputs whose worst
/// successor value is strictly smaller.
StaticController synthesize_reach(const FiniteSystem& s2, const IndexSet& target, std::size_t bound);

class InfeasibleController : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Static system ({0}, X2, {0}, U2, F, H) with H(0, x2) = choices(x2) × {0}.
/// Throws InfeasibleController when the domain is empty.
GeneralSystem controller_as_system(const StaticController& sc);

/// Controller that allows every available input everywhere.
StaticController permissive_controller(const FiniteSystem& s2);

}  // namespace simrel
