#pragma once

#include "simrel/interface.hpp"
#include "simrel/synthesis.hpp"

namespace simrel {

/// The static system of a relation: H(0, x1) = R(x1) × {0}.
GeneralSystem quantizer(const BinaryRelation& r, const LabelSet& x1_labels, const LabelSet& x2_labels);

/// C̃1 = C2 ∘ R~ written out directly: states and internal variables of C2,
/// inputs X1 × Z1 and H(xc, (x1, z1)) = H_C2(xc, R~(x1, z1)).
GeneralSystem tilde_controller(const GeneralSystem& c2, const InterfaceSpec& iface, const FiniteSystem& s1,
                               const FiniteSystem& s2);

struct ConcretizedController {
    RelationType type = RelationType::asr;
    /// C1 with inputs X1 and outputs U1.
    GeneralSystem system;
    InterfaceSpec interface;
    GeneralSystem c2;
    LabelSet x2_labels;
    /// X2 index -> input index of C2, and output index of C2 -> U2 index.
    std::vector<Index> x2_to_c2_input;
    std::vector<Index> c2_output_to_u2;
};

/// C1^T for the interface type. State spaces: X_C2 × Z1 × U2 (ASR),
/// X_C2 × Z1 (ASRB, ASRBB), X_C2 (MCR, FRR). Throws CompositionError when C2
/// is not feedback composable with S2.
ConcretizedController concretize(const InterfaceSpec& iface, const GeneralSystem& c2, const FiniteSystem& s1,
                                 const FiniteSystem& s2);

/// One step of the interface closed loop. Fields after the state are
/// kNoIndex on a final step where no abstract input was admissible.
struct ClosedLoopStep {
    Index x1 = kNoIndex;
    Index z1 = kNoIndex;
    Index x2 = kNoIndex;
    Index xc = kNoIndex;
    Index u2 = kNoIndex;
    Index vc = kNoIndex;
    Index u1 = kNoIndex;
    auto operator<=>(const ClosedLoopStep&) const = default;
};

struct ClosedLoopTrace {
    std::vector<ClosedLoopStep> steps;
    TraceEnd end = TraceEnd::truncated;
    auto operator<=>(const ClosedLoopTrace&) const = default;
};

/// Exhaustive enumeration of the interface closed loop from every x1 in
/// `x1_0`, every memory z1 and every controller state, with the equations
/// evaluated in the order of the interface type.
std::set<ClosedLoopTrace> closed_loop_run(const ConcretizedController& c1, const FiniteSystem& s1,
                                          const IndexSet& x1_0, std::size_t horizon);

/// B(C1 × S1) ⊆ R^{-1}(B(C2 × S2)) on every horizon up to `horizon`. Each
/// concrete x1 trace needs an abstract x2 trace of the same length and end
/// status with x2(k) ∈ R(x1(k)). Concrete dead ends need a related abstract
/// dead end.
CheckReport verify_reproducibility(const ConcretizedController& c1, const FiniteSystem& s1, const GeneralSystem& c2,
                                   const FiniteSystem& s2, const BinaryRelation& r, std::size_t horizon);

/// Inclusion test shared by `verify_reproducibility` and the tests: every
/// trace of `concrete` has a pointwise related trace in `abstract`.
CheckReport related_inclusion(const BehaviorSet& concrete, const BehaviorSet& abstract,
                              const std::function<const IndexSet&(Index)>& related);

/// CSV with columns k,x1,u1,z1,x2,u2,blocked_flag (one row per step, traces
/// separated by a `trace` column first).
std::string traces_to_csv(const std::set<ClosedLoopTrace>& traces, const ConcretizedController& c1,
                          const FiniteSystem& s1);

}  // namespace simrel
