#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "simrel/relations.hpp"

namespace simrel {

/// Variables an interface map may read.
enum class Var { x1, x1_next, z1, z1_next, u1, u2 };

std::string to_string(Var v);

/// Argument lists of h1 and h2 for one relation type.
struct Signature {
    RelationType type = RelationType::asr;
    std::vector<Var> nu1;
    std::vector<Var> nu2;
};

Signature signature(RelationType t);

/// Set-valued map over a finite product domain. Either an explicit table or
/// a callable; both are evaluated with arguments in signature order.
class SetMap {
public:
    using Fn = std::function<IndexSet(std::span<const Index>)>;

    SetMap() = default;
    static SetMap table(std::vector<std::size_t> dims);
    static SetMap callable(std::vector<std::size_t> dims, Fn fn);

    const std::vector<std::size_t>& dims() const { return dims_; }
    bool is_table() const { return !fn_; }
    std::size_t domain_size() const;

    IndexSet operator()(std::span<const Index> args) const;
    IndexSet operator()(std::initializer_list<Index> args) const {
        return (*this)(std::span<const Index>(args.begin(), args.size()));
    }
    /// Only valid for tables.
    void set(std::span<const Index> args, IndexSet value);
    /// Table entry by flat index (row-major over dims).
    const IndexSet& entry(std::size_t flat) const { return table_.at(flat); }

private:
    std::size_t flat_index(std::span<const Index> args) const;

    std::vector<std::size_t> dims_;
    std::vector<IndexSet> table_;
    Fn fn_;
};

/// (Z1, h1, h2, R~). The lifted relation `rt` relates x1 * |Z1| + z1 to x2.
struct InterfaceSpec {
    RelationType type = RelationType::asr;
    LabelSet z_labels;
    LabelSet u2_labels;
    SetMap h1;
    SetMap h2;
    BinaryRelation rt;

    std::size_t nz() const { return z_labels.size(); }
    Index lifted(Index x1, Index z1) const { return x1 * nz() + z1; }
};

/// Thrown by constructors that require a relation to hold.
class RelationNotSatisfied : public std::runtime_error {
public:
    explicit RelationNotSatisfied(CheckReport report)
        : std::runtime_error(report.message), report_(std::move(report)) {}
    const CheckReport& report() const { return report_; }

private:
    CheckReport report_;
};

/// The specific interface with Z1 = X2, h1 = I_R^T, the per-type h2 and
/// R~ = {((x1, x2), x2)}. Throws RelationNotSatisfied when R is not of type t.
InterfaceSpec canonical_interface(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2,
                                  const BinaryRelation& r);

/// One evaluation of the interface chain.
struct ChainStep {
    Index u1 = 0;
    Index x1_next = 0;
    Index z1_next = 0;
    auto operator<=>(const ChainStep&) const = default;
};

/// All (u1, x1+, z1+) reachable from (x1, z1) under u2, evaluated in the
/// order fixed for the interface type:
///   ASR        u1, x1+, z1+
///   ASRB       u1, z1+, x1+
///   ASRBB      z1+, u1, x1+
///   MCR, FRR   u1, x1+, z1+
std::vector<ChainStep> interface_chain(const InterfaceSpec& iface, const FiniteSystem& s1, Index x1, Index z1,
                                       Index u2);

/// Checks, for every ((x1, z1), x2) in R~ and u2 available at x2, that the
/// chain has at least one outcome and that every outcome (x1+, z1+) has a
/// nonempty R~ image contained in F2(x2, u2).
CheckReport validate_interface(const InterfaceSpec& iface, const FiniteSystem& s1, const FiniteSystem& s2);

/// The augmented system over X1 × Z1 with inputs U2.
FiniteSystem augment(const FiniteSystem& s1, const InterfaceSpec& iface);

/// Every two nonempty images R~(x1, z1), R~(x1', z1) intersect.
bool check_common_quantization(const BinaryRelation& rt, std::size_t nz);

/// {(x1, x2) | ∃ z1: ((x1, z1), x2) ∈ R~}.
BinaryRelation flatten_relation(const BinaryRelation& rt, std::size_t nz);
/// {((x1, x2), x2) | (x1, x2) ∈ R} with Z1 = X2.
BinaryRelation lift_relation(const BinaryRelation& r);

/// Runs `validate_interface` and the FRR check between the augmented system
/// and S2. Throws InvariantViolation when the two disagree.
CheckReport interface_frr_equivalence(const InterfaceSpec& iface, const FiniteSystem& s1, const FiniteSystem& s2);

}  // namespace simrel
