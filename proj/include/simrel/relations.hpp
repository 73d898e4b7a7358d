#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simrel/system.hpp"

namespace simrel {

enum class RelationType { asr, asrb, asrbb, mcr, frr };

inline constexpr std::array<RelationType, 5> kAllRelationTypes = {
    RelationType::asr, RelationType::asrb, RelationType::asrbb, RelationType::mcr, RelationType::frr};

/// "ASR", "ASRB", ... as used in reports.
std::string to_string(RelationType t);
/// Case-insensitive parse of "asr", "asrb", "asrbb", "mcr", "frr".
RelationType parse_relation_type(std::string_view name);

/// R ⊆ X1 × X2 with forward and inverse images kept in sync.
class BinaryRelation {
public:
    BinaryRelation() = default;
    BinaryRelation(std::size_t n1, std::size_t n2);
    BinaryRelation(std::size_t n1, std::size_t n2, const std::vector<std::pair<Index, Index>>& pairs);

    static BinaryRelation identity(std::size_t n);

    std::size_t n1() const { return forward_.size(); }
    std::size_t n2() const { return inverse_.size(); }

    void add(Index x1, Index x2);
    bool contains(Index x1, Index x2) const;
    const IndexSet& image(Index x1) const;
    const IndexSet& preimage(Index x2) const;
    /// Image of a set.
    IndexSet image(const IndexSet& x1s) const;

    /// Pairs in lexicographic order.
    std::vector<std::pair<Index, Index>> pairs() const;
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    /// R(x1) nonempty for every x1.
    bool is_strict() const;
    /// |R(x1)| <= 1 for every x1.
    bool is_deterministic() const;

    bool operator==(const BinaryRelation& o) const { return forward_ == o.forward_ && inverse_ == o.inverse_; }

private:
    std::vector<IndexSet> forward_;
    std::vector<IndexSet> inverse_;
};

/// Outcome of a relation or interface check. Exactly one of `witness` and
/// `counterexample` is set. Index tuples follow the quantifier order of the
/// checked formula; `message` renders them with labels.
struct CheckReport {
    bool holds = true;
    std::optional<std::vector<Index>> witness;
    std::optional<std::vector<Index>> counterexample;
    std::string message;

    explicit operator bool() const { return holds; }
};

/// Exhaustive evaluation of the defining formula. Counterexamples are the
/// lexicographically first violated (x1, x2, u2), or (x2, u2) for ASRBB.
/// Parallel over the pairs of R.
CheckReport check_relation(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r);
/// Serial reference for `check_relation`.
CheckReport check_relation_serial(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2,
                                  const BinaryRelation& r);

/// Tuples (x2, u2, x1, u1) for ASR, ASRB and MCR, (x2, u2, x1) for FRR and
/// (x2, u2, x1, u1, x2+) for ASRBB.
struct ExtendedRelation {
    RelationType type = RelationType::asr;
    std::set<std::vector<Index>> tuples;
    /// U2 index -> U1 index by label (kNoIndex when absent).
    std::vector<Index> u2_to_u1;
};

ExtendedRelation extended_relation(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2,
                                   const BinaryRelation& r);

/// Re-evaluates the defining formula for a single tuple.
bool tuple_satisfies(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r,
                     std::span<const Index> tuple);

/// Arity of the query accepted by `interface_input_map`.
std::size_t input_map_arity(RelationType t);

/// The u1-slice of the extended relation. Queries are (x2, u2, x1) for ASR,
/// ASRB and MCR, (x2, u2, x1, x2+) for ASRBB and (u2) for FRR.
IndexSet interface_input_map(const ExtendedRelation& ext, std::span<const Index> query);

/// Runs all five checkers and cross-checks their verdicts against the
/// implications between relation types. Throws InvariantViolation when the
/// verdicts are inconsistent.
std::map<RelationType, CheckReport> classify(const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r);

/// True iff every u1 in I^MCR(x2, u2, x1) carries the label of u2.
bool mcr_inputs_coincide(const ExtendedRelation& mcr, const FiniteSystem& s1, const FiniteSystem& s2);

}  // namespace simrel
