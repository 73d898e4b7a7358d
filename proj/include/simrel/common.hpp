#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simrel {

using Index = std::size_t;

/// Sorted, duplicate-free list of indices. All set-valued maps in the
/// library return this representation.
using IndexSet = std::vector<Index>;

inline constexpr Index kNoIndex = static_cast<Index>(-1);

void normalize(IndexSet& s);
IndexSet make_set(std::vector<Index> items);
bool contains(const IndexSet& s, Index i);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
bool intersects(const IndexSet& a, const IndexSet& b);
/// True iff `sub` is a subset of `super`.
bool is_subset(const IndexSet& sub, const IndexSet& super);
IndexSet iota_set(std::size_t n);

// Errors -------------------------------------------------------------------

/// Caller violated a documented precondition (index out of range, bad arity).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input files.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed. Indicates a bug, never a user error.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Labels -------------------------------------------------------------------

/// Indexed finite set of string labels. Cross-system identity is by label.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> labels);

    /// The singleton {"0"} used for trivial state/input/internal spaces.
    static LabelSet singleton();
    /// Labels "0", "1", ..., "n-1".
    static LabelSet numbered(std::size_t n);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    const std::string& operator[](Index i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<Index> find(std::string_view label) const;
    /// Throws InputError when the label is unknown.
    Index at(std::string_view label) const;

    bool operator==(const LabelSet& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Index> index_;
};

std::string pair_label(std::string_view a, std::string_view b);
std::string triple_label(std::string_view a, std::string_view b, std::string_view c);

/// Cartesian product with pair-lexicographic indexing: (i, j) -> i * |b| + j.
LabelSet product(const LabelSet& a, const LabelSet& b);
LabelSet product(const LabelSet& a, const LabelSet& b, const LabelSet& c);

inline Index pair_index(Index i, Index j, std::size_t n2) { return i * n2 + j; }
inline Index first_of(Index ij, std::size_t n2) { return ij / n2; }
inline Index second_of(Index ij, std::size_t n2) { return ij % n2; }

/// Maps every index of `from` to the index of the equally-labelled element of
/// `to`, or kNoIndex when the label is absent.
std::vector<Index> match_labels(const LabelSet& from, const LabelSet& to);

}  // namespace simrel
