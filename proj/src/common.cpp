#include "simrel/common.hpp"

#include <numeric>

namespace simrel {

void normalize(IndexSet& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

IndexSet make_set(std::vector<Index> items) {
    normalize(items);
    return items;
}

bool contains(const IndexSet& s, Index i) {
    return std::binary_search(s.begin(), s.end(), i);
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool intersects(const IndexSet& a, const IndexSet& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j) ++i;
        else ++j;
    }
    return false;
}

bool is_subset(const IndexSet& sub, const IndexSet& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

IndexSet iota_set(std::size_t n) {
    IndexSet s(n);
    std::iota(s.begin(), s.end(), Index{0});
    return s;
}

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    index_.reserve(labels_.size());
    for (Index i = 0; i < labels_.size(); ++i) {
        auto [it, inserted] = index_.emplace(labels_[i], i);
        if (!inserted) throw InputError("duplicate label '" + labels_[i] + "'");
    }
}

LabelSet LabelSet::singleton() { return LabelSet({"0"}); }

LabelSet LabelSet::numbered(std::size_t n) {
    std::vector<std::string> l;
    l.reserve(n);
    for (std::size_t i = 0; i < n; ++i) l.push_back(std::to_string(i));
    return LabelSet(std::move(l));
}

std::optional<Index> LabelSet::find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Index LabelSet::at(std::string_view label) const {
    auto i = find(label);
    if (!i) throw InputError("unknown label '" + std::string(label) + "'");
    return *i;
}

std::string pair_label(std::string_view a, std::string_view b) {
    std::string s;
    s.reserve(a.size() + b.size() + 3);
    s += '(';
    s += a;
    s += ',';
    s += b;
    s += ')';
    return s;
}

std::string triple_label(std::string_view a, std::string_view b, std::string_view c) {
    std::string s = "(";
    s += a;
    s += ',';
    s += b;
    s += ',';
    s += c;
    s += ')';
    return s;
}

LabelSet product(const LabelSet& a, const LabelSet& b) {
    std::vector<std::string> l;
    l.reserve(a.size() * b.size());
    for (const auto& x : a.labels())
        for (const auto& y : b.labels()) l.push_back(pair_label(x, y));
    return LabelSet(std::move(l));
}

LabelSet product(const LabelSet& a, const LabelSet& b, const LabelSet& c) {
    std::vector<std::string> l;
    l.reserve(a.size() * b.size() * c.size());
    for (const auto& x : a.labels())
        for (const auto& y : b.labels())
            for (const auto& z : c.labels()) l.push_back(triple_label(x, y, z));
    return LabelSet(std::move(l));
}

std::vector<Index> match_labels(const LabelSet& from, const LabelSet& to) {
    std::vector<Index> m(from.size(), kNoIndex);
    for (Index i = 0; i < from.size(); ++i) {
        if (auto j = to.find(from[i])) m[i] = *j;
    }
    return m;
}

}  // namespace simrel
