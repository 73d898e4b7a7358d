#include "simrel/relations.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

namespace simrel {

std::string to_string(RelationType t) {
    switch (t) {
        case RelationType::asr: return "ASR";
        case RelationType::asrb: return "ASRB";
        case RelationType::asrbb: return "ASRBB";
        case RelationType::mcr: return "MCR";
        case RelationType::frr: return "FRR";
    }
    return "?";
}

RelationType parse_relation_type(std::string_view name) {
    std::string s(name);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "asr") return RelationType::asr;
    if (s == "asrb") return RelationType::asrb;
    if (s == "asrbb") return RelationType::asrbb;
    if (s == "mcr") return RelationType::mcr;
    if (s == "frr") return RelationType::frr;
    throw InputError("unknown relation type '" + std::string(name) + "'");
}

// BinaryRelation -------------------------------------------------------------

BinaryRelation::BinaryRelation(std::size_t n1, std::size_t n2) : forward_(n1), inverse_(n2) {}

BinaryRelation::BinaryRelation(std::size_t n1, std::size_t n2, const std::vector<std::pair<Index, Index>>& pairs)
    : BinaryRelation(n1, n2) {
    for (auto [a, b] : pairs) add(a, b);
}

BinaryRelation BinaryRelation::identity(std::size_t n) {
    BinaryRelation r(n, n);
    for (Index i = 0; i < n; ++i) r.add(i, i);
    return r;
}

void BinaryRelation::add(Index x1, Index x2) {
    if (x1 >= n1() || x2 >= n2()) throw UsageError("relation pair out of range");
    auto ins = [](IndexSet& s, Index v) {
        auto it = std::lower_bound(s.begin(), s.end(), v);
        if (it == s.end() || *it != v) s.insert(it, v);
    };
    ins(forward_[x1], x2);
    ins(inverse_[x2], x1);
}

bool BinaryRelation::contains(Index x1, Index x2) const {
    return x1 < n1() && simrel::contains(forward_[x1], x2);
}

const IndexSet& BinaryRelation::image(Index x1) const {
    if (x1 >= n1()) throw UsageError("relation argument out of range");
    return forward_[x1];
}

const IndexSet& BinaryRelation::preimage(Index x2) const {
    if (x2 >= n2()) throw UsageError("relation argument out of range");
    return inverse_[x2];
}

IndexSet BinaryRelation::image(const IndexSet& x1s) const {
    IndexSet out;
    for (Index x : x1s) out = set_union(out, image(x));
    return out;
}

std::vector<std::pair<Index, Index>> BinaryRelation::pairs() const {
    std::vector<std::pair<Index, Index>> out;
    for (Index a = 0; a < n1(); ++a)
        for (Index b : forward_[a]) out.emplace_back(a, b);
    return out;
}

std::size_t BinaryRelation::size() const {
    std::size_t n = 0;
    for (const auto& s : forward_) n += s.size();
    return n;
}

bool BinaryRelation::is_strict() const {
    return std::all_of(forward_.begin(), forward_.end(), [](const IndexSet& s) { return !s.empty(); });
}

bool BinaryRelation::is_deterministic() const {
    return std::all_of(forward_.begin(), forward_.end(), [](const IndexSet& s) { return s.size() <= 1; });
}

// Checkers -------------------------------------------------------------------

namespace {

class Evaluator {
public:
    Evaluator(const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r)
        : s1_(s1), s2_(s2), r_(r), u2_to_u1_(match_labels(s2.inputs(), s1.inputs())) {
        if (r.n1() != s1.num_states() || r.n2() != s2.num_states())
            throw UsageError("relation dimensions do not match the systems");
        avail1_.reserve(s1.num_states());
        for (Index x = 0; x < s1.num_states(); ++x) avail1_.push_back(available_inputs(s1, x));
        avail2_.reserve(s2.num_states());
        for (Index x = 0; x < s2.num_states(); ++x) avail2_.push_back(available_inputs(s2, x));
    }

    const IndexSet& avail1(Index x1) const { return avail1_[x1]; }
    const IndexSet& avail2(Index x2) const { return avail2_[x2]; }
    const std::vector<Index>& u2_to_u1() const { return u2_to_u1_; }

    bool asr_ok(Index x2, Index u2, Index x1, Index u1) const {
        const auto& f2 = s2_.post(x2, u2);
        for (Index xp : s1_.post(x1, u1))
            if (!intersects(r_.image(xp), f2)) return false;
        return true;
    }

    bool asrb_ok(Index x1, Index u1, Index x2p) const {
        for (Index xp : s1_.post(x1, u1))
            if (!r_.contains(xp, x2p)) return false;
        return true;
    }

    bool mcr_ok(Index x2, Index u2, Index x1, Index u1) const {
        const auto& f2 = s2_.post(x2, u2);
        for (Index xp : s1_.post(x1, u1)) {
            const auto& img = r_.image(xp);
            if (img.empty() || !is_subset(img, f2)) return false;
        }
        return true;
    }

    bool frr_ok(Index x2, Index u2, Index x1) const {
        const Index u1 = u2_to_u1_[u2];
        if (u1 == kNoIndex || s1_.post(x1, u1).empty()) return false;
        return mcr_ok(x2, u2, x1, u1);
    }

    /// Whether x2+ serves every x1 in R^-1(x2) for ASRBB.
    bool asrbb_universal(Index x2, Index x2p) const {
        for (Index x1 : r_.preimage(x2)) {
            bool found = false;
            for (Index u1 : avail1_[x1]) {
                if (asrb_ok(x1, u1, x2p)) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    }

    std::optional<Index> asrbb_successor(Index x2, Index u2) const {
        for (Index x2p : s2_.post(x2, u2))
            if (asrbb_universal(x2, x2p)) return x2p;
        return std::nullopt;
    }

    /// Witness tuple for one (x1, x2, u2) instance, empty when violated.
    std::vector<Index> instance(RelationType t, Index x1, Index x2, Index u2) const {
        switch (t) {
            case RelationType::asr:
                for (Index u1 : avail1_[x1])
                    if (asr_ok(x2, u2, x1, u1)) return {x1, x2, u2, u1};
                return {};
            case RelationType::asrb:
                for (Index u1 : avail1_[x1])
                    for (Index x2p : s2_.post(x2, u2))
                        if (asrb_ok(x1, u1, x2p)) return {x1, x2, u2, u1, x2p};
                return {};
            case RelationType::mcr:
                for (Index u1 : avail1_[x1])
                    if (mcr_ok(x2, u2, x1, u1)) return {x1, x2, u2, u1};
                return {};
            case RelationType::frr:
                if (frr_ok(x2, u2, x1)) return {x1, x2, u2};
                return {};
            case RelationType::asrbb:
                break;
        }
        throw UsageError("instance() does not apply to ASRBB");
    }

    struct Outcome {
        std::vector<Index> witness;
        std::vector<Index> counterexample;
    };

    /// First violated instance (or first witness) for the pair (x1, x2).
    Outcome pair_outcome(RelationType t, Index x1, Index x2) const {
        Outcome o;
        for (Index u2 : avail2_[x2]) {
            auto w = instance(t, x1, x2, u2);
            if (w.empty()) {
                o.counterexample = {x1, x2, u2};
                return o;
            }
            if (o.witness.empty()) o.witness = std::move(w);
        }
        return o;
    }

    Outcome abstract_outcome(Index x2) const {
        Outcome o;
        for (Index u2 : avail2_[x2]) {
            auto x2p = asrbb_successor(x2, u2);
            if (!x2p) {
                o.counterexample = {x2, u2};
                return o;
            }
            if (o.witness.empty()) o.witness = {x2, u2, *x2p};
        }
        return o;
    }

    std::string describe(RelationType t, const std::vector<Index>& cex) const {
        std::ostringstream os;
        if (t == RelationType::asrbb) {
            os << "x2=" << s2_.states()[cex[0]] << ", u2=" << s2_.inputs()[cex[1]];
        } else {
            os << "x1=" << s1_.states()[cex[0]] << ", x2=" << s2_.states()[cex[1]]
               << ", u2=" << s2_.inputs()[cex[2]];
        }
        return os.str();
    }

private:
    const FiniteSystem& s1_;
    const FiniteSystem& s2_;
    const BinaryRelation& r_;
    std::vector<Index> u2_to_u1_;
    std::vector<IndexSet> avail1_;
    std::vector<IndexSet> avail2_;
};

CheckReport assemble(RelationType t, const Evaluator& ev, const std::vector<Evaluator::Outcome>& outcomes) {
    CheckReport rep;
    for (const auto& o : outcomes) {
        if (!o.counterexample.empty()) {
            rep.holds = false;
            rep.counterexample = o.counterexample;
            rep.message = to_string(t) + " violated at " + ev.describe(t, o.counterexample);
            return rep;
        }
        if (!rep.witness && !o.witness.empty()) rep.witness = o.witness;
    }
    if (!rep.witness) {
        rep.witness = std::vector<Index>{};
        rep.message = to_string(t) + " holds vacuously";
    } else {
        rep.message = to_string(t) + " holds";
    }
    return rep;
}

}  // namespace

CheckReport check_relation(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r) {
    Evaluator ev(s1, s2, r);
    std::vector<Evaluator::Outcome> outcomes;
    const auto pairs = t == RelationType::asrbb ? std::vector<std::pair<Index, Index>>{} : r.pairs();
    outcomes.resize(t == RelationType::asrbb ? s2.num_states() : pairs.size());
    const auto n = static_cast<std::ptrdiff_t>(outcomes.size());
    // lowest index with a counterexample so far; later items are skipped
    std::atomic<std::ptrdiff_t> first_bad{n};
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (i > first_bad.load(std::memory_order_relaxed)) continue;
        auto o = t == RelationType::asrbb ? ev.abstract_outcome(static_cast<Index>(i))
                                          : ev.pair_outcome(t, pairs[i].first, pairs[i].second);
        if (!o.counterexample.empty()) {
            auto cur = first_bad.load();
            while (i < cur && !first_bad.compare_exchange_weak(cur, i)) {
            }
        }
        outcomes[i] = std::move(o);
    }
    return assemble(t, ev, outcomes);
}

CheckReport check_relation_serial(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2,
                                  const BinaryRelation& r) {
    Evaluator ev(s1, s2, r);
    std::vector<Evaluator::Outcome> outcomes;
    if (t == RelationType::asrbb) {
        for (Index x2 = 0; x2 < s2.num_states(); ++x2) {
            outcomes.push_back(ev.abstract_outcome(x2));
            if (!outcomes.back().counterexample.empty()) break;
        }
    } else {
        for (auto [x1, x2] : r.pairs()) {
            outcomes.push_back(ev.pair_outcome(t, x1, x2));
            if (!outcomes.back().counterexample.empty()) break;
        }
    }
    return assemble(t, ev, outcomes);
}

// Extended relations ---------------------------------------------------------

ExtendedRelation extended_relation(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2,
                                   const BinaryRelation& r) {
    Evaluator ev(s1, s2, r);
    ExtendedRelation ext;
    ext.type = t;
    ext.u2_to_u1 = ev.u2_to_u1();

    if (t == RelationType::asrbb) {
        for (Index x2 = 0; x2 < s2.num_states(); ++x2) {
            for (Index u2 : ev.avail2(x2)) {
                for (Index x2p : s2.post(x2, u2)) {
                    if (!ev.asrbb_universal(x2, x2p)) continue;
                    for (Index x1 : r.preimage(x2))
                        for (Index u1 : ev.avail1(x1))
                            if (ev.asrb_ok(x1, u1, x2p)) ext.tuples.insert({x2, u2, x1, u1, x2p});
                }
            }
        }
        return ext;
    }

    for (auto [x1, x2] : r.pairs()) {
        for (Index u2 : ev.avail2(x2)) {
            if (t == RelationType::frr) {
                if (ev.frr_ok(x2, u2, x1)) ext.tuples.insert({x2, u2, x1});
                continue;
            }
            for (Index u1 : ev.avail1(x1)) {
                bool ok = false;
                if (t == RelationType::asr) {
                    ok = ev.asr_ok(x2, u2, x1, u1);
                } else if (t == RelationType::mcr) {
                    ok = ev.mcr_ok(x2, u2, x1, u1);
                } else {
                    for (Index x2p : s2.post(x2, u2)) {
                        if (ev.asrb_ok(x1, u1, x2p)) {
                            ok = true;
                            break;
                        }
                    }
                }
                if (ok) ext.tuples.insert({x2, u2, x1, u1});
            }
        }
    }
    return ext;
}

bool tuple_satisfies(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2, const BinaryRelation& r,
                     std::span<const Index> tp) {
    const std::size_t arity = t == RelationType::frr ? 3 : (t == RelationType::asrbb ? 5 : 4);
    if (tp.size() != arity) throw UsageError("tuple arity does not match " + to_string(t));
    Evaluator ev(s1, s2, r);
    const Index x2 = tp[0], u2 = tp[1], x1 = tp[2];
    if (x2 >= s2.num_states() || u2 >= s2.num_inputs() || x1 >= s1.num_states())
        throw UsageError("tuple index out of range");
    if (!r.contains(x1, x2) || !contains(ev.avail2(x2), u2)) return false;
    if (t == RelationType::frr) return ev.frr_ok(x2, u2, x1);

    const Index u1 = tp[3];
    if (u1 >= s1.num_inputs()) throw UsageError("tuple index out of range");
    if (!contains(ev.avail1(x1), u1)) return false;
    switch (t) {
        case RelationType::asr: return ev.asr_ok(x2, u2, x1, u1);
        case RelationType::mcr: return ev.mcr_ok(x2, u2, x1, u1);
        case RelationType::asrb:
            for (Index x2p : s2.post(x2, u2))
                if (ev.asrb_ok(x1, u1, x2p)) return true;
            return false;
        case RelationType::asrbb: {
            const Index x2p = tp[4];
            return contains(s2.post(x2, u2), x2p) && ev.asrbb_universal(x2, x2p) && ev.asrb_ok(x1, u1, x2p);
        }
        case RelationType::frr: break;
    }
    return false;
}

std::size_t input_map_arity(RelationType t) {
    switch (t) {
        case RelationType::frr: return 1;
        case RelationType::asrbb: return 4;
        default: return 3;
    }
}

IndexSet interface_input_map(const ExtendedRelation& ext, std::span<const Index> q) {
    if (q.size() != input_map_arity(ext.type))
        throw UsageError(to_string(ext.type) + " input map expects " + std::to_string(input_map_arity(ext.type)) +
                         " arguments, got " + std::to_string(q.size()));
    if (ext.type == RelationType::frr) {
        if (q[0] >= ext.u2_to_u1.size()) throw UsageError("abstract input out of range");
        const Index u1 = ext.u2_to_u1[q[0]];
        return u1 == kNoIndex ? IndexSet{} : IndexSet{u1};
    }
    IndexSet out;
    const std::vector<Index> prefix(q.begin(), q.begin() + 3);
    for (auto it = ext.tuples.lower_bound(prefix); it != ext.tuples.end(); ++it) {
        const auto& tp = *it;
        if (!std::equal(prefix.begin(), prefix.end(), tp.begin())) break;
        if (ext.type == RelationType::asrbb && tp[4] != q[3]) continue;
        out.push_back(tp[3]);
    }
    normalize(out);
    return out;
}

bool mcr_inputs_coincide(const ExtendedRelation& mcr, const FiniteSystem& s1, const FiniteSystem& s2) {
    if (mcr.type != RelationType::mcr) throw UsageError("expected an MCR extended relation");
    for (const auto& tp : mcr.tuples)
        if (s1.inputs()[tp[3]] != s2.inputs()[tp[1]]) return false;
    return true;
}

std::map<RelationType, CheckReport> classify(const FiniteSystem& s1, const FiniteSystem& s2,
                                             const BinaryRelation& r) {
    std::map<RelationType, CheckReport> out;
    for (auto t : kAllRelationTypes) out.emplace(t, check_relation(t, s1, s2, r));

    auto h = [&](RelationType t) { return out.at(t).holds; };
    auto bug = [](const std::string& what) { throw InvariantViolation("relation checkers disagree: " + what); };
    using RT = RelationType;

    if (h(RT::asrbb) && !h(RT::asrb)) bug("ASRBB holds but ASRB fails");
    if (h(RT::asrb) && !h(RT::asr)) bug("ASRB holds but ASR fails");
    if (h(RT::frr) && !h(RT::mcr)) bug("FRR holds but MCR fails");
    if (h(RT::mcr) && !h(RT::asr)) bug("MCR holds but ASR fails");
    if (is_deterministic(s2) && h(RT::asr) != h(RT::asrbb)) bug("deterministic abstraction but ASR != ASRBB");
    if (r.is_deterministic() && h(RT::asr) != h(RT::mcr)) bug("deterministic relation but ASR != MCR");
    if (mcr_inputs_coincide(extended_relation(RT::mcr, s1, s2, r), s1, s2) && h(RT::mcr) != h(RT::frr))
        bug("MCR inputs coincide with abstract inputs but MCR != FRR");
    return out;
}

}  // namespace simrel
