#include "simrel/concretize.hpp"

#include <map>
#include <sstream>

namespace simrel {

GeneralSystem quantizer(const BinaryRelation& r, const LabelSet& x1_labels, const LabelSet& x2_labels) {
    if (r.n1() != x1_labels.size() || r.n2() != x2_labels.size())
        throw UsageError("relation dimensions do not match the label sets");
    return GeneralSystem::static_map(x1_labels, x2_labels, [&](Index x1) { return r.image(x1); });
}

namespace {

/// H_C̃1 evaluated on demand, with C2's indices translated to X2 and U2.
class TildeOutputs {
public:
    TildeOutputs(const GeneralSystem& c2, const InterfaceSpec& iface, std::vector<Index> x2_to_in,
                 std::vector<Index> out_to_u2)
        : c2_(c2), iface_(iface), x2_to_in_(std::move(x2_to_in)), out_to_u2_(std::move(out_to_u2)) {}

    /// (u2, vc) pairs of C2 at xc over every x2 in R~(x1, z1).
    OutputSet operator()(Index xc, Index x1, Index z1) const {
        OutputSet out;
        for (Index x2 : iface_.rt.image(iface_.lifted(x1, z1))) append(out, xc, x2);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// (u2, vc) pairs of C2 at (xc, x2).
    OutputSet at(Index xc, Index x2) const {
        OutputSet out;
        append(out, xc, x2);
        return out;
    }

private:
    void append(OutputSet& out, Index xc, Index x2) const {
        const Index in = x2_to_in_.at(x2);
        if (in == kNoIndex) return;
        for (const auto& c : c2_.output(xc, in)) out.push_back({out_to_u2_[c.y], c.v});
    }

    const GeneralSystem& c2_;
    const InterfaceSpec& iface_;
    std::vector<Index> x2_to_in_;
    std::vector<Index> out_to_u2_;
};

std::vector<Index> outputs_to_u2(const GeneralSystem& c2, const InterfaceSpec& iface) {
    auto m = match_labels(c2.outputs(), iface.u2_labels);
    for (Index y = 0; y < m.size(); ++y)
        if (m[y] == kNoIndex)
            throw CompositionError("outputs", "controller output '" + c2.outputs()[y] + "' is not an abstract input");
    return m;
}

void check_composable(const GeneralSystem& c2, const FiniteSystem& s2) {
    const auto rep = feedback_composable(c2, GeneralSystem::from_simple(s2));
    if (!rep) throw CompositionError(rep.clause, rep.detail);
}

}  // namespace

GeneralSystem tilde_controller(const GeneralSystem& c2, const InterfaceSpec& iface, const FiniteSystem& s1,
                               const FiniteSystem& s2) {
    check_composable(c2, s2);
    const TildeOutputs tilde(c2, iface, match_labels(s2.states(), c2.inputs()), outputs_to_u2(c2, iface));
    GeneralSystem out(c2.states(), product(s1.states(), iface.z_labels), c2.internal(), iface.u2_labels);
    for (Index xc = 0; xc < c2.states().size(); ++xc) {
        for (Index v = 0; v < c2.internal().size(); ++v) out.set_next(xc, v, c2.next(xc, v));
        for (Index x1 = 0; x1 < s1.num_states(); ++x1)
            for (Index z1 = 0; z1 < iface.nz(); ++z1) out.set_output(xc, iface.lifted(x1, z1), tilde(xc, x1, z1));
    }
    return out;
}

ConcretizedController concretize(const InterfaceSpec& iface, const GeneralSystem& c2, const FiniteSystem& s1,
                                 const FiniteSystem& s2) {
    check_composable(c2, s2);
    ConcretizedController cc;
    cc.type = iface.type;
    cc.interface = iface;
    cc.c2 = c2;
    cc.x2_labels = s2.states();
    cc.x2_to_c2_input = match_labels(s2.states(), c2.inputs());
    cc.c2_output_to_u2 = outputs_to_u2(c2, iface);
    const TildeOutputs tilde(c2, iface, cc.x2_to_c2_input, cc.c2_output_to_u2);
    const std::size_t nxc = c2.states().size(), nvc = c2.internal().size();
    const std::size_t nz = iface.nz(), nu2 = iface.u2_labels.size();
    const auto t = iface.type;

    switch (t) {
        case RelationType::asr: {
            GeneralSystem g(product(c2.states(), iface.z_labels, iface.u2_labels), s1.states(),
                            product(c2.internal(), iface.z_labels, iface.u2_labels), s1.inputs());
            auto state = [&](Index xc, Index z, Index u2) { return (xc * nz + z) * nu2 + u2; };
            for (Index xc = 0; xc < nxc; ++xc) {
                for (Index vc = 0; vc < nvc; ++vc) {
                    const auto& succ = c2.next(xc, vc);
                    for (Index z = 0; z < nz; ++z) {
                        for (Index u2 = 0; u2 < nu2; ++u2) {
                            IndexSet next;
                            for (Index xn : succ) next.push_back(state(xn, z, u2));
                            const Index v = state(vc, z, u2);
                            for (Index zp = 0; zp < nz; ++zp)
                                for (Index up = 0; up < nu2; ++up) g.set_next(state(xc, zp, up), v, next);
                        }
                    }
                }
                for (Index zp = 0; zp < nz; ++zp) {
                    for (Index up = 0; up < nu2; ++up) {
                        for (Index x1 = 0; x1 < s1.num_states(); ++x1) {
                            OutputSet h;
                            for (Index z : iface.h2({zp, up, x1}))
                                for (const auto& c : tilde(xc, x1, z))
                                    for (Index u1 : iface.h1({z, c.y, x1})) h.push_back({u1, state(c.v, z, c.y)});
                            g.set_output(state(xc, zp, up), x1, std::move(h));
                        }
                    }
                }
            }
            cc.system = std::move(g);
            break;
        }
        case RelationType::asrb:
        case RelationType::asrbb: {
            GeneralSystem g(product(c2.states(), iface.z_labels), s1.states(), product(c2.internal(), iface.z_labels),
                            s1.inputs());
            for (Index xc = 0; xc < nxc; ++xc) {
                for (Index vc = 0; vc < nvc; ++vc) {
                    const auto& succ = c2.next(xc, vc);
                    for (Index zn = 0; zn < nz; ++zn) {
                        IndexSet next;
                        for (Index xn : succ) next.push_back(pair_index(xn, zn, nz));
                        for (Index z = 0; z < nz; ++z) g.set_next(pair_index(xc, z, nz), pair_index(vc, zn, nz), next);
                    }
                }
                for (Index z = 0; z < nz; ++z) {
                    for (Index x1 = 0; x1 < s1.num_states(); ++x1) {
                        OutputSet h;
                        for (const auto& c : tilde(xc, x1, z)) {
                            if (t == RelationType::asrb) {
                                for (Index u1 : iface.h1({z, c.y, x1}))
                                    for (Index zn : iface.h2({z, c.y, x1, u1}))
                                        h.push_back({u1, pair_index(c.v, zn, nz)});
                            } else {
                                for (Index zn : iface.h2({z, c.y}))
                                    for (Index u1 : iface.h1({z, c.y, x1, zn}))
                                        h.push_back({u1, pair_index(c.v, zn, nz)});
                            }
                        }
                        g.set_output(pair_index(xc, z, nz), x1, std::move(h));
                    }
                }
            }
            cc.system = std::move(g);
            break;
        }
        case RelationType::mcr:
        case RelationType::frr: {
            GeneralSystem g(c2.states(), s1.states(), c2.internal(), s1.inputs());
            for (Index xc = 0; xc < nxc; ++xc) {
                for (Index vc = 0; vc < nvc; ++vc) g.set_next(xc, vc, c2.next(xc, vc));
                for (Index x1 = 0; x1 < s1.num_states(); ++x1) {
                    OutputSet h;
                    for (Index z : iface.h2({x1})) {
                        for (const auto& c : tilde(xc, x1, z)) {
                            const auto u1s = t == RelationType::mcr ? iface.h1({z, c.y, x1}) : iface.h1({c.y});
                            for (Index u1 : u1s) h.push_back({u1, c.v});
                        }
                    }
                    g.set_output(xc, x1, std::move(h));
                }
            }
            cc.system = std::move(g);
            break;
        }
    }
    return cc;
}

// Closed loop ------------------------------------------------------------------

namespace {

struct LoopState {
    Index x1, z1, xc;
    auto operator<=>(const LoopState&) const = default;
};

void run_from(const ConcretizedController& c1, const TildeOutputs& tilde, const FiniteSystem& s1, Index x1_start,
              std::size_t horizon, std::set<ClosedLoopTrace>& out) {
    const auto& iface = c1.interface;
    const auto& c2 = c1.c2;
    using Node = std::pair<std::vector<ClosedLoopStep>, LoopState>;
    std::set<Node> frontier;
    for (Index z1 = 0; z1 < iface.nz(); ++z1) {
        if (iface.rt.image(iface.lifted(x1_start, z1)).empty()) continue;
        for (Index xc = 0; xc < c2.states().size(); ++xc) frontier.insert({{}, {x1_start, z1, xc}});
    }

    for (std::size_t k = 0; k < horizon && !frontier.empty(); ++k) {
        std::set<Node> next;
        for (const auto& [prefix, st] : frontier) {
            auto finish = [&](ClosedLoopStep step, TraceEnd end) {
                auto steps = prefix;
                steps.push_back(step);
                out.insert({std::move(steps), end});
            };
            for (Index x2 : iface.rt.image(iface.lifted(st.x1, st.z1))) {
                const auto choices = tilde.at(st.xc, x2);
                if (choices.empty()) {
                    finish({st.x1, st.z1, x2, st.xc, kNoIndex, kNoIndex, kNoIndex}, TraceEnd::blocked);
                    continue;
                }
                for (const auto& c : choices) {
                    const auto chain = interface_chain(iface, s1, st.x1, st.z1, c.y);
                    if (chain.empty()) {
                        finish({st.x1, st.z1, x2, st.xc, c.y, c.v, kNoIndex}, TraceEnd::blocked);
                        continue;
                    }
                    const auto& xcs = c2.next(st.xc, c.v);
                    // a chain outcome can lead to several successors; the
                    // step itself is recorded once per u1
                    std::map<Index, std::vector<LoopState>> by_input;
                    for (const auto& ch : chain) {
                        auto& succ = by_input[ch.u1];
                        if (iface.rt.image(iface.lifted(ch.x1_next, ch.z1_next)).empty()) continue;
                        for (Index xn : xcs) succ.push_back({ch.x1_next, ch.z1_next, xn});
                    }
                    for (const auto& [u1, succ] : by_input) {
                        const ClosedLoopStep step{st.x1, st.z1, x2, st.xc, c.y, c.v, u1};
                        if (succ.empty()) {
                            finish(step, TraceEnd::blocked);
                        } else if (k + 1 == horizon) {
                            finish(step, TraceEnd::truncated);
                        } else {
                            auto steps = prefix;
                            steps.push_back(step);
                            for (const auto& s : succ) next.insert({steps, s});
                        }
                    }
                }
            }
        }
        frontier = std::move(next);
    }
}

}  // namespace

std::set<ClosedLoopTrace> closed_loop_run(const ConcretizedController& c1, const FiniteSystem& s1,
                                          const IndexSet& x1_0, std::size_t horizon) {
    if (horizon == 0) throw UsageError("closed-loop horizon must be at least 1");
    for (Index x1 : x1_0)
        if (x1 >= s1.num_states()) throw UsageError("initial state out of range");
    const TildeOutputs tilde(c1.c2, c1.interface, c1.x2_to_c2_input, c1.c2_output_to_u2);

    std::vector<std::set<ClosedLoopTrace>> parts(x1_0.size());
    const auto n = static_cast<std::ptrdiff_t>(x1_0.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) run_from(c1, tilde, s1, x1_0[i], horizon, parts[i]);

    std::set<ClosedLoopTrace> out;
    for (auto& p : parts) out.merge(p);
    return out;
}

// Reproducibility --------------------------------------------------------------

namespace {

/// Every prefix of every sequence in `seqs`.
std::set<std::vector<Index>> prefixes(const std::vector<const std::vector<Index>*>& seqs) {
    std::set<std::vector<Index>> out;
    for (const auto* s : seqs) {
        std::vector<Index> p;
        out.insert(p);
        for (Index y : *s) {
            p.push_back(y);
            out.insert(p);
        }
    }
    return out;
}

bool has_related(const std::vector<Index>& concrete, const std::set<std::vector<Index>>& full,
                 const std::set<std::vector<Index>>& prefix_set,
                 const std::function<const IndexSet&(Index)>& related) {
    std::vector<Index> cur;
    std::function<bool(std::size_t)> dfs = [&](std::size_t k) {
        if (k == concrete.size()) return full.count(cur) > 0;
        for (Index x2 : related(concrete[k])) {
            cur.push_back(x2);
            if (prefix_set.count(cur) && dfs(k + 1)) return true;
            cur.pop_back();
        }
        return false;
    };
    return dfs(0);
}

std::string render(const std::vector<Index>& trace) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < trace.size(); ++i) os << (i ? "," : "") << trace[i];
    os << "]";
    return os.str();
}

}  // namespace

CheckReport related_inclusion(const BehaviorSet& concrete, const BehaviorSet& abstract,
                              const std::function<const IndexSet&(Index)>& related) {
    // abstract traces grouped by (length, end)
    std::map<std::pair<std::size_t, TraceEnd>, std::vector<const std::vector<Index>*>> groups;
    for (const auto& t : abstract.traces) groups[{t.outputs.size(), t.end}].push_back(&t.outputs);
    std::map<std::pair<std::size_t, TraceEnd>, std::pair<std::set<std::vector<Index>>, std::set<std::vector<Index>>>>
        index;
    for (const auto& [key, seqs] : groups) {
        auto& [full, pre] = index[key];
        for (const auto* s : seqs) full.insert(*s);
        pre = prefixes(seqs);
    }
    std::vector<const std::vector<Index>*> dead;
    for (const auto& d : abstract.dead_ends) dead.push_back(&d);
    const auto dead_prefixes = prefixes(dead);

    CheckReport rep;
    for (const auto& t : concrete.traces) {
        const auto it = index.find({t.outputs.size(), t.end});
        if (it == index.end() || !has_related(t.outputs, it->second.first, it->second.second, related)) {
            rep.holds = false;
            rep.counterexample = t.outputs;
            rep.message = std::string("no related abstract trace for concrete ") +
                          (t.end == TraceEnd::blocked ? "blocked" : "truncated") + " trace " + render(t.outputs);
            return rep;
        }
    }
    for (const auto& d : concrete.dead_ends) {
        if (!has_related(d, abstract.dead_ends, dead_prefixes, related)) {
            rep.holds = false;
            rep.counterexample = d;
            rep.message = "no related abstract dead end for concrete dead end " + render(d);
            return rep;
        }
    }
    rep.witness = std::vector<Index>{concrete.traces.size(), concrete.dead_ends.size()};
    rep.message = "inclusion holds (" + std::to_string(concrete.traces.size()) + " traces)";
    return rep;
}

CheckReport verify_reproducibility(const ConcretizedController& c1, const FiniteSystem& s1, const GeneralSystem& c2,
                                   const FiniteSystem& s2, const BinaryRelation& r, std::size_t horizon) {
    if (horizon == 0) throw UsageError("verification horizon must be at least 1");
    if (r.n1() != s1.num_states() || r.n2() != s2.num_states())
        throw UsageError("relation dimensions do not match the systems");
    const auto concrete_loop = feedback_product(c1.system, GeneralSystem::from_simple(s1));
    const auto abstract_loop = feedback_compose(c2, GeneralSystem::from_simple(s2));
    const auto related = [&](Index x1) -> const IndexSet& { return r.image(x1); };

    CheckReport last;
    for (std::size_t h = 1; h <= horizon; ++h) {
        const auto concrete = project_plant(behavior(concrete_loop, h), s1.num_states());
        const auto abstract = project_plant(behavior(abstract_loop, h), s2.num_states());
        last = related_inclusion(concrete, abstract, related);
        if (!last.holds) {
            std::string labelled;
            for (Index x1 : *last.counterexample) labelled += (labelled.empty() ? "" : " ") + s1.states()[x1];
            last.message = to_string(c1.type) + " reproducibility fails at horizon " + std::to_string(h) + ": " +
                           last.message + " (" + labelled + ")";
            return last;
        }
    }
    last.message = to_string(c1.type) + " reproducibility holds up to horizon " + std::to_string(horizon);
    return last;
}

std::string traces_to_csv(const std::set<ClosedLoopTrace>& traces, const ConcretizedController& c1,
                          const FiniteSystem& s1) {
    const auto& iface = c1.interface;
    auto label = [](const LabelSet& set, Index i) { return i == kNoIndex ? std::string() : set[i]; };
    std::ostringstream os;
    os << "trace,k,x1,u1,z1,x2,u2,blocked_flag\n";
    std::size_t id = 0;
    for (const auto& t : traces) {
        for (std::size_t k = 0; k < t.steps.size(); ++k) {
            const auto& s = t.steps[k];
            const bool last_blocked = t.end == TraceEnd::blocked && k + 1 == t.steps.size();
            os << id << ',' << k << ',' << label(s1.states(), s.x1) << ',' << label(s1.inputs(), s.u1) << ','
               << label(iface.z_labels, s.z1) << ',' << label(c1.x2_labels, s.x2) << ','
               << label(iface.u2_labels, s.u2) << ',' << (last_blocked ? 1 : 0) << '\n';
        }
        ++id;
    }
    return os.str();
}

}  // namespace simrel
