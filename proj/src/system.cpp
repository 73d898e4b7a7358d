#include "simrel/system.hpp"

namespace simrel {

FiniteSystem::FiniteSystem(LabelSet states, LabelSet inputs)
    : states_(std::move(states)), inputs_(std::move(inputs)),
      trans_(states_.size() * inputs_.size()) {}

void FiniteSystem::check_pair(Index x, Index u) const {
    if (x >= num_states()) throw UsageError("state index " + std::to_string(x) + " out of range");
    if (u >= num_inputs()) throw UsageError("input index " + std::to_string(u) + " out of range");
}

const IndexSet& FiniteSystem::post(Index x, Index u) const {
    check_pair(x, u);
    return trans_[x * num_inputs() + u];
}

void FiniteSystem::set_post(Index x, Index u, IndexSet successors) {
    check_pair(x, u);
    normalize(successors);
    if (!successors.empty() && successors.back() >= num_states())
        throw UsageError("successor index out of range");
    trans_[x * num_inputs() + u] = std::move(successors);
}

void FiniteSystem::add_transition(Index x, Index u, Index successor) {
    check_pair(x, u);
    if (successor >= num_states()) throw UsageError("successor index out of range");
    auto& s = trans_[x * num_inputs() + u];
    auto it = std::lower_bound(s.begin(), s.end(), successor);
    if (it == s.end() || *it != successor) s.insert(it, successor);
}

IndexSet available_inputs(const FiniteSystem& sys, Index x) {
    if (x >= sys.num_states()) throw UsageError("state index " + std::to_string(x) + " out of range");
    IndexSet out;
    for (Index u = 0; u < sys.num_inputs(); ++u)
        if (!sys.post(x, u).empty()) out.push_back(u);
    return out;
}

bool is_deterministic(const FiniteSystem& sys) {
    for (Index x = 0; x < sys.num_states(); ++x)
        for (Index u = 0; u < sys.num_inputs(); ++u)
            if (sys.post(x, u).size() > 1) return false;
    return true;
}

GeneralSystem::GeneralSystem(LabelSet states, LabelSet inputs, LabelSet internal, LabelSet outputs)
    : states_(std::move(states)), inputs_(std::move(inputs)), internal_(std::move(internal)),
      outputs_(std::move(outputs)),
      next_(states_.size() * internal_.size()),
      output_(states_.size() * inputs_.size()) {}

GeneralSystem GeneralSystem::from_simple(const FiniteSystem& sys) {
    GeneralSystem g(sys.states(), sys.inputs(), sys.inputs(), sys.states());
    for (Index x = 0; x < sys.num_states(); ++x) {
        for (Index u = 0; u < sys.num_inputs(); ++u) {
            g.next_[x * sys.num_inputs() + u] = sys.post(x, u);
            g.output_[x * sys.num_inputs() + u] = {OutputChoice{x, u}};
        }
    }
    return g;
}

GeneralSystem GeneralSystem::static_map(LabelSet inputs, LabelSet outputs,
                                        const std::function<IndexSet(Index)>& map) {
    GeneralSystem g(LabelSet::singleton(), std::move(inputs), LabelSet::singleton(), std::move(outputs));
    g.next_[0] = {0};
    for (Index u = 0; u < g.inputs_.size(); ++u) {
        OutputSet h;
        for (Index y : map(u)) {
            if (y >= g.outputs_.size()) throw UsageError("static map output out of range");
            h.push_back({y, 0});
        }
        g.set_output(0, u, std::move(h));
    }
    return g;
}

const IndexSet& GeneralSystem::next(Index x, Index v) const {
    if (x >= states_.size() || v >= internal_.size()) throw UsageError("F argument out of range");
    return next_[x * internal_.size() + v];
}

const OutputSet& GeneralSystem::output(Index x, Index u) const {
    if (x >= states_.size() || u >= inputs_.size()) throw UsageError("H argument out of range");
    return output_[x * inputs_.size() + u];
}

void GeneralSystem::set_next(Index x, Index v, IndexSet successors) {
    if (x >= states_.size() || v >= internal_.size()) throw UsageError("F argument out of range");
    normalize(successors);
    if (!successors.empty() && successors.back() >= states_.size())
        throw UsageError("F successor out of range");
    next_[x * internal_.size() + v] = std::move(successors);
}

void GeneralSystem::add_next(Index x, Index v, Index successor) {
    if (x >= states_.size() || v >= internal_.size() || successor >= states_.size())
        throw UsageError("F argument out of range");
    auto& s = next_[x * internal_.size() + v];
    auto it = std::lower_bound(s.begin(), s.end(), successor);
    if (it == s.end() || *it != successor) s.insert(it, successor);
}

void GeneralSystem::set_output(Index x, Index u, OutputSet choices) {
    if (x >= states_.size() || u >= inputs_.size()) throw UsageError("H argument out of range");
    std::sort(choices.begin(), choices.end());
    choices.erase(std::unique(choices.begin(), choices.end()), choices.end());
    for (const auto& c : choices)
        if (c.y >= outputs_.size() || c.v >= internal_.size()) throw UsageError("H value out of range");
    output_[x * inputs_.size() + u] = std::move(choices);
}

void GeneralSystem::add_output(Index x, Index u, Index y, Index v) {
    if (x >= states_.size() || u >= inputs_.size() || y >= outputs_.size() || v >= internal_.size())
        throw UsageError("H argument out of range");
    auto& s = output_[x * inputs_.size() + u];
    OutputChoice c{y, v};
    auto it = std::lower_bound(s.begin(), s.end(), c);
    if (it == s.end() || *it != c) s.insert(it, c);
}

bool GeneralSystem::is_static() const {
    return states_.size() == 1 && internal_.size() == 1 && next_[0] == IndexSet{0};
}

bool GeneralSystem::is_autonomous() const { return inputs_.size() == 1; }

bool GeneralSystem::is_simple() const {
    if (!(internal_ == inputs_) || !(outputs_ == states_)) return false;
    for (Index x = 0; x < states_.size(); ++x)
        for (Index u = 0; u < inputs_.size(); ++u)
            if (output(x, u) != OutputSet{OutputChoice{x, u}}) return false;
    return true;
}

FiniteSystem to_finite(const GeneralSystem& sys) {
    if (!sys.is_simple()) throw UsageError("system is not simple");
    FiniteSystem f(sys.states(), sys.inputs());
    for (Index x = 0; x < sys.states().size(); ++x)
        for (Index u = 0; u < sys.inputs().size(); ++u) f.set_post(x, u, sys.next(x, u));
    return f;
}

}  // namespace simrel
