#include "simrel/synthesis.hpp"

namespace simrel {

std::string describe(const Specification& spec, const LabelSet& states) {
    auto list = [&](const IndexSet& s) {
        std::string out = "{";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out += ",";
            out += states[s[i]];
        }
        return out + "}";
    };
    if (const auto* safety = std::get_if<SafetySpec>(&spec)) return "safety " + list(safety->safe);
    const auto& reach = std::get<ReachSpec>(spec);
    return "reach " + list(reach.target) + " within " + std::to_string(reach.bound);
}

namespace {

void check_states(const FiniteSystem& s2, const IndexSet& set) {
    if (!set.empty() && set.back() >= s2.num_states()) throw UsageError("state set index out of range");
}

}  // namespace

StaticController synthesize_safety(const FiniteSystem& s2, const IndexSet& safe_in) {
    IndexSet safe = safe_in;
    normalize(safe);
    check_states(s2, safe);

    std::vector<char> in(s2.num_states(), 0);
    for (Index x : safe) in[x] = 1;

    auto keeps = [&](Index x, Index u) {
        const auto& post = s2.post(x, u);
        if (post.empty()) return false;
        return std::all_of(post.begin(), post.end(), [&](Index y) { return in[y] != 0; });
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (Index x = 0; x < s2.num_states(); ++x) {
            if (!in[x]) continue;
            bool ok = false;
            for (Index u = 0; u < s2.num_inputs() && !ok; ++u) ok = keeps(x, u);
            if (!ok) {
                in[x] = 0;
                changed = true;
            }
        }
    }

    StaticController sc;
    sc.spec = SafetySpec{safe};
    sc.states = s2.states();
    sc.inputs = s2.inputs();
    sc.choices.resize(s2.num_states());
    sc.value.assign(s2.num_states(), kUnreachable);
    for (Index x = 0; x < s2.num_states(); ++x) {
        if (!in[x]) continue;
        sc.domain.push_back(x);
        sc.value[x] = 0;
        for (Index u = 0; u < s2.num_inputs(); ++u)
            if (keeps(x, u)) sc.choices[x].push_back(u);
    }
    return sc;
}

StaticController synthesize_reach(const FiniteSystem& s2, const IndexSet& target_in, std::size_t bound) {
    IndexSet target = target_in;
    normalize(target);
    check_states(s2, target);

    std::vector<std::size_t> value(s2.num_states(), kUnreachable);
    for (Index x : target) value[x] = 0;

    auto worst = [&](Index x, Index u) {
        const auto& post = s2.post(x, u);
        if (post.empty()) return kUnreachable;
        std::size_t w = 0;
        for (Index y : post) w = std::max(w, value[y]);
        return w;
    };

    for (std::size_t k = 1; k <= bound; ++k) {
        std::vector<Index> fresh;
        for (Index x = 0; x < s2.num_states(); ++x) {
            if (value[x] != kUnreachable) continue;
            for (Index u = 0; u < s2.num_inputs(); ++u) {
                if (worst(x, u) < k) {
                    fresh.push_back(x);
                    break;
                }
            }
        }
        if (fresh.empty()) break;
        for (Index x : fresh) value[x] = k;
    }

    StaticController sc;
    sc.spec = ReachSpec{target, bound};
    sc.states = s2.states();
    sc.inputs = s2.inputs();
    sc.choices.resize(s2.num_states());
    sc.value = value;
    for (Index x = 0; x < s2.num_states(); ++x) {
        if (value[x] == kUnreachable) continue;
        sc.domain.push_back(x);
        for (Index u = 0; u < s2.num_inputs(); ++u) {
            const auto w = worst(x, u);
            if (w == kUnreachable) continue;
            if (value[x] == 0 || w < value[x]) sc.choices[x].push_back(u);
        }
    }
    return sc;
}

GeneralSystem controller_as_system(const StaticController& sc) {
    if (!sc.feasible()) throw InfeasibleController("controller has an empty domain");
    return GeneralSystem::static_map(sc.states, sc.inputs, [&](Index x2) { return sc.choices[x2]; });
}

StaticController permissive_controller(const FiniteSystem& s2) {
    StaticController sc;
    sc.spec = SafetySpec{iota_set(s2.num_states())};
    sc.states = s2.states();
    sc.inputs = s2.inputs();
    sc.choices.resize(s2.num_states());
    sc.value.assign(s2.num_states(), 0);
    for (Index x = 0; x < s2.num_states(); ++x) {
        sc.choices[x] = available_inputs(s2, x);
        sc.domain.push_back(x);
    }
    return sc;
}

}  // namespace simrel
