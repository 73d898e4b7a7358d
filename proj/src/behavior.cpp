#include "simrel/system.hpp"

namespace simrel {

namespace {

void explore(const GeneralSystem& sys, Index start, std::size_t horizon, BehaviorSet& out) {
    // frontier: (output prefix, current state), deduplicated per depth
    std::set<std::pair<std::vector<Index>, Index>> frontier{{{}, start}};
    for (std::size_t k = 0; k < horizon && !frontier.empty(); ++k) {
        std::set<std::pair<std::vector<Index>, Index>> next;
        for (const auto& [prefix, x] : frontier) {
            bool any = false;
            for (Index u = 0; u < sys.inputs().size(); ++u) {
                for (const auto& c : sys.output(x, u)) {
                    any = true;
                    auto trace = prefix;
                    trace.push_back(c.y);
                    const auto& succ = sys.next(x, c.v);
                    if (succ.empty()) {
                        out.traces.insert({std::move(trace), TraceEnd::blocked});
                    } else if (k + 1 == horizon) {
                        out.traces.insert({std::move(trace), TraceEnd::truncated});
                    } else {
                        for (Index xn : succ) next.emplace(trace, xn);
                    }
                }
            }
            if (!any && !prefix.empty()) out.dead_ends.insert(prefix);
        }
        frontier = std::move(next);
    }
}

void merge(BehaviorSet& into, BehaviorSet&& from) {
    into.traces.merge(from.traces);
    into.dead_ends.merge(from.dead_ends);
}

}  // namespace

BehaviorSet behavior_serial(const GeneralSystem& sys, const IndexSet& x0, std::size_t horizon) {
    if (horizon == 0) throw UsageError("behavior horizon must be at least 1");
    BehaviorSet out;
    out.horizon = horizon;
    for (Index x : x0) {
        if (x >= sys.states().size()) throw UsageError("initial state out of range");
        explore(sys, x, horizon, out);
    }
    return out;
}

BehaviorSet behavior(const GeneralSystem& sys, const IndexSet& x0, std::size_t horizon) {
    if (horizon == 0) throw UsageError("behavior horizon must be at least 1");
    for (Index x : x0)
        if (x >= sys.states().size()) throw UsageError("initial state out of range");

    std::vector<BehaviorSet> parts(x0.size());
    const auto n = static_cast<std::ptrdiff_t>(x0.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) explore(sys, x0[i], horizon, parts[i]);

    BehaviorSet out;
    out.horizon = horizon;
    for (auto& p : parts) merge(out, std::move(p));
    return out;
}

BehaviorSet behavior(const GeneralSystem& sys, std::size_t horizon) {
    return behavior(sys, iota_set(sys.states().size()), horizon);
}

BehaviorSet project(const BehaviorSet& b, const std::function<Index(Index)>& component) {
    BehaviorSet out;
    out.horizon = b.horizon;
    for (const auto& t : b.traces) {
        OutputTrace p{{}, t.end};
        p.outputs.reserve(t.outputs.size());
        for (Index y : t.outputs) p.outputs.push_back(component(y));
        out.traces.insert(std::move(p));
    }
    for (const auto& d : b.dead_ends) {
        std::vector<Index> p;
        p.reserve(d.size());
        for (Index y : d) p.push_back(component(y));
        out.dead_ends.insert(std::move(p));
    }
    return out;
}

BehaviorSet project_plant(const BehaviorSet& b, std::size_t plant_outputs) {
    return project(b, [plant_outputs](Index y) { return second_of(y, plant_outputs); });
}

BehaviorSet project_controller(const BehaviorSet& b, std::size_t plant_outputs) {
    return project(b, [plant_outputs](Index y) { return first_of(y, plant_outputs); });
}

}  // namespace simrel
