#include "simrel/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace simrel {

namespace {

LabelSet labels_from(const Json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    const auto& a = j.at(key);
    if (!a.is_array()) throw InputError(std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& e : a) {
        if (!e.is_string()) throw InputError(std::string("labels in '") + key + "' must be strings");
        auto s = e.get<std::string>();
        if (!seen.insert(s).second) throw InputError("duplicate label '" + s + "' in '" + key + "'");
        out.push_back(std::move(s));
    }
    return LabelSet(std::move(out));
}

Index label_at(const LabelSet& set, const Json& j, const char* what) {
    if (!j.is_string()) throw InputError(std::string(what) + " must be a label string");
    const auto i = set.find(j.get<std::string>());
    if (!i) throw InputError(std::string("unknown ") + what + " label '" + j.get<std::string>() + "'");
    return *i;
}

Json label_array(const LabelSet& l) { return Json(l.labels()); }

Json set_labels(const LabelSet& l, const IndexSet& s) {
    Json a = Json::array();
    for (Index i : s) a.push_back(l[i]);
    return a;
}

std::vector<std::string> flags_of(const GeneralSystem& sys) {
    std::vector<std::string> f;
    if (sys.is_static()) f.push_back("static");
    if (sys.is_autonomous()) f.push_back("autonomous");
    if (sys.is_simple()) f.push_back("simple");
    return f;
}

}  // namespace

GeneralSystem system_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("system must be a JSON object");
    const auto states = labels_from(j, "states");
    const auto inputs = labels_from(j, "inputs");
    const bool simple_form = !j.contains("H");
    if (simple_form && (j.contains("internal") || j.contains("outputs")))
        throw InputError("a system with internal or outputs must also give H");

    const auto internal = simple_form ? inputs : labels_from(j, "internal");
    const auto outputs = simple_form ? states : labels_from(j, "outputs");
    GeneralSystem sys(states, inputs, internal, outputs);

    if (j.contains("F")) {
        if (!j.at("F").is_array()) throw InputError("field 'F' must be an array");
        for (const auto& e : j.at("F")) {
            if (!e.is_object() || !e.contains("x") || !e.contains("v") || !e.contains("to"))
                throw InputError("F entries need x, v and to");
            const Index x = label_at(states, e.at("x"), "state");
            const Index v = label_at(internal, e.at("v"), simple_form ? "input" : "internal");
            if (!e.at("to").is_array()) throw InputError("F 'to' must be an array");
            for (const auto& t : e.at("to")) sys.add_next(x, v, label_at(states, t, "state"));
        }
    }
    if (simple_form) {
        for (Index x = 0; x < states.size(); ++x)
            for (Index u = 0; u < inputs.size(); ++u) sys.set_output(x, u, {OutputChoice{x, u}});
    } else {
        if (!j.at("H").is_array()) throw InputError("field 'H' must be an array");
        for (const auto& e : j.at("H")) {
            if (!e.is_object() || !e.contains("x") || !e.contains("u") || !e.contains("yv"))
                throw InputError("H entries need x, u and yv");
            const Index x = label_at(states, e.at("x"), "state");
            const Index u = label_at(inputs, e.at("u"), "input");
            if (!e.at("yv").is_array()) throw InputError("H 'yv' must be an array");
            for (const auto& p : e.at("yv")) {
                if (!p.is_array() || p.size() != 2) throw InputError("H yv entries must be [y, v] pairs");
                sys.add_output(x, u, label_at(outputs, p[0], "output"), label_at(internal, p[1], "internal"));
            }
        }
    }

    if (j.contains("flags")) {
        if (!j.at("flags").is_array()) throw InputError("field 'flags' must be an array");
        for (const auto& f : j.at("flags")) {
            if (!f.is_string()) throw InputError("flags must be strings");
            const auto name = f.get<std::string>();
            bool ok = false;
            if (name == "static") ok = sys.is_static();
            else if (name == "autonomous") ok = sys.is_autonomous();
            else if (name == "simple") ok = sys.is_simple();
            else throw InputError("unknown flag '" + name + "'");
            if (!ok) throw InputError("system is declared " + name + " but is not");
        }
    }
    return sys;
}

FiniteSystem finite_from_json(const Json& j) {
    const auto sys = system_from_json(j);
    if (!sys.is_simple()) throw InputError("expected a simple system (states, inputs, F)");
    return to_finite(sys);
}

Json system_to_json(const GeneralSystem& sys) {
    Json j;
    j["states"] = label_array(sys.states());
    j["inputs"] = label_array(sys.inputs());
    j["internal"] = label_array(sys.internal());
    j["outputs"] = label_array(sys.outputs());
    Json f = Json::array();
    for (Index x = 0; x < sys.states().size(); ++x)
        for (Index v = 0; v < sys.internal().size(); ++v)
            if (!sys.next(x, v).empty())
                f.push_back({{"x", sys.states()[x]}, {"v", sys.internal()[v]}, {"to", set_labels(sys.states(), sys.next(x, v))}});
    j["F"] = std::move(f);
    Json h = Json::array();
    for (Index x = 0; x < sys.states().size(); ++x) {
        for (Index u = 0; u < sys.inputs().size(); ++u) {
            const auto& out = sys.output(x, u);
            if (out.empty()) continue;
            Json yv = Json::array();
            for (const auto& c : out) yv.push_back({sys.outputs()[c.y], sys.internal()[c.v]});
            h.push_back({{"x", sys.states()[x]}, {"u", sys.inputs()[u]}, {"yv", std::move(yv)}});
        }
    }
    j["H"] = std::move(h);
    j["flags"] = flags_of(sys);
    return j;
}

Json finite_to_json(const FiniteSystem& sys) {
    Json j;
    j["states"] = label_array(sys.states());
    j["inputs"] = label_array(sys.inputs());
    Json f = Json::array();
    for (Index x = 0; x < sys.num_states(); ++x)
        for (Index u = 0; u < sys.num_inputs(); ++u)
            if (!sys.post(x, u).empty())
                f.push_back({{"x", sys.states()[x]}, {"v", sys.inputs()[u]}, {"to", set_labels(sys.states(), sys.post(x, u))}});
    j["F"] = std::move(f);
    j["flags"] = flags_of(GeneralSystem::from_simple(sys));
    return j;
}

BinaryRelation relation_from_json(const Json& j, const LabelSet& x1, const LabelSet& x2) {
    if (!j.is_object() || !j.contains("pairs") || !j.at("pairs").is_array())
        throw InputError("relation must be an object with a 'pairs' array");
    BinaryRelation r(x1.size(), x2.size());
    for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2) throw InputError("relation pairs must be [x1, x2]");
        r.add(label_at(x1, p[0], "concrete state"), label_at(x2, p[1], "abstract state"));
    }
    return r;
}

Json relation_to_json(const BinaryRelation& r, const LabelSet& x1, const LabelSet& x2) {
    Json pairs = Json::array();
    for (auto [a, b] : r.pairs()) pairs.push_back({x1[a], x2[b]});
    return {{"pairs", std::move(pairs)}};
}

Json interface_to_json(const InterfaceSpec& iface, const FiniteSystem& s1, const LabelSet& x2_labels) {
    const auto sig = signature(iface.type);
    auto labels_for = [&](Var v) -> const LabelSet& {
        switch (v) {
            case Var::x1:
            case Var::x1_next: return s1.states();
            case Var::z1:
            case Var::z1_next: return iface.z_labels;
            case Var::u1: return s1.inputs();
            case Var::u2: return iface.u2_labels;
        }
        return iface.z_labels;
    };
    auto dump = [&](const SetMap& m, const std::vector<Var>& vars, const LabelSet& values) {
        Json rows = Json::array();
        std::vector<Index> args(vars.size(), 0);
        const std::size_t total = m.domain_size();
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rest = flat;
            for (std::size_t i = vars.size(); i-- > 0;) {
                args[i] = rest % m.dims()[i];
                rest /= m.dims()[i];
            }
            const auto val = m(std::span<const Index>(args));
            if (val.empty()) continue;
            Json a = Json::array();
            for (std::size_t i = 0; i < vars.size(); ++i) a.push_back(labels_for(vars[i])[args[i]]);
            rows.push_back({{"args", std::move(a)}, {"values", set_labels(values, val)}});
        }
        return rows;
    };
    auto names = [](const std::vector<Var>& vars) {
        Json a = Json::array();
        for (auto v : vars) a.push_back(to_string(v));
        return a;
    };

    Json j;
    j["signature"] = to_string(iface.type);
    j["nu1"] = names(sig.nu1);
    j["nu2"] = names(sig.nu2);
    j["Z1"] = label_array(iface.z_labels);
    j["h1"] = dump(iface.h1, sig.nu1, s1.inputs());
    j["h2"] = dump(iface.h2, sig.nu2, iface.z_labels);
    const auto lifted = product(s1.states(), iface.z_labels);
    Json pairs = Json::array();
    for (auto [l, x2] : iface.rt.pairs()) pairs.push_back({lifted[l], x2_labels[x2]});
    j["Rt"] = std::move(pairs);
    return j;
}

Json controller_to_json(const StaticController& sc) {
    Json j;
    j["spec"] = describe(sc.spec, sc.states);
    j["domain"] = set_labels(sc.states, sc.domain);
    Json inputs = Json::object();
    for (Index x : sc.domain) inputs[sc.states[x]] = set_labels(sc.inputs, sc.choices[x]);
    j["inputs"] = std::move(inputs);
    if (std::holds_alternative<ReachSpec>(sc.spec)) {
        Json values = Json::object();
        for (Index x : sc.domain) values[sc.states[x]] = sc.value[x];
        j["value"] = std::move(values);
    }
    return j;
}

StaticController controller_from_json(const Json& j, const FiniteSystem& s2) {
    if (!j.is_object() || !j.contains("inputs") || !j.at("inputs").is_object())
        throw InputError("controller must be an object with an 'inputs' map");
    StaticController sc;
    sc.states = s2.states();
    sc.inputs = s2.inputs();
    sc.choices.resize(s2.num_states());
    sc.value.assign(s2.num_states(), kUnreachable);
    for (const auto& [state, us] : j.at("inputs").items()) {
        const Index x = label_at(s2.states(), Json(state), "abstract state");
        if (!us.is_array()) throw InputError("controller inputs must be arrays");
        IndexSet c;
        for (const auto& u : us) c.push_back(label_at(s2.inputs(), u, "abstract input"));
        normalize(c);
        sc.choices[x] = std::move(c);
        sc.domain.push_back(x);
        sc.value[x] = 0;
    }
    normalize(sc.domain);
    sc.spec = SafetySpec{sc.domain};
    return sc;
}

Json report_to_json(const CheckReport& rep) {
    Json j;
    j["holds"] = rep.holds;
    if (rep.witness) j["witness"] = *rep.witness;
    if (rep.counterexample) j["counterexample"] = *rep.counterexample;
    j["message"] = rep.message;
    return j;
}

Json abstraction_to_json(const GridAbstraction& a) {
    Json j = finite_to_json(a.s2);
    Json meta;
    meta["type"] = to_string(a.type);
    meta["eta"] = a.params.eta;
    meta["eps"] = a.params.eps;
    if (a.params.eta2) meta["eta2"] = *a.params.eta2;
    if (a.params.eps2) meta["eps2"] = *a.params.eps2;
    meta["rho"] = a.rho;
    meta["V"] = a.v_name;
    meta["dropped_transitions"] = a.dropped.size();
    meta["warnings"] = a.warnings;
    j["metadata"] = std::move(meta);
    return j;
}

std::string cardinality_csv(const std::vector<const GridAbstraction*>& abstractions) {
    if (abstractions.empty()) throw UsageError("no abstraction given");
    const auto& s0 = abstractions.front()->s2;
    for (const auto* a : abstractions)
        if (!(a->s2.states() == s0.states()) || !(a->s2.inputs() == s0.inputs()))
            throw UsageError("abstractions differ in grid or inputs");
    std::ostringstream os;
    os << "x2,u2";
    for (const auto* a : abstractions) os << ',' << to_string(a->type);
    os << '\n';
    for (Index x = 0; x < s0.num_states(); ++x) {
        for (Index u = 0; u < s0.num_inputs(); ++u) {
            os << '"' << s0.states()[x] << "\",\"" << s0.inputs()[u] << '"';
            for (const auto* a : abstractions) os << ',' << a->s2.post(x, u).size();
            os << '\n';
        }
    }
    return os.str();
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace simrel
