#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "simrel/pipeline.hpp"

namespace fs = std::filesystem;
using namespace simrel;

namespace {

struct Options {
    std::string s1, s2, relation, controller, config, fixture;
    std::string type;
    std::optional<double> eta, eps, eta2, eps2;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    std::string safe, target;
    std::size_t bound = 10;
    bool compare = false;
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct Loaded {
    FiniteSystem s1, s2;
    BinaryRelation r;
};

Loaded load_finite_inputs(const Options& o) {
    if (o.s1.empty() || o.s2.empty() || o.relation.empty()) throw InputError("--s1, --s2 and --relation are required");
    Loaded l;
    l.s1 = finite_from_json(read_json(o.s1));
    l.s2 = finite_from_json(read_json(o.s2));
    l.r = relation_from_json(read_json(o.relation), l.s1.states(), l.s2.states());
    return l;
}

PipelineConfig make_config(const Options& o) {
    PipelineConfig cfg;
    if (!o.config.empty()) {
        auto j = read_json(o.config);
        if (!o.fixture.empty()) j["fixture"] = o.fixture;
        cfg = config_from_json(j);
    } else {
        cfg = fixture_config(o.fixture.empty() ? "1d" : o.fixture);
    }
    if (!o.type.empty()) cfg.type = parse_relation_type(o.type);
    if (o.eta) cfg.params.eta = *o.eta;
    if (o.eps) cfg.params.eps = *o.eps;
    if (o.eta2) cfg.params.eta2 = *o.eta2;
    if (o.eps2) cfg.params.eps2 = *o.eps2;
    if (o.horizon) cfg.horizon = o.horizon;
    if (o.seed_set) cfg.seed = o.seed;
    return cfg;
}

fs::path out_dir(const Options& o, const char* fallback) {
    fs::path p = o.out.empty() ? fs::path(fallback) : fs::path(o.out);
    fs::create_directories(p);
    return p;
}

std::string labelled(const std::vector<Index>& tuple, const std::vector<const LabelSet*>& sets) {
    std::string s;
    for (std::size_t i = 0; i < tuple.size() && i < sets.size(); ++i) s += (i ? "," : "") + (*sets[i])[tuple[i]];
    return s;
}

int cmd_classify(const Options& o) {
    const auto in = load_finite_inputs(o);
    const auto reports = classify(in.s1, in.s2, in.r);
    Json j = Json::object();
    for (auto t : kAllRelationTypes) {
        const auto& rep = reports.at(t);
        std::cout << to_string(t) << ": " << (rep.holds ? "yes" : "no");
        if (!rep.holds && rep.counterexample) {
            std::vector<const LabelSet*> sets;
            if (t == RelationType::asrbb) sets = {&in.s2.states(), &in.s2.inputs()};
            else sets = {&in.s1.states(), &in.s2.states(), &in.s2.inputs()};
            std::cout << " (cex: " << labelled(*rep.counterexample, sets) << ")";
        }
        std::cout << "\n";
        j[to_string(t)] = report_to_json(rep);
    }
    if (!o.out.empty()) write_json(out_dir(o, ".") / "classify.json", j);
    return reports.at(RelationType::asr).holds ? kExitOk : kExitVerification;
}

int cmd_abstract(const Options& o) {
    const auto cfg = make_config(o);
    const auto tb = make_affine_testbed(cfg.n, cfg.a, cfg.k, cfg.bounds, cfg.inputs);
    const auto dir = out_dir(o, "abstraction_out");
    if (o.compare) {
        const auto asr = construct_abstraction(RelationType::asr, tb.dyn, tb.gb, cfg.params);
        const auto mcr = construct_abstraction(RelationType::mcr, tb.dyn, tb.gb, cfg.params);
        write_json(dir / "abstraction_asr.json", abstraction_to_json(asr));
        write_json(dir / "abstraction_mcr.json", abstraction_to_json(mcr));
        write_text(dir / "cardinality.csv", cardinality_csv({&asr, &mcr}));
        std::cout << "wrote ASR and MCR abstractions with " << asr.grid.size() << " cells to " << dir.string() << "\n";
        return kExitOk;
    }
    const auto a = construct_abstraction(cfg.type, tb.dyn, tb.gb, cfg.params);
    write_json(dir / "abstraction.json", abstraction_to_json(a));
    write_text(dir / "cardinality.csv", cardinality_csv({&a}));
    for (const auto& w : a.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << to_string(a.type) << " abstraction with " << a.grid.size() << " cells written to " << dir.string()
              << "\n";
    return kExitOk;
}

int cmd_synthesize(const Options& o) {
    if (o.s2.empty()) throw InputError("--s2 is required");
    const auto s2 = finite_from_json(read_json(o.s2));
    auto labels_to_set = [&](const std::string& list) {
        IndexSet s;
        for (const auto& l : split(list)) s.push_back(s2.states().at(l));
        normalize(s);
        return s;
    };
    StaticController sc;
    if (!o.target.empty()) sc = synthesize_reach(s2, labels_to_set(o.target), o.bound);
    else sc = synthesize_safety(s2, o.safe.empty() ? iota_set(s2.num_states()) : labels_to_set(o.safe));
    write_json(out_dir(o, ".") / "controller.json", controller_to_json(sc));
    if (!sc.feasible()) {
        std::cerr << "infeasible: empty controllable domain for " << describe(sc.spec, s2.states()) << "\n";
        return kExitInfeasible;
    }
    std::cout << "controllable domain: " << sc.domain.size() << " of " << s2.num_states() << " states\n";
    return kExitOk;
}

struct Concrete {
    Loaded in;
    InterfaceSpec iface;
    StaticController sc;
    GeneralSystem c2;
    ConcretizedController c1;
};

Concrete build_concrete(const Options& o) {
    if (o.type.empty()) throw InputError("--type is required");
    Concrete c;
    c.in = load_finite_inputs(o);
    const auto t = parse_relation_type(o.type);
    c.iface = canonical_interface(t, c.in.s1, c.in.s2, c.in.r);
    c.sc = o.controller.empty() ? permissive_controller(c.in.s2) : controller_from_json(read_json(o.controller), c.in.s2);
    c.c2 = controller_as_system(c.sc);
    c.c1 = concretize(c.iface, c.c2, c.in.s1, c.in.s2);
    return c;
}

int cmd_concretize(const Options& o) {
    const auto c = build_concrete(o);
    const auto dir = out_dir(o, "concretize_out");
    write_json(dir / "interface.json", interface_to_json(c.iface, c.in.s1, c.in.s2.states()));
    write_json(dir / "concrete_controller.json", system_to_json(c.c1.system));
    const auto rep = verify_reproducibility(c.c1, c.in.s1, c.c2, c.in.s2, c.in.r, o.horizon ? o.horizon : 6);
    write_json(dir / "verification.json", report_to_json(rep));
    std::cout << rep.message << "\n";
    return rep.holds ? kExitOk : kExitVerification;
}

int cmd_simulate(const Options& o) {
    const auto c = build_concrete(o);
    const auto traces = closed_loop_run(c.c1, c.in.s1, iota_set(c.in.s1.num_states()), o.horizon ? o.horizon : 6);
    write_text(out_dir(o, ".") / "traces.csv", traces_to_csv(traces, c.c1, c.in.s1));
    std::size_t blocked = 0;
    for (const auto& t : traces) blocked += t.end == TraceEnd::blocked;
    std::cout << traces.size() << " closed-loop traces, " << blocked << " blocked\n";
    return kExitOk;
}

int cmd_pipeline(const Options& o) {
    const auto cfg = make_config(o);
    const auto res = run_pipeline(cfg, out_dir(o, "pipeline_out"), std::cerr);
    std::cout << res.verdict << "\n";
    return res.exit_code;
}

int cmd_selftest(const Options& o) {
    // relation fixture: S1 a -u-> b, S2 A -U-> B, R = {(a,A), (b,B), (b,C)}
    FiniteSystem s1(LabelSet({"a", "b"}), LabelSet({"u"}));
    s1.add_transition(0, 0, 1);
    FiniteSystem s2(LabelSet({"A", "B", "C"}), LabelSet({"U"}));
    s2.add_transition(0, 0, 1);
    const BinaryRelation r(2, 3, {{0, 0}, {1, 1}, {1, 2}});
    const auto reports = classify(s1, s2, r);

    int failures = 0;
    auto line = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "PASS " : "FAIL ") << what << "\n";
        failures += !ok;
    };
    line(reports.at(RelationType::asr).holds && !reports.at(RelationType::mcr).holds, "classify relation fixture");
    for (auto t : {RelationType::asr, RelationType::mcr, RelationType::asrbb, RelationType::asrb}) {
        auto cfg = fixture_config("1d");
        cfg.type = t;
        cfg.seed = o.seed;
        std::ostringstream log;
        const auto dir = fs::temp_directory_path() / ("simrel_selftest_" + to_string(t));
        const auto res = run_pipeline(cfg, dir, log);
        line(res.exit_code == kExitOk, "pipeline 1d " + to_string(t) + ": " + res.verdict);
        fs::remove_all(dir);
    }
    return failures ? kExitVerification : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation relations, interfaces and controller concretization"};
    app.require_subcommand(1);
    Options o;

    auto add_types = [&](CLI::App* c) {
        c->add_option("--type", o.type, "Relation type")
            ->check(CLI::IsMember({"asr", "asrb", "asrbb", "mcr", "frr"}, CLI::ignore_case));
    };
    auto add_finite = [&](CLI::App* c) {
        c->add_option("--s1", o.s1, "Concrete system JSON");
        c->add_option("--s2", o.s2, "Abstract system JSON");
        c->add_option("--relation", o.relation, "Relation JSON");
    };
    auto add_grid = [&](CLI::App* c) {
        c->add_option("--config", o.config, "Pipeline configuration JSON");
        c->add_option("--fixture", o.fixture, "Named configuration (1d or 2d)");
        c->add_option("--eta", o.eta, "Grid step");
        c->add_option("--eps", o.eps, "Cell level");
        c->add_option("--eta2", o.eta2, "Sub-grid step");
        c->add_option("--eps2", o.eps2, "Sub-grid level");
    };
    auto add_common = [&](CLI::App* c) {
        c->add_option("--horizon", o.horizon, "Horizon");
        c->add_option("--seed", o.seed, "Random seed")->each([&](const std::string&) { o.seed_set = true; });
        c->add_option("--out", o.out, "Output directory");
    };

    auto* classify_cmd = app.add_subcommand("classify", "Check all five relation types");
    add_finite(classify_cmd);
    add_common(classify_cmd);

    auto* abstract_cmd = app.add_subcommand("abstract", "Build a grid abstraction of the affine testbed");
    add_types(abstract_cmd);
    add_grid(abstract_cmd);
    add_common(abstract_cmd);
    abstract_cmd->add_flag("--compare", o.compare, "Build ASR and MCR and compare cardinalities");

    auto* synth_cmd = app.add_subcommand("synthesize", "Synthesize a static abstract controller");
    synth_cmd->add_option("--s2", o.s2, "Abstract system JSON");
    synth_cmd->add_option("--safe", o.safe, "Comma-separated safe states (default all)");
    synth_cmd->add_option("--target", o.target, "Comma-separated target states");
    synth_cmd->add_option("--bound", o.bound, "Reach step bound");
    add_common(synth_cmd);

    auto* conc_cmd = app.add_subcommand("concretize", "Concretize an abstract controller and verify it");
    add_finite(conc_cmd);
    add_types(conc_cmd);
    conc_cmd->add_option("--controller", o.controller, "Controller JSON (default: every available input)");
    add_common(conc_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "Enumerate the interface closed loop");
    add_finite(sim_cmd);
    add_types(sim_cmd);
    sim_cmd->add_option("--controller", o.controller, "Controller JSON (default: every available input)");
    add_common(sim_cmd);

    auto* pipe_cmd = app.add_subcommand("pipeline", "Abstract, synthesize, concretize, simulate and verify");
    add_types(pipe_cmd);
    add_grid(pipe_cmd);
    add_common(pipe_cmd);

    auto* self_cmd = app.add_subcommand("selftest", "Run built-in checks");
    add_common(self_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*classify_cmd) return cmd_classify(o);
        if (*abstract_cmd) return cmd_abstract(o);
        if (*synth_cmd) return cmd_synthesize(o);
        if (*conc_cmd) return cmd_concretize(o);
        if (*sim_cmd) return cmd_simulate(o);
        if (*pipe_cmd) return cmd_pipeline(o);
        if (*self_cmd) return cmd_selftest(o);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const RelationNotSatisfied& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerification;
    } catch (const InfeasibleController& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const CompositionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
