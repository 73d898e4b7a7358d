#include "simrel/pipeline.hpp"

#include <ostream>
#include <random>

namespace simrel {

PipelineConfig fixture_config(const std::string& name) {
    PipelineConfig cfg;
    if (name == "1d") {
        cfg.params = {0.25, 0.25, 0.2, 0.1};
    } else if (name == "2d") {
        cfg.n = 2;
        cfg.bounds = Box::cube(2, 0.0, 1.0);
        cfg.params = {0.1, 0.15, 0.07, 0.05};
    } else {
        throw InputError("unknown fixture '" + name + "' (expected 1d or 2d)");
    }
    return cfg;
}

namespace {

double number(const Json& j, const char* key) {
    if (!j.at(key).is_number()) throw InputError(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::uint64_t count(const Json& j, const char* key) {
    if (!j.at(key).is_number_unsigned()) throw InputError(std::string("'") + key + "' must be a non-negative integer");
    return j.at(key).get<std::uint64_t>();
}

Box box_from(const Json& j, std::size_t n, const char* key) {
    if (!j.is_array() || j.size() != n) throw InputError(std::string("'") + key + "' must list one [lo, hi] per dimension");
    Box b{Vec(static_cast<Eigen::Index>(n)), Vec(static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = j[i];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            throw InputError(std::string("'") + key + "' entries must be [lo, hi]");
        b.lo[static_cast<Eigen::Index>(i)] = r[0].get<double>();
        b.hi[static_cast<Eigen::Index>(i)] = r[1].get<double>();
        if (b.lo[static_cast<Eigen::Index>(i)] > b.hi[static_cast<Eigen::Index>(i)])
            throw InputError(std::string("'") + key + "' has lo > hi");
    }
    return b;
}

Json box_to(const Box& b) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < b.lo.size(); ++i) a.push_back({b.lo[i], b.hi[i]});
    return a;
}

}  // namespace

PipelineConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("configuration must be a JSON object");
    PipelineConfig cfg = fixture_config(j.contains("fixture") ? j.at("fixture").get<std::string>() : "1d");
    try {
        if (j.contains("n")) {
            cfg.n = count(j, "n");
            if (cfg.n == 0) throw InputError("'n' must be positive");
            cfg.bounds = Box::cube(cfg.n, 0.0, 1.0);
        }
        if (j.contains("a")) cfg.a = number(j, "a");
        if (j.contains("k")) cfg.k = number(j, "k");
        if (j.contains("bounds")) cfg.bounds = box_from(j.at("bounds"), cfg.n, "bounds");
        if (j.contains("inputs")) {
            cfg.inputs.clear();
            for (const auto& u : j.at("inputs")) {
                if (!u.is_array() || u.size() != cfg.n) throw InputError("each input must have n components");
                Vec v(static_cast<Eigen::Index>(cfg.n));
                for (std::size_t i = 0; i < cfg.n; ++i) v[static_cast<Eigen::Index>(i)] = u[i].get<double>();
                cfg.inputs.push_back(v);
            }
        }
        if (j.contains("type")) cfg.type = parse_relation_type(j.at("type").get<std::string>());
        if (j.contains("eta")) cfg.params.eta = number(j, "eta");
        if (j.contains("eps")) cfg.params.eps = number(j, "eps");
        if (j.contains("eta2")) cfg.params.eta2 = number(j, "eta2");
        if (j.contains("eps2")) cfg.params.eps2 = number(j, "eps2");
        if (j.contains("safe")) cfg.safe = box_from(j.at("safe"), cfg.n, "safe");
        if (j.contains("horizon")) cfg.horizon = count(j, "horizon");
        if (j.contains("samples")) cfg.samples = count(j, "samples");
        if (j.contains("seed")) cfg.seed = count(j, "seed");
    } catch (const Json::exception& e) {
        throw InputError(std::string("configuration: ") + e.what());
    }
    return cfg;
}

Json config_to_json(const PipelineConfig& cfg) {
    Json j;
    j["n"] = cfg.n;
    j["a"] = cfg.a;
    j["k"] = cfg.k;
    j["bounds"] = box_to(cfg.bounds);
    j["type"] = to_string(cfg.type);
    j["eta"] = cfg.params.eta;
    j["eps"] = cfg.params.eps;
    if (cfg.params.eta2) j["eta2"] = *cfg.params.eta2;
    if (cfg.params.eps2) j["eps2"] = *cfg.params.eps2;
    if (cfg.safe) j["safe"] = box_to(*cfg.safe);
    j["horizon"] = cfg.horizon;
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    return j;
}

IndexSet safe_cells(const GridAbstraction& a, const PipelineConfig& cfg) {
    if (!cfg.safe) return iota_set(a.grid.size());
    IndexSet out;
    for (Index x = 0; x < a.grid.size(); ++x)
        if (cfg.safe->contains(a.grid[x], 1e-9)) out.push_back(x);
    return out;
}

std::vector<Vec> initial_states(const GridAbstraction& a, const Box& bounds, const IndexSet& domain,
                                std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<Vec> out;
    for (std::size_t tries = 0; out.size() < count && tries < 100 * count; ++tries) {
        Vec x(bounds.lo.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = bounds.lo[i] + unit() * (bounds.hi[i] - bounds.lo[i]);
        const Index c = a.grid.nearest(x);
        if (c != kNoIndex && contains(domain, c)) out.push_back(std::move(x));
    }
    return out;
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    PipelineOutcome res;
    if (cfg.horizon == 0) throw UsageError("horizon must be at least 1");
    const auto tb = make_affine_testbed(cfg.n, cfg.a, cfg.k, cfg.bounds, cfg.inputs);

    const auto params = check_parameters(cfg.type, tb.gb, cfg.params, cfg.n);
    if (!params.ok()) {
        const auto* f = params.first_failure();
        res.exit_code = kExitInput;
        res.verdict = "parameter check failed: " + f->name + " (" + f->expression + ")";
        log << params.describe() << "\n";
        return res;
    }

    std::filesystem::create_directories(out);
    const auto a = construct_abstraction(cfg.type, tb.dyn, tb.gb, cfg.params);
    write_json(out / "abstraction.json", abstraction_to_json(a));
    write_text(out / "cardinality.csv", cardinality_csv({&a}));
    for (const auto& w : a.warnings) log << "warning: " << w << "\n";

    const auto sc = synthesize_safety(a.s2, safe_cells(a, cfg));
    write_json(out / "controller.json", controller_to_json(sc));
    if (!sc.feasible()) {
        res.exit_code = kExitInfeasible;
        res.verdict = "INFEASIBLE: empty controllable domain for " + describe(sc.spec, a.s2.states());
        write_text(out / "verdict.txt", res.verdict + "\n");
        return res;
    }

    const auto starts = initial_states(a, cfg.bounds, sc.domain, cfg.samples, cfg.seed);
    std::vector<ContinuousTrace> traces(starts.size());
    const auto ns = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < ns; ++i)
        traces[i] = simulate_closed_loop(a, tb.dyn, tb.gb, sc, starts[i], cfg.horizon,
                                         cfg.seed + 1 + static_cast<std::uint64_t>(i));
    write_text(out / "traces.csv", continuous_traces_to_csv(traces, a));

    std::size_t bad = 0;
    std::string first;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (traces[i].violations.empty()) continue;
        if (!bad) first = "trace " + std::to_string(i) + ": " + traces[i].violations.front();
        ++bad;
    }
    std::string verdict = to_string(cfg.type) + " reproducibility ";
    if (bad == 0 && !traces.empty()) {
        verdict += "PASS (" + std::to_string(traces.size()) + " traces, horizon " + std::to_string(cfg.horizon) + ")";
    } else {
        verdict += "FAIL (" + (traces.empty() ? std::string("no initial state in the domain") : first) + ")";
        res.exit_code = kExitVerification;
    }
    res.verdict = verdict;
    write_text(out / "verdict.txt", verdict + "\n");
    return res;
}

}  // namespace simrel
