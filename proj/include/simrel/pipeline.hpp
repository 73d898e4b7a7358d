#pragma once

#include <filesystem>
#include <iosfwd>

#include "simrel/io.hpp"

namespace simrel {

/// Process exit codes shared by the command-line tools.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInput = 2, kExitInfeasible = 3, kExitVerification = 4 };

/// Continuous pipeline configuration on the affine testbed.
struct PipelineConfig {
    std::size_t n = 1;
    double a = 0.9;
    double k = -0.4;
    Box bounds = Box::cube(1, 0.0, 1.0);
    std::vector<Vec> inputs;
    RelationType type = RelationType::mcr;
    GridParams params;
    /// Safe set as a box in state coordinates; empty means the whole bounds.
    std::optional<Box> safe;
    std::size_t horizon = 10;
    std::size_t samples = 20;
    std::uint64_t seed = 0;
};

/// Named configurations "1d" and "2d". Throws InputError for other names.
PipelineConfig fixture_config(const std::string& name);

/// Starts from the fixture named by "fixture" (default 1d). Other keys: fixture, n, a, k, bounds,
/// inputs, type, eta, eps, eta2, eps2, safe, horizon, samples, seed.
PipelineConfig config_from_json(const Json& j);

Json config_to_json(const PipelineConfig& cfg);

/// Abstract states whose point lies in the safe box.
IndexSet safe_cells(const GridAbstraction& a, const PipelineConfig& cfg);

struct PipelineOutcome {
    int exit_code = kExitOk;
    std::string verdict;
};

/// Abstraction, safety synthesis, closed-loop simulation from seeded initial
/// states and verification. Writes abstraction.json, controller.json,
/// traces.csv, cardinality.csv and verdict.txt into `out`. Messages go to
/// `log`.
PipelineOutcome run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Sample initial states: seeded uniform draws in the bounds whose nearest
/// cell is in `domain`.
std::vector<Vec> initial_states(const GridAbstraction& a, const Box& bounds, const IndexSet& domain,
                                std::size_t count, std::uint64_t seed);

}  // namespace simrel
