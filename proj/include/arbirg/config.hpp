#pragma once

// Experiment configuration: a plain text file of `key = value` lines grouped
// in [sections]. See README.md for the grammar and the list of keys.

#include "arbirg/core.hpp"
#include "arbirg/metrics.hpp"
#include "arbirg/solvers.hpp"
#include "arbirg/trace.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arbirg {

struct ProblemConfig {
    std::string type;
    std::map<std::string, std::string> params;
};

/// One (gamma0, eta0) pair; every solver in the experiment runs in every cell.
struct CellConfig {
    std::string id;
    double gamma0 = 0.1;
    double eta0 = 0.1;
};

struct ArbirgConfig {
    bool enabled = true;
    std::vector<double> r{0.0};
    double a = 0.5;
    double b = 0.25;
    ScheduleMode mode = ScheduleMode::BoundedX;
};

struct SrConfig {
    bool enabled = true;
    SrOptions options; // eta0 is overwritten by the cell
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::size_t replications = 25;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
    std::string output_dir = "out";
    bool record_wall_time = false;
    bool svg = false;

    ProblemConfig problem;
    double full_evals = 0.0; // budget in full-map equivalents, shared by all solvers
    std::optional<double> wall_seconds;
    Cadence cadence;
    std::optional<GapEstimatorConfig> gap = GapEstimatorConfig{};
    bool residual = true;

    std::vector<CellConfig> cells;
    ArbirgConfig arbirg;
    SrConfig sr;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws std::invalid_argument listing every problem found.
void validate(const ExperimentConfig& config);

/// Schedule of an aRB-IRG curve in a cell.
Schedule cell_schedule(const ExperimentConfig& config, const CellConfig& cell, double r);

/// Solver labels in output files: "arbirg_r<r>" and "sr".
std::string arbirg_label(double r);

} // namespace arbirg
