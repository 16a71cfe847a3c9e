#pragma once

// Replicated solver comparisons: problem construction from a config, the run
// pool, per-record aggregation and the diagnostic suites behind `arbirg diag`.

#include "arbirg/config.hpp"
#include "arbirg/problem.hpp"
#include "arbirg/trace.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace arbirg {

/// Builds the problem named in the [problem] section. Unknown keys are faults.
ProblemSpec build_problem(const ProblemConfig& config);

/// seed of replication j in a cell: derive_seed(master, hash_string(cell), j)
std::uint64_t replication_seed(std::uint64_t master, const std::string& cell, std::size_t replication);

struct RunResult {
    std::string solver;
    std::string cell;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    RunTrace trace;
};

// Metric columns shared by per-run and aggregate files, in file order.
inline constexpr std::array<const char*, 5> kMetricColumns{
    "wall_ms", "f_value", "gap_estimate", "natural_residual", "dist_to_xstar"};
inline constexpr std::size_t kMetricCount = kMetricColumns.size();

std::array<std::optional<double>, kMetricCount> metric_values(const TraceRecord& record);

struct CurvePoint {
    std::uint64_t k = 0;
    double evals = 0.0;
    std::size_t count = 0; // runs contributing to this point
    std::array<std::optional<double>, kMetricCount> mean;
    std::array<std::optional<double>, kMetricCount> stderr_;
};

/// Sample mean and standard error of a (solver, cell) group, record by record.
struct Curve {
    std::string solver;
    std::string cell;
    std::vector<CurvePoint> points;

    std::optional<std::size_t> column(const std::string& metric) const;
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::vector<Curve> curves;
};

/*
 * Runs every (cell, solver, replication) with derived seeds on `workers`
 * threads and aggregates. Runs that throw are kept as aborted traces with the
 * message as diagnostic.
 */
ExperimentResult run_experiment(const ExperimentConfig& config, const ProblemSpec& problem);

/// Groups runs by (solver, cell) in first-seen order; points are aligned by record index.
std::vector<Curve> aggregate(const std::vector<RunResult>& runs);

/*
 * Writes runs/<cell>__<solver>__rep<j>.csv, aggregate.csv, aborts.csv,
 * manifest.txt and, when config.svg is set, one SVG chart per cell and metric.
 */
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::filesystem::path& dir);

struct DiagnosticResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Block-sampling error moments, harmonic sums and Tikhonov differences.
std::vector<DiagnosticResult> run_diagnostics(std::uint64_t seed, std::size_t draws = 100'000);

} // namespace arbirg
