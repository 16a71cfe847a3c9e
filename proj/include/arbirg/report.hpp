#pragma once

// CSV files, comparison and bound-check tables, SVG charts.

#include "arbirg/config.hpp"
#include "arbirg/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace arbirg {

/// %.17g, or NA when absent.
std::string format_value(std::optional<double> value);

void write_run_csv(std::ostream& out, const RunResult& run);
std::string run_csv_name(const RunResult& run);

void write_aggregate_csv(std::ostream& out, const std::vector<Curve>& curves);
std::vector<Curve> read_aggregate_csv(const std::filesystem::path& path);

/// Linear interpolation of a curve column onto an evaluation grid (nullopt outside the curve).
std::vector<std::optional<double>> resample(const Curve& curve, std::size_t column, const std::vector<double>& grid);

/// (max - min) / |mean| of the mean objective over the trailing fraction of the budget axis.
double relative_oscillation(const Curve& curve, double trailing = 0.2);

struct CompareRow {
    std::string cell;
    std::string solver;   // the aRB-IRG curve
    std::string baseline; // the SR curve
    std::string metric;   // gap_estimate, or natural_residual when no gap was recorded
    double final_metric = 0;
    double final_metric_baseline = 0;
    double final_f = 0;
    double final_f_baseline = 0;
    double area_log_metric = 0; // mean of ln(metric) over the common budget axis
    double area_log_metric_baseline = 0;
    double ratio = 0;           // final_metric / final_metric_baseline
    bool dominates = false;     // strictly below the baseline over the trailing 50% of the axis
    double oscillation = 0;     // relative_oscillation of the aRB-IRG curve
};

/*
 * One row per aRB-IRG curve and cell against the SR curve of the same cell.
 * Axes that differ are resampled onto the coarser of the two grids.
 */
std::vector<CompareRow> compare_report(const std::vector<Curve>& curves);
void print_compare(std::ostream& out, const std::vector<CompareRow>& rows);

struct BoundRow {
    std::string cell;
    std::string solver;
    double r = 0;
    std::uint64_t N = 0;
    double subopt_mean = 0;
    double subopt_stderr = 0;
    double subopt_bound = 0;
    bool subopt_violation = false;
    std::optional<double> gap_mean;
    std::optional<double> gap_stderr;
    double gap_bound = 0;
    bool gap_violation = false;
};

/*
 * Sample-mean suboptimality and gap next to the rate bounds at every recorded
 * N at or past the threshold. A violation is mean - 3 stderr > bound. Faults
 * when the problem lacks f* or any of M, C_F, C_f.
 */
std::vector<BoundRow> bound_check_report(const std::vector<Curve>& curves, const ProblemSpec& problem,
                                         const ExperimentConfig& config);
void print_bounds(std::ostream& out, const std::vector<BoundRow>& rows);

/// Self-contained line chart with a log-scale y axis; non-positive values are dropped.
std::string svg_chart(const std::string& title, const std::string& y_label, const std::vector<const Curve*>& curves,
                      std::size_t column);

} // namespace arbirg
