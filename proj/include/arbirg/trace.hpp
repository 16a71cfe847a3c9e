#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace arbirg {

struct TraceRecord {
    std::uint64_t k = 0;          // iteration index N of the reported point
    double evals_full = 0.0;      // full-map-equivalent evaluations spent
    std::optional<double> wall_ms;
    double f_value = 0.0;
    std::optional<double> gap_estimate;
    std::optional<double> natural_residual;
    std::optional<double> dist_to_solution;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    std::vector<std::pair<std::string, std::string>> metadata;
    bool aborted = false;
    std::string diagnostic;

    void set_meta(const std::string& key, const std::string& value);
    std::optional<std::string> meta(const std::string& key) const;
};

enum class MetricField { FValue, GapEstimate, NaturalResidual, DistToSolution };

std::optional<double> field_value(const TraceRecord& record, MetricField field);
MetricField parse_metric_field(const std::string& name);

/*
 * Recording cadence. Every: each `interval` ticks. Uniform: `points` evenly
 * spaced ticks up to the horizon (ceil(j * T / points)). Log: `points`
 * geometrically spaced ticks in [1, T], duplicates removed.
 */
struct Cadence {
    enum class Spacing { Every, Uniform, Log };
    Spacing spacing = Spacing::Uniform;
    std::uint64_t interval = 1;
    std::size_t points = 200;
};

std::vector<std::uint64_t> checkpoints(const Cadence& cadence, std::uint64_t horizon);
Cadence::Spacing parse_spacing(const std::string& text);
std::string to_string(Cadence::Spacing spacing);

} // namespace arbirg
