#include "arbirg/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arbirg {

void RunTrace::set_meta(const std::string& key, const std::string& value)
{
    for (auto& [k, v] : metadata) {
        if (k == key) {
            v = value;
            return;
        }
    }
    metadata.emplace_back(key, value);
}

std::optional<std::string> RunTrace::meta(const std::string& key) const
{
    for (const auto& [k, v] : metadata) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::optional<double> field_value(const TraceRecord& record, MetricField field)
{
    switch (field) {
    case MetricField::FValue:
        return record.f_value;
    case MetricField::GapEstimate:
        return record.gap_estimate;
    case MetricField::NaturalResidual:
        return record.natural_residual;
    case MetricField::DistToSolution:
        return record.dist_to_solution;
    }
    return std::nullopt;
}

MetricField parse_metric_field(const std::string& name)
{
    if (name == "f_value") return MetricField::FValue;
    if (name == "gap_estimate") return MetricField::GapEstimate;
    if (name == "natural_residual") return MetricField::NaturalResidual;
    if (name == "dist_to_xstar") return MetricField::DistToSolution;
    throw std::invalid_argument("unknown metric field '" + name + "'");
}

std::vector<std::uint64_t> checkpoints(const Cadence& cadence, std::uint64_t horizon)
{
    std::vector<std::uint64_t> out;
    if (horizon == 0) return out;
    switch (cadence.spacing) {
    case Cadence::Spacing::Every: {
        const auto step = std::max<std::uint64_t>(cadence.interval, 1);
        for (std::uint64_t t = step; t <= horizon; t += step) out.push_back(t);
        if (out.empty() || out.back() != horizon) out.push_back(horizon);
        break;
    }
    case Cadence::Spacing::Uniform: {
        const auto points = std::max<std::size_t>(cadence.points, 1);
        const auto step = (horizon + points - 1) / points;
        for (std::uint64_t t = step; t < horizon; t += step) out.push_back(t);
        out.push_back(horizon);
        break;
    }
    case Cadence::Spacing::Log: {
        const auto points = std::max<std::size_t>(cadence.points, 2);
        const double top = std::log(static_cast<double>(horizon));
        for (std::size_t j = 0; j < points; ++j) {
            const double e = top * static_cast<double>(j) / static_cast<double>(points - 1);
            const auto t = static_cast<std::uint64_t>(std::llround(std::exp(e)));
            const auto clamped = std::clamp<std::uint64_t>(t, 1, horizon);
            if (out.empty() || clamped > out.back()) out.push_back(clamped);
        }
        if (out.back() != horizon) out.push_back(horizon);
        break;
    }
    }
    return out;
}

Cadence::Spacing parse_spacing(const std::string& text)
{
    if (text == "every") return Cadence::Spacing::Every;
    if (text == "uniform") return Cadence::Spacing::Uniform;
    if (text == "log") return Cadence::Spacing::Log;
    throw std::invalid_argument("unknown cadence spacing '" + text + "'");
}

std::string to_string(Cadence::Spacing spacing)
{
    switch (spacing) {
    case Cadence::Spacing::Every:
        return "every";
    case Cadence::Spacing::Uniform:
        return "uniform";
    case Cadence::Spacing::Log:
        return "log";
    }
    return "uniform";
}

} // namespace arbirg
