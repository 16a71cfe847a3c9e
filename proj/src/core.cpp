#include "arbirg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace arbirg {

BlockStructure::BlockStructure(std::vector<Index> dims, std::vector<double> probs)
    : dims_(std::move(dims)), probs_(std::move(probs))
{
    if (dims_.empty()) {
        throw std::invalid_argument("BlockStructure: at least one block is required");
    }
    if (dims_.size() != probs_.size()) {
        throw std::invalid_argument("BlockStructure: dims and probs differ in length");
    }
    double total_prob = 0.0;
    offsets_.reserve(dims_.size());
    cumulative_.reserve(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] < 1) {
            throw std::invalid_argument("BlockStructure: block dimensions must be positive");
        }
        if (!(probs_[i] > 0.0)) {
            throw std::invalid_argument("BlockStructure: sampling probabilities must be positive");
        }
        offsets_.push_back(total_);
        total_ += dims_[i];
        total_prob += probs_[i];
        cumulative_.push_back(total_prob);
    }
    if (std::abs(total_prob - 1.0) > 1e-12) {
        throw std::invalid_argument("BlockStructure: sampling probabilities must sum to one");
    }
    p_min_ = *std::min_element(probs_.begin(), probs_.end());
    p_max_ = *std::max_element(probs_.begin(), probs_.end());
}

BlockStructure BlockStructure::uniform(std::size_t blocks, Index block_dim)
{
    return uniform(std::vector<Index>(blocks, block_dim));
}

BlockStructure BlockStructure::uniform(std::vector<Index> dims)
{
    const auto d = dims.size();
    return BlockStructure(std::move(dims), std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

BlockVector::BlockVector(StructurePtr structure, Vector data)
    : structure_(std::move(structure)), data_(std::move(data))
{
    if (!structure_ || data_.size() != structure_->dim()) {
        throw std::invalid_argument("BlockVector: data length does not match block structure");
    }
}

BlockVector BlockVector::zeros(StructurePtr structure)
{
    const auto n = structure->dim();
    return BlockVector(std::move(structure), Vector::Zero(n));
}

BlockVector BlockVector::from_blocks(StructurePtr structure, const std::vector<Vector>& blocks)
{
    if (blocks.size() != structure->num_blocks()) {
        throw std::invalid_argument("BlockVector: wrong number of blocks");
    }
    Vector data(structure->dim());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].size() != structure->block_dim(i)) {
            throw std::invalid_argument("BlockVector: block dimension mismatch");
        }
        structure->segment(data, i) = blocks[i];
    }
    return BlockVector(std::move(structure), std::move(data));
}

std::vector<Vector> BlockVector::blocks() const
{
    std::vector<Vector> out;
    out.reserve(structure_->num_blocks());
    for (std::size_t i = 0; i < structure_->num_blocks(); ++i) {
        out.emplace_back(block(i));
    }
    return out;
}

double stepsize(const Schedule& schedule, std::uint64_t k)
{
    return schedule.gamma0 * std::pow(static_cast<double>(k) + 1.0, -schedule.a);
}

double regparam(const Schedule& schedule, std::uint64_t k)
{
    return schedule.eta0 * std::pow(static_cast<double>(k) + 1.0, -schedule.b);
}

ScheduleReport validate_schedule(const Schedule& s)
{
    ScheduleReport report;
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) {
            report.accepted = false;
            report.violations.push_back(what);
        }
    };
    require(s.gamma0 > 0.0, "gamma0 > 0");
    require(s.eta0 > 0.0, "eta0 > 0");
    require(s.r >= 0.0, "0 <= r");
    require(s.r < 1.0, "r < 1");
    if (s.mode == ScheduleMode::BoundedX) {
        require(s.a == 0.5, "a = 0.5");
        require(s.b > 0.0, "0 < b");
        require(s.b < 0.5, "b < 0.5");
    } else {
        require(s.b > 0.0, "0 < b");
        require(s.b < 0.5, "b < 0.5");
        require(s.a > 0.5, "0.5 < a");
        require(s.a + s.b < 1.0, "a + b < 1");
    }
    return report;
}

std::string to_string(ScheduleMode mode)
{
    return mode == ScheduleMode::BoundedX ? "bounded" : "unbounded";
}

ScheduleMode parse_schedule_mode(const std::string& text)
{
    if (text == "bounded") return ScheduleMode::BoundedX;
    if (text == "unbounded") return ScheduleMode::UnboundedX;
    throw std::invalid_argument("unknown schedule mode '" + text + "'");
}

std::size_t sample_block(const BlockStructure& structure, Rng& rng)
{
    const auto d = structure.num_blocks();
    if (d == 1) {
        return 0;
    }
    // scale by the last cumulative value so roundoff never leaves the range
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * structure.cumulative_.back();
    const auto it = std::upper_bound(structure.cumulative_.begin(), structure.cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - structure.cumulative_.begin()), d - 1);
}

double block_distance(const BlockStructure& structure, const Vector& x, const Vector& y)
{
    if (x.size() != structure.dim() || y.size() != structure.dim()) {
        throw std::invalid_argument("block_distance: vectors do not match block structure");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < structure.num_blocks(); ++i) {
        total += (structure.segment(x, i) - structure.segment(y, i)).squaredNorm() / structure.prob(i);
    }
    return total;
}

double block_distance(const BlockVector& x, const BlockVector& y)
{
    if (!(x.structure() == y.structure())) {
        throw std::invalid_argument("block_distance: block structures differ");
    }
    return block_distance(x.structure(), x.data(), y.data());
}

namespace {

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ index);
    return h;
}

std::uint64_t hash_string(const std::string& text)
{
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

WeightedAverage::WeightedAverage(const Vector& x0, double gamma0, double r)
    : xbar(x0), weight_sum(std::pow(gamma0, r))
{
}

void update_average(WeightedAverage& avg, const Vector& x_next, double gamma_next, double r)
{
    const double w = std::pow(gamma_next, r);
    const double s_next = avg.weight_sum + w;
    avg.xbar = (avg.weight_sum * avg.xbar + w * x_next) / s_next;
    avg.weight_sum = s_next;
}

} // namespace arbirg
