#pragma once

// Block-structured vectors, step-size/regularization schedules, block
// sampling and the weighted-averaging recursion shared by every solver.

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace arbirg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/*
 * Cartesian decomposition of R^n into d blocks with sampling probabilities.
 * Immutable after construction; shared between problems, states and traces.
 */
class BlockStructure {
public:
    BlockStructure(std::vector<Index> dims, std::vector<double> probs);

    /// Equal block sizes and uniform sampling.
    static BlockStructure uniform(std::size_t blocks, Index block_dim);
    /// Arbitrary block sizes, uniform sampling.
    static BlockStructure uniform(std::vector<Index> dims);

    std::size_t num_blocks() const { return dims_.size(); }
    Index dim() const { return total_; }
    Index block_dim(std::size_t i) const { return dims_[i]; }
    Index offset(std::size_t i) const { return offsets_[i]; }
    double prob(std::size_t i) const { return probs_[i]; }
    const std::vector<Index>& dims() const { return dims_; }
    const std::vector<double>& probs() const { return probs_; }
    double p_min() const { return p_min_; }
    double p_max() const { return p_max_; }

    auto segment(Vector& x, std::size_t i) const { return x.segment(offsets_[i], dims_[i]); }
    auto segment(const Vector& x, std::size_t i) const { return x.segment(offsets_[i], dims_[i]); }

    bool operator==(const BlockStructure& other) const
    {
        return dims_ == other.dims_ && probs_ == other.probs_;
    }

private:
    std::vector<Index> dims_;
    std::vector<double> probs_;
    std::vector<Index> offsets_;
    std::vector<double> cumulative_;
    Index total_ = 0;
    double p_min_ = 0;
    double p_max_ = 0;

    friend std::size_t sample_block(const BlockStructure&, Rng&);
};

using StructurePtr = std::shared_ptr<const BlockStructure>;

/*
 * Flat vector carrying its block decomposition.
 */
class BlockVector {
public:
    BlockVector() = default;
    BlockVector(StructurePtr structure, Vector data);
    static BlockVector zeros(StructurePtr structure);
    static BlockVector from_blocks(StructurePtr structure, const std::vector<Vector>& blocks);

    const BlockStructure& structure() const { return *structure_; }
    const StructurePtr& structure_ptr() const { return structure_; }
    const Vector& data() const { return data_; }
    Vector& data() { return data_; }
    Index size() const { return data_.size(); }

    auto block(std::size_t i) { return structure_->segment(data_, i); }
    auto block(std::size_t i) const { return structure_->segment(data_, i); }
    std::vector<Vector> blocks() const;

private:
    StructurePtr structure_;
    Vector data_;
};

enum class ScheduleMode { BoundedX, UnboundedX };

/*
 * gamma_k = gamma0 (k+1)^{-a},  eta_k = eta0 (k+1)^{-b}, averaging weight gamma_k^r.
 */
struct Schedule {
    double gamma0 = 1.0;
    double eta0 = 1.0;
    double a = 0.5;
    double b = 0.25;
    double r = 0.0;
    ScheduleMode mode = ScheduleMode::BoundedX;
};

struct ScheduleReport {
    bool accepted = true;
    std::vector<std::string> violations;
};

double stepsize(const Schedule& schedule, std::uint64_t k);
double regparam(const Schedule& schedule, std::uint64_t k);
ScheduleReport validate_schedule(const Schedule& schedule);

std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& text);

/// Inverse-CDF draw of a block index in [0, d).
std::size_t sample_block(const BlockStructure& structure, Rng& rng);

/// sum_i p_i^{-1} ||x^(i) - y^(i)||^2
double block_distance(const BlockStructure& structure, const Vector& x, const Vector& y);
double block_distance(const BlockVector& x, const BlockVector& y);

/// Stable 64-bit mixing of a seed with stream identifiers (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);
std::uint64_t hash_string(const std::string& text);

/*
 * Running weighted average xbar_k = sum_j gamma_j^r x_j / S_k with S_k = sum_j gamma_j^r.
 */
struct WeightedAverage {
    Vector xbar;
    double weight_sum = 0.0;

    WeightedAverage() = default;
    WeightedAverage(const Vector& x0, double gamma0, double r);
};

void update_average(WeightedAverage& avg, const Vector& x_next, double gamma_next, double r);

/*
 * Mutable state of a single aRB-IRG run.
 */
struct SolverState {
    std::uint64_t k = 0;
    BlockVector x;
    WeightedAverage average;
    Rng rng;
    std::uint64_t block_evals = 0;
    Vector work_map;
    Vector work_sub;

    const Vector& xbar() const { return average.xbar; }
    double weight_sum() const { return average.weight_sum; }
};

} // namespace arbirg
