#pragma once

// Problem model: minimize f(x) subject to x in SOL(X, F) with X = X_1 x ... x X_d.

#include "arbirg/core.hpp"
#include "arbirg/sets.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace arbirg {

/// Writes a block of a mapping (F_i or a subgradient block) into `out`.
using BlockEvaluator = std::function<void(const Vector& x, std::size_t block, Eigen::Ref<Vector> out)>;
using ScalarEvaluator = std::function<double(const Vector& x)>;
/// out = J_F(y)^T v
using VjpEvaluator = std::function<void(const Vector& y, const Vector& v, Eigen::Ref<Vector> out)>;

/*
 * Known problem constants. Any of them may be missing; consumers that need a
 * constant fault with the list of missing names.
 */
struct ProblemConstants {
    std::optional<double> C_F;  // sup ||F(x)|| over X
    std::optional<double> C_f;  // sup ||subgradient f(x)|| over X
    std::optional<double> M;    // sup ||x|| over X
    std::optional<double> mu_f; // strong convexity of f
    std::optional<double> mu_F; // strong monotonicity of F (0 when merely monotone)
    std::optional<double> L_F;  // Lipschitz constant of F
    std::optional<double> B_F;
    std::optional<double> L_f;  // Lipschitz constant of grad f
    bool estimated = false;     // true when C_F / C_f come from sampling
};

struct ProblemSpec {
    std::string id;
    StructurePtr structure;
    std::vector<SetDescriptor> sets;
    BlockEvaluator map_block;
    ScalarEvaluator objective;
    BlockEvaluator subgrad_block;
    VjpEvaluator map_vjp; // optional
    ProblemConstants constants;
    std::optional<Vector> known_solution;
    std::optional<double> known_optimal_value;

    std::size_t num_blocks() const { return structure->num_blocks(); }
    Index dim() const { return structure->dim(); }

    /// Full F(x), assembled block by block.
    Vector map(const Vector& x) const;
    void map(const Vector& x, Eigen::Ref<Vector> out) const;
    Vector subgradient(const Vector& x) const;
    void subgradient(const Vector& x, Eigen::Ref<Vector> out) const;
    double f(const Vector& x) const { return objective(x); }

    Vector project(const Vector& v) const;
    void project_block(std::size_t block, Eigen::Ref<Vector> v) const;
    bool contains(const Vector& x, double tol = kDefaultContainsTol) const;
    bool bounded() const;
    /// sup ||x|| over X from the block sets.
    double max_norm() const;
    Vector sample_feasible(Rng& rng) const;

    /// Throws std::invalid_argument when the block/set layout is inconsistent.
    void validate() const;
};

/// Default starting point: projection of a standard normal draw onto X.
Vector random_initial_point(const ProblemSpec& problem, Rng& rng);

} // namespace arbirg
