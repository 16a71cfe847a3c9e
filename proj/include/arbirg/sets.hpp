#pragma once

// Euclidean projections and membership tests for the block sets used by the
// problem families: boxes, the nonnegative orthant, the whole space, balls and
// the balanced generation/sales polytope of the network Cournot model.

#include "arbirg/core.hpp"

#include <string>
#include <utility>
#include <variant>

namespace arbirg {

inline constexpr double kDefaultContainsTol = 1e-9;

struct Box {
    Vector lower;
    Vector upper;
};
struct NonnegOrthant {};
struct WholeSpace {};
struct Ball {
    Vector center;
    double radius = 1.0;
};
/// {(y, s) in R^J x R^J : sum y = sum s, 0 <= y <= caps, s >= 0}, stored as (y; s).
struct BalancedBox {
    Vector caps;
};

class SetDescriptor {
public:
    using Kind = std::variant<Box, NonnegOrthant, WholeSpace, Ball, BalancedBox>;

    static SetDescriptor box(Vector lower, Vector upper);
    static SetDescriptor box(Index dim, double lower, double upper);
    static SetDescriptor nonneg_orthant(Index dim);
    static SetDescriptor whole_space(Index dim);
    static SetDescriptor ball(Vector center, double radius);
    static SetDescriptor balanced_box(Vector caps);

    const Kind& kind() const { return kind_; }
    Index dim() const { return dim_; }
    bool bounded() const;
    std::string name() const;

    /// Largest Euclidean norm attained on the set; +inf when unbounded.
    double max_norm() const;

private:
    SetDescriptor(Kind kind, Index dim) : kind_(std::move(kind)), dim_(dim) {}

    Kind kind_;
    Index dim_ = 0;
};

Vector project(const SetDescriptor& set, const Vector& v);
void project_inplace(const SetDescriptor& set, Eigen::Ref<Vector> v);

/*
 * Projection onto the balanced box through its scalar dual. With
 *   y_j(l) = clamp(y0_j - l, 0, B_j),  s_j(l) = max(s0_j + l, 0),
 * g(l) = sum y(l) - sum s(l) is continuous, nonincreasing and piecewise linear
 * with breakpoints {y0_j, y0_j - B_j, -s0_j}; the root is found exactly on
 * the sorted breakpoints.
 */
std::pair<Vector, Vector> project_balanced(const Vector& caps, const Vector& y0, const Vector& s0);

bool contains(const SetDescriptor& set, const Vector& v, double tol = kDefaultContainsTol);

/// Full-support random feasible point (bounded sets only).
Vector sample_feasible(const SetDescriptor& set, Rng& rng);

} // namespace arbirg
