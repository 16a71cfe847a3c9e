#pragma once

// Constructors for the problem families: the networked Nash-Cournot game,
// penalized convex programs, complementarity problems and synthetic
// instances with exactly known solutions.

#include "arbirg/problem.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace arbirg {

// ---------------------------------------------------------------------------
// Networked Nash-Cournot competition
// ---------------------------------------------------------------------------

/*
 * d firms over J nodes. Firm i chooses generation y_ij and sales s_ij with
 * linear cost c_ij y_ij and inverse demand p_j(sbar_j) = alpha_j - beta_j sbar_j^sigma.
 */
struct CournotParams {
    std::size_t firms = 0; // d
    std::size_t nodes = 0; // J
    Matrix cost_slopes;    // d x J
    Vector alpha;          // J
    Vector beta;           // J
    Matrix caps;           // d x J
    double sigma = 1.0;
};

/// Throws std::invalid_argument on bad data or when F may fail to be monotone.
void validate(const CournotParams& params);

/*
 * Blocks x^(i) = (y_i; s_i) in the balanced box, F_i = grad_{x^(i)} g_i and
 * f = sum_i g_i (Marshallian aggregate surplus).
 */
ProblemSpec build_cournot(const CournotParams& params);

/// 4 firms, 3 nodes, alpha = 50, beta = 0.05, caps = 120, sigma = 1.01,
/// cost slopes uniform on [10, 50] drawn from `seed`.
CournotParams benchmark_cournot_params(std::uint64_t seed);
ProblemSpec benchmark_cournot_instance(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Penalized convex programs: {Ax = b, h_j(x) <= 0} intersected with X
// ---------------------------------------------------------------------------

struct ConvexConstraint {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

/// F(x) = A^T (Ax - b) + sum_j max(0, h_j(x)) grad h_j(x)
Vector penalized_map(const Matrix& A, const Vector& b, const std::vector<ConvexConstraint>& h, const Vector& x);

/// phi(x) = 0.5 ||Ax - b||^2 + 0.5 sum_j max(0, h_j(x))^2, whose gradient is the penalized map.
double penalized_potential(const Matrix& A, const Vector& b, const std::vector<ConvexConstraint>& h, const Vector& x);

/*
 * VI(X, F) with the penalized map. Its solution set is the feasible set of
 * the program whenever that set is nonempty. The objective defaults to zero;
 * callers attach their own f.
 */
ProblemSpec build_penalized_program(const Matrix& A, const Vector& b, std::vector<ConvexConstraint> h,
                                    StructurePtr structure, std::vector<SetDescriptor> sets);

// ---------------------------------------------------------------------------
// Complementarity problems
// ---------------------------------------------------------------------------

using FullMap = std::function<Vector(const Vector&)>;

/*
 * x >= 0, F(x) >= 0, x^T F(x) = 0 posed as VI(R^n_+, F). The objective
 * defaults to 0.5 ||x||^2.
 */
ProblemSpec build_lcp(FullMap F, Index n, StructurePtr structure = nullptr);

/*
 * Solutions of the symmetric monotone affine LCP(q, Q), Q symmetric PSD.
 * `one_solution` finds some solution by support enumeration; `select` returns
 * argmin ||x - c|| over the whole solution set, which is the polyhedron
 * {x >= 0 : Qx = Q xhat, q^T x = q^T xhat}.
 */
struct AffineLcp {
    static Vector one_solution(const Matrix& Q, const Vector& q, double tol = 1e-9);
    static Vector select(const Matrix& Q, const Vector& q, const Vector& c, double tol = 1e-9);
};

// ---------------------------------------------------------------------------
// Synthetic instances with known solutions
// ---------------------------------------------------------------------------

struct L1Reference {
    double value;
    Vector solution;
};

/// min ||x||_1 over {Ax = b, lower <= x <= upper} by vertex enumeration (A full row rank).
L1Reference l1_affine_box_reference(const Matrix& A, const Vector& b, const Vector& lower, const Vector& upper);

/*
 * f(x) = ||x||_1 with subgradient sign(x) (0 at kinks), F(x) = A^T (Ax - b),
 * X = box. SOL(X, F) = {Ax = b} cap box when nonempty.
 */
ProblemSpec build_l1_over_affine_box(const Matrix& A, const Vector& b, const Vector& lower, const Vector& upper,
                                     StructurePtr structure);

/*
 * F(x) = Qx + q, f(x) = 0.5 ||x - c||^2 on arbitrary block sets. No known
 * solution is attached.
 */
ProblemSpec build_affine_quadratic(const Matrix& Q, const Vector& q, const Vector& c, StructurePtr structure,
                                   std::vector<SetDescriptor> sets);

/// build_affine_quadratic on R^n_+ with x* from AffineLcp::select. Q symmetric PSD.
ProblemSpec build_strongly_convex_unbounded(const Matrix& Q, const Vector& q, const Vector& c,
                                            StructurePtr structure = nullptr);

// ---------------------------------------------------------------------------
// Seeded generators for the synthetic families
// ---------------------------------------------------------------------------

struct SyntheticL1Params {
    Index n = 8;
    Index m = 3;
    std::size_t blocks = 4;
    double box = 1.0;          // X = [-box, box]^n
    double target_scale = 0.5; // b = A xhat with xhat uniform in [-scale, scale]^n
    std::uint64_t seed = 7;
};

/// Gaussian A (m x n), feasible right-hand side, equal blocks.
ProblemSpec synthetic_l1_instance(const SyntheticL1Params& params);

struct SyntheticUnboundedParams {
    Index n = 6;
    std::size_t blocks = 3;
    double coupling = 0.5; // Q = I + coupling^2 G^T G with G standard normal
    std::uint64_t seed = 3;
};

/*
 * Q positive definite, so SOL(X, F) is the single point xhat. About 40% of the
 * coordinates of xhat sit at zero with strictly positive F (nondegenerate).
 */
ProblemSpec synthetic_unbounded_instance(const SyntheticUnboundedParams& params);

} // namespace arbirg
