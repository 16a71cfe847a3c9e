#pragma once

// Infeasibility and suboptimality metrics, evaluators for the rate bounds of
// the averaged iterate, and diagnostics for the randomized block error terms.

#include "arbirg/core.hpp"
#include "arbirg/problem.hpp"
#include "arbirg/trace.hpp"

#include <cstdint>
#include <span>

namespace arbirg {

/*
 * Budget of the dual gap estimator. The estimate is the best value of
 * psi(y) = F(y)^T (x - y) seen over random feasible probes and projected
 * ascent runs, so it is always a lower bound on sup_{y in X} psi(y).
 */
struct GapEstimatorConfig {
    std::size_t n_samples = 2000;
    std::size_t n_restarts = 8;
    std::size_t ascent_iters = 200;
    double ascent_step = 1e-2;
    std::uint64_t seed = 0;
};

void validate(const GapEstimatorConfig& cfg);

/// Lower bound on GAP(x); requires bounded X.
double dual_gap_estimate(const ProblemSpec& problem, const Vector& x, const GapEstimatorConfig& cfg);

/// ||x - P_X(x - F(x))||
double natural_residual(const ProblemSpec& problem, const Vector& x);

/// f(x) - f(x*); requires a known optimal value or known solution.
double suboptimality(const ProblemSpec& problem, const Vector& x);
double reference_value(const ProblemSpec& problem);

struct BoundConstants {
    double M = 0;
    double C_F = 0;
    double C_f = 0;
    double p_min = 1;
};

/// Reads M, C_F, C_f and p_min from the problem; faults listing missing names.
BoundConstants bound_constants(const ProblemSpec& problem);

struct RateBounds {
    double subopt_bound;
    double gap_bound;
};

/// Smallest N with N >= 2^{2/(1-r)} - 1.
std::uint64_t bound_threshold(double r);

/*
 * Right-hand sides of the suboptimality and gap rate bounds for
 * gamma_k = gamma0/sqrt(k+1), eta_k = eta0/(k+1)^b.
 */
RateBounds rate_bounds(const BoundConstants& c, const Schedule& schedule, std::uint64_t N);

struct ErrorMoments {
    Vector mean_Delta;
    Vector mean_delta;
    double msq_Delta = 0;
    double msq_delta = 0;
    // standard error of the vector sample means: sqrt(trace(Cov) / n)
    double se_Delta = 0;
    double se_delta = 0;
};

/*
 * Monte Carlo moments of Delta = F(x) - p_i^{-1} E_i F_i(x) and the
 * analogous delta for the subgradient, with i drawn from the block law.
 */
ErrorMoments rb_error_moments(const ProblemSpec& problem, const Vector& x, std::size_t n_draws, Rng& rng);

struct HarmonicCheck {
    double sum;
    double lower;
    double upper;
    bool ok;
};

/// sum_{k=0}^{N} (k+1)^{-alpha} against (N+1)^{1-alpha}/(2(1-alpha)) and (N+1)^{1-alpha}/(1-alpha).
HarmonicCheck harmonic_bounds_check(double alpha, std::uint64_t N);
std::uint64_t harmonic_threshold(double alpha);

/*
 * Least-squares slope of log(value) against log(N + 1) over the trailing
 * `window` fraction of points. Nonpositive values are dropped; fewer than
 * 10 remaining points is a fault.
 */
double fit_log_slope(std::span<const double> N, std::span<const double> values, double window);
double rate_slope(const RunTrace& trace, MetricField field, double window);

} // namespace arbirg
