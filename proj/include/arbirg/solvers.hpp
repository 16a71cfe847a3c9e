#pragma once

// Averaging randomized block iteratively regularized gradient (aRB-IRG),
// the two-loop sequential regularization (SR) baseline and the Tikhonov
// trajectory.

#include "arbirg/core.hpp"
#include "arbirg/metrics.hpp"
#include "arbirg/problem.hpp"
#include "arbirg/trace.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace arbirg {

enum class Regularizer {
    Objective, // F + eta grad f
    Identity,  // F + eta I
    Auto       // Objective when f is strongly convex, else Identity
};

std::string to_string(Regularizer reg);
Regularizer parse_regularizer(const std::string& text);
/// Resolves Auto against the problem constants.
Regularizer resolve(Regularizer reg, const ProblemSpec& problem);

/*
 * G_eta(x) = F(x) + eta * R(x), with R = subgradient of f or the identity.
 */
class RegularizedMap {
public:
    RegularizedMap(const ProblemSpec& problem, double eta, Regularizer reg = Regularizer::Objective);

    void eval(const Vector& x, Eigen::Ref<Vector> out) const;
    Vector eval(const Vector& x) const;
    void eval_block(const Vector& x, std::size_t block, Eigen::Ref<Vector> out) const;

    double eta() const { return eta_; }
    Regularizer regularizer() const { return reg_; }

    /// (mu, L) of the regularized map from the problem constants; faults when missing.
    std::pair<double, double> monotonicity_constants() const;

private:
    const ProblemSpec* problem_;
    double eta_;
    Regularizer reg_;
};

struct Budget {
    std::optional<std::uint64_t> max_iters;
    std::optional<double> max_full_evals;
    std::optional<double> max_wall_seconds;
};

struct MetricOptions {
    std::optional<GapEstimatorConfig> gap; // skipped when absent or X unbounded
    bool residual = true;
    bool record_wall_time = false;
};

struct RunOptions {
    Budget budget;
    std::uint64_t seed = 0;
    Cadence cadence;
    /// Explicit recording ticks (iterations for aRB-IRG, full evaluations for SR); overrides cadence.
    std::vector<std::uint64_t> checkpoints;
    MetricOptions metrics;
    std::optional<Vector> x0;
};

/// Initializes x_0 (projected normal draw unless given), xbar_0 = x_0, S_0 = gamma_0^r.
SolverState init_state(const ProblemSpec& problem, const Schedule& schedule, std::uint64_t seed,
                       const std::optional<Vector>& x0 = std::nullopt);

/*
 * One block update: draw i_k, replace block i_k by
 * P_{X_i}(x^(i) - gamma (F_i(x) + eta subgrad_i f(x))), leave the rest untouched.
 * Returns the sampled block. Throws std::runtime_error on a non-finite update.
 */
std::size_t arbirg_step(SolverState& state, const ProblemSpec& problem, double gamma, double eta);

RunTrace run_arbirg(const ProblemSpec& problem, const Schedule& schedule, const RunOptions& options);

/// Metrics of a point, as stored in traces.
TraceRecord evaluate_point(const ProblemSpec& problem, const Vector& point, const MetricOptions& metrics);

struct RegularizedSolve {
    Vector x;
    double residual = 0;
    std::uint64_t iterations = 0; // full map evaluations
    bool converged = false;
};

using IterateCallback = std::function<bool(const Vector& x, std::uint64_t iteration)>;

/*
 * Projection method x <- P_X(x - step G_eta(x)) with step = mu/L^2, stopped on
 * the natural residual ||x - P_X(x - G_eta(x))|| <= tol. The callback sees
 * every iterate and may stop the solve by returning false.
 */
RegularizedSolve solve_regularized_vi(const ProblemSpec& problem, double eta, double tol, std::uint64_t max_iters,
                                      Regularizer reg = Regularizer::Objective,
                                      const std::optional<Vector>& x0 = std::nullopt,
                                      const IterateCallback& on_iterate = {});

/*
 * Extragradient method with backtracking for monotone (not necessarily
 * strongly monotone) VI(X, F); stopped on the natural residual.
 */
RegularizedSolve solve_monotone_vi(const ProblemSpec& problem, double tol, std::uint64_t max_iters,
                                   const Vector& x0, double initial_step = 1.0);

/// x*_eta in SOL(X, F + eta grad f), f strongly convex.
Vector tikhonov_point(const ProblemSpec& problem, double eta, double tol, std::uint64_t max_iters = 1'000'000,
                      const std::optional<Vector>& warm_start = std::nullopt);

struct SrOptions {
    double eta0 = 1.0;
    double rho = 0.5;
    std::optional<std::uint64_t> outer_steps; // unlimited when absent
    Regularizer regularizer = Regularizer::Auto;
    double inner_tol_factor = 0.1; // tol_t = max(inner_tol_floor, factor * eta_t)
    double inner_tol_floor = 1e-8;
    std::uint64_t inner_max_iters = 100'000;
};

/*
 * Sequential regularization: solve VI(X, F + eta_t R) to tolerance with warm
 * starts and eta_{t+1} = rho eta_t. Records the current iterate against the
 * full-evaluation clock.
 */
RunTrace run_sr(const ProblemSpec& problem, const SrOptions& sr, const RunOptions& options);

} // namespace arbirg
