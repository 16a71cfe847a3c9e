#include "arbirg/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace arbirg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(double v)
{
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

void describe_gap(RunTrace& trace, const MetricOptions& metrics)
{
    if (!metrics.gap) {
        trace.set_meta("gap_estimator", "off");
        return;
    }
    const auto& g = *metrics.gap;
    std::ostringstream out;
    out << "samples=" << g.n_samples << ";restarts=" << g.n_restarts << ";ascent_iters=" << g.ascent_iters
        << ";ascent_step=" << g.ascent_step << ";seed=" << g.seed;
    trace.set_meta("gap_estimator", out.str());
}

} // namespace

std::string to_string(Regularizer reg)
{
    switch (reg) {
    case Regularizer::Objective:
        return "objective";
    case Regularizer::Identity:
        return "identity";
    case Regularizer::Auto:
        return "auto";
    }
    return "auto";
}

Regularizer parse_regularizer(const std::string& text)
{
    if (text == "objective") return Regularizer::Objective;
    if (text == "identity") return Regularizer::Identity;
    if (text == "auto") return Regularizer::Auto;
    throw std::invalid_argument("unknown regularizer '" + text + "'");
}

Regularizer resolve(Regularizer reg, const ProblemSpec& problem)
{
    if (reg != Regularizer::Auto) return reg;
    const auto& c = problem.constants;
    return (c.mu_f && *c.mu_f > 0.0 && c.L_f) ? Regularizer::Objective : Regularizer::Identity;
}

// ---------------------------------------------------------------------------
// Regularized map
// ---------------------------------------------------------------------------

RegularizedMap::RegularizedMap(const ProblemSpec& problem, double eta, Regularizer reg)
    : problem_(&problem), eta_(eta), reg_(resolve(reg, problem))
{
    if (!(eta > 0.0)) throw std::invalid_argument("RegularizedMap: eta must be positive");
}

void RegularizedMap::eval(const Vector& x, Eigen::Ref<Vector> out) const
{
    problem_->map(x, out);
    if (reg_ == Regularizer::Identity) {
        out += eta_ * x;
    } else {
        out += eta_ * problem_->subgradient(x);
    }
}

Vector RegularizedMap::eval(const Vector& x) const
{
    Vector out(x.size());
    eval(x, out);
    return out;
}

void RegularizedMap::eval_block(const Vector& x, std::size_t block, Eigen::Ref<Vector> out) const
{
    problem_->map_block(x, block, out);
    if (reg_ == Regularizer::Identity) {
        out += eta_ * problem_->structure->segment(x, block);
    } else {
        Vector g(out.size());
        problem_->subgrad_block(x, block, g);
        out += eta_ * g;
    }
}

std::pair<double, double> RegularizedMap::monotonicity_constants() const
{
    const auto& c = problem_->constants;
    if (!c.L_F) throw std::invalid_argument("regularized map: Lipschitz constant L_F is unknown");
    const double mu_F = c.mu_F.value_or(0.0);
    if (reg_ == Regularizer::Identity) {
        return {mu_F + eta_, *c.L_F + eta_};
    }
    if (!c.mu_f || !c.L_f) throw std::invalid_argument("regularized map: mu_f and L_f are required");
    return {mu_F + eta_ * *c.mu_f, *c.L_F + eta_ * *c.L_f};
}

// ---------------------------------------------------------------------------
// aRB-IRG
// ---------------------------------------------------------------------------

SolverState init_state(const ProblemSpec& problem, const Schedule& schedule, std::uint64_t seed,
                       const std::optional<Vector>& x0)
{
    SolverState state;
    state.rng.seed(seed);
    Vector start = x0 ? problem.project(*x0) : random_initial_point(problem, state.rng);
    state.x = BlockVector(problem.structure, std::move(start));
    state.average = WeightedAverage(state.x.data(), stepsize(schedule, 0), schedule.r);
    return state;
}

std::size_t arbirg_step(SolverState& state, const ProblemSpec& problem, double gamma, double eta)
{
    const auto& st = *problem.structure;
    const std::size_t i = sample_block(st, state.rng);
    const Index nb = st.block_dim(i);
    state.work_map.resize(nb);
    state.work_sub.resize(nb);
    problem.map_block(state.x.data(), i, state.work_map);
    problem.subgrad_block(state.x.data(), i, state.work_sub);
    state.work_map = state.x.block(i) - gamma * (state.work_map + eta * state.work_sub);
    problem.project_block(i, state.work_map);
    if (!state.work_map.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite update of block " << i << " at iteration " << state.k;
        throw std::runtime_error(msg.str());
    }
    state.x.block(i) = state.work_map;
    ++state.block_evals;
    ++state.k;
    return i;
}

TraceRecord evaluate_point(const ProblemSpec& problem, const Vector& point, const MetricOptions& metrics)
{
    TraceRecord rec;
    rec.f_value = problem.f(point);
    if (metrics.gap && problem.bounded()) rec.gap_estimate = dual_gap_estimate(problem, point, *metrics.gap);
    if (metrics.residual) rec.natural_residual = natural_residual(problem, point);
    if (problem.known_solution) rec.dist_to_solution = (point - *problem.known_solution).norm();
    return rec;
}

RunTrace run_arbirg(const ProblemSpec& problem, const Schedule& schedule, const RunOptions& options)
{
    problem.validate();
    const auto report = validate_schedule(schedule);
    if (!report.accepted) {
        std::ostringstream msg;
        msg << "run_arbirg: schedule rejected:";
        for (const auto& v : report.violations) msg << ' ' << v << ';';
        throw std::invalid_argument(msg.str());
    }
    const auto d = static_cast<double>(problem.num_blocks());
    const auto& budget = options.budget;
    std::uint64_t horizon = std::numeric_limits<std::uint64_t>::max();
    if (budget.max_iters) horizon = std::min(horizon, *budget.max_iters);
    if (budget.max_full_evals) {
        horizon = std::min(horizon, static_cast<std::uint64_t>(std::ceil(*budget.max_full_evals * d)));
    }
    if (!budget.max_iters && !budget.max_full_evals && !budget.max_wall_seconds) {
        throw std::invalid_argument("run_arbirg: a budget is required");
    }
    std::vector<std::uint64_t> ticks = options.checkpoints;
    if (ticks.empty()) {
        if (horizon == std::numeric_limits<std::uint64_t>::max() && options.cadence.spacing != Cadence::Spacing::Every) {
            throw std::invalid_argument("run_arbirg: wall-clock-only budgets need an 'every' cadence");
        }
        ticks = checkpoints(options.cadence, horizon);
    }

    RunTrace trace;
    trace.set_meta("solver", "arbirg");
    trace.set_meta("problem", problem.id);
    trace.set_meta("seed", std::to_string(options.seed));
    trace.set_meta("gamma0", fmt(schedule.gamma0));
    trace.set_meta("eta0", fmt(schedule.eta0));
    trace.set_meta("a", fmt(schedule.a));
    trace.set_meta("b", fmt(schedule.b));
    trace.set_meta("r", fmt(schedule.r));
    trace.set_meta("mode", to_string(schedule.mode));
    describe_gap(trace, options.metrics);

    SolverState state = init_state(problem, schedule, options.seed, options.x0);
    const auto start = Clock::now();
    std::size_t next = 0;
    for (std::uint64_t k = 0; k < horizon && next < ticks.size(); ++k) {
        try {
            arbirg_step(state, problem, stepsize(schedule, k), regparam(schedule, k));
        } catch (const std::runtime_error& err) {
            trace.aborted = true;
            trace.diagnostic = err.what();
            break;
        }
        update_average(state.average, state.x.data(), stepsize(schedule, k + 1), schedule.r);

        const std::uint64_t N = k + 1;
        if (N == ticks[next]) {
            TraceRecord rec = evaluate_point(problem, state.xbar(), options.metrics);
            rec.k = N;
            rec.evals_full = static_cast<double>(state.block_evals) / d;
            if (options.metrics.record_wall_time) rec.wall_ms = elapsed_ms(start);
            trace.records.push_back(rec);
            ++next;
            if (!std::isfinite(rec.f_value)) {
                trace.aborted = true;
                trace.diagnostic = "non-finite objective at iteration " + std::to_string(N);
                break;
            }
        }
        if (budget.max_wall_seconds && (N & 255U) == 0 && elapsed_ms(start) > *budget.max_wall_seconds * 1e3) {
            break;
        }
    }
    trace.set_meta("iterations", std::to_string(state.k));
    return trace;
}

// ---------------------------------------------------------------------------
// Inner solvers
// ---------------------------------------------------------------------------

RegularizedSolve solve_regularized_vi(const ProblemSpec& problem, double eta, double tol, std::uint64_t max_iters,
                                      Regularizer reg, const std::optional<Vector>& x0,
                                      const IterateCallback& on_iterate)
{
    const RegularizedMap G(problem, eta, reg);
    const auto [mu, L] = G.monotonicity_constants();
    if (!(mu > 0.0) || !(L > 0.0)) {
        throw std::invalid_argument("solve_regularized_vi: regularized map is not strongly monotone");
    }
    const double step = mu / (L * L);

    RegularizedSolve out;
    out.x = x0 ? problem.project(*x0) : problem.project(Vector::Zero(problem.dim()));
    Vector g(problem.dim());
    while (true) {
        G.eval(out.x, g);
        ++out.iterations;
        if (!g.allFinite()) {
            out.residual = std::numeric_limits<double>::infinity();
            return out;
        }
        out.residual = (out.x - problem.project(out.x - g)).norm();
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }
        if (out.iterations >= max_iters) return out;
        out.x = problem.project(out.x - step * g);
        if (on_iterate && !on_iterate(out.x, out.iterations)) return out;
    }
}

RegularizedSolve solve_monotone_vi(const ProblemSpec& problem, double tol, std::uint64_t max_iters, const Vector& x0,
                                   double initial_step)
{
    RegularizedSolve out;
    out.x = problem.project(x0);
    double step = initial_step;
    Vector Fx(problem.dim()), Fy(problem.dim()), y(problem.dim());
    while (true) {
        problem.map(out.x, Fx);
        ++out.iterations;
        out.residual = (out.x - problem.project(out.x - Fx)).norm();
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }
        if (out.iterations >= max_iters || !Fx.allFinite()) return out;
        while (true) {
            y = problem.project(out.x - step * Fx);
            problem.map(y, Fy);
            ++out.iterations;
            const double move = (y - out.x).norm();
            if (step * (Fy - Fx).norm() <= 0.9 * move || move == 0.0 || step < 1e-14) break;
            step *= 0.5;
        }
        out.x = problem.project(out.x - step * Fy);
        step = std::min(initial_step, step * 1.2);
    }
}

Vector tikhonov_point(const ProblemSpec& problem, double eta, double tol, std::uint64_t max_iters,
                      const std::optional<Vector>& warm_start)
{
    if (!problem.constants.mu_f || !(*problem.constants.mu_f > 0.0)) {
        throw std::invalid_argument("tikhonov_point: f must be strongly convex (mu_f > 0)");
    }
    const auto res = solve_regularized_vi(problem, eta, tol, max_iters, Regularizer::Objective, warm_start);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "tikhonov_point: no convergence at eta = " << eta << " (residual " << res.residual << ")";
        throw std::runtime_error(msg.str());
    }
    return res.x;
}

// ---------------------------------------------------------------------------
// Sequential regularization
// ---------------------------------------------------------------------------

RunTrace run_sr(const ProblemSpec& problem, const SrOptions& sr, const RunOptions& options)
{
    problem.validate();
    if (!(sr.eta0 > 0.0)) throw std::invalid_argument("run_sr: eta0 must be positive");
    if (!(sr.rho > 0.0 && sr.rho < 1.0)) throw std::invalid_argument("run_sr: rho must lie in (0, 1)");
    const Regularizer reg = resolve(sr.regularizer, problem);

    const auto& budget = options.budget;
    std::uint64_t horizon = std::numeric_limits<std::uint64_t>::max();
    if (budget.max_full_evals) horizon = static_cast<std::uint64_t>(std::ceil(*budget.max_full_evals));
    if (budget.max_iters) horizon = std::min(horizon, *budget.max_iters);
    if (!budget.max_iters && !budget.max_full_evals && !budget.max_wall_seconds) {
        throw std::invalid_argument("run_sr: a budget is required");
    }
    std::vector<std::uint64_t> ticks = options.checkpoints;
    if (ticks.empty()) {
        if (horizon == std::numeric_limits<std::uint64_t>::max() && options.cadence.spacing != Cadence::Spacing::Every) {
            throw std::invalid_argument("run_sr: wall-clock-only budgets need an 'every' cadence");
        }
        ticks = checkpoints(options.cadence, horizon);
    }

    RunTrace trace;
    trace.set_meta("solver", "sr");
    trace.set_meta("problem", problem.id);
    trace.set_meta("seed", std::to_string(options.seed));
    trace.set_meta("eta0", fmt(sr.eta0));
    trace.set_meta("rho", fmt(sr.rho));
    trace.set_meta("regularizer", to_string(reg));
    trace.set_meta("inner_method", "projection step=mu/L^2");
    trace.set_meta("inner_tol", "max(" + fmt(sr.inner_tol_floor) + ", " + fmt(sr.inner_tol_factor) + "*eta_t)");
    describe_gap(trace, options.metrics);

    Rng rng(options.seed);
    Vector x = options.x0 ? problem.project(*options.x0) : random_initial_point(problem, rng);

    const auto start = Clock::now();
    std::uint64_t evals = 0;
    std::size_t next = 0;
    bool stop = false;

    auto wall_exceeded = [&] {
        return budget.max_wall_seconds && elapsed_ms(start) > *budget.max_wall_seconds * 1e3;
    };
    auto record_until = [&](const Vector& point, std::uint64_t total) {
        while (next < ticks.size() && ticks[next] <= total) {
            TraceRecord rec = evaluate_point(problem, point, options.metrics);
            rec.k = total;
            rec.evals_full = static_cast<double>(total);
            if (options.metrics.record_wall_time) rec.wall_ms = elapsed_ms(start);
            if (trace.records.empty() || trace.records.back().k < total) trace.records.push_back(rec);
            ++next;
            if (!std::isfinite(rec.f_value)) {
                trace.aborted = true;
                trace.diagnostic = "non-finite objective after " + std::to_string(total) + " evaluations";
                stop = true;
            }
        }
    };

    double eta = sr.eta0;
    std::uint64_t cap = sr.inner_max_iters;
    std::uint64_t outer = 0;
    std::uint64_t failures = 0;
    while (evals < horizon && next < ticks.size() && !stop && (!sr.outer_steps || outer < *sr.outer_steps)) {
        const double tol = std::max(sr.inner_tol_floor, sr.inner_tol_factor * eta);
        const std::uint64_t allowed = std::min(cap, horizon - evals);
        const std::uint64_t base = evals;
        const auto solve = solve_regularized_vi(problem, eta, tol, allowed, reg, x,
                                                [&](const Vector& xi, std::uint64_t it) {
                                                    record_until(xi, base + it);
                                                    return !stop && !wall_exceeded();
                                                });
        evals += solve.iterations;
        x = solve.x;
        if (!std::isfinite(solve.residual)) {
            trace.aborted = true;
            trace.diagnostic = "non-finite regularized map at eta = " + fmt(eta);
            break;
        }
        record_until(x, evals);
        if (!solve.converged && evals < horizon) {
            ++failures;
            cap = std::max<std::uint64_t>(1, cap / 2);
        }
        ++outer;
        eta *= sr.rho;
        if (wall_exceeded()) break;
    }
    trace.set_meta("outer_steps", std::to_string(outer));
    trace.set_meta("inner_failures", std::to_string(failures));
    trace.set_meta("final_eta", fmt(eta));
    return trace;
}

} // namespace arbirg
