#include "arbirg/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace arbirg {

namespace {

void transpose_jacobian_product(const ProblemSpec& problem, const Vector& y, const Vector& v, const Vector& Fy,
                                Vector& out, Vector& scratch_point, Vector& scratch_map)
{
    if (problem.map_vjp) {
        problem.map_vjp(y, v, out);
        return;
    }
    // forward differences of the scalar v^T F along each coordinate
    const double base = v.dot(Fy);
    scratch_point = y;
    for (Index k = 0; k < y.size(); ++k) {
        const double h = 1e-6 * (1.0 + std::abs(y[k]));
        scratch_point[k] = y[k] + h;
        problem.map(scratch_point, scratch_map);
        out[k] = (v.dot(scratch_map) - base) / h;
        scratch_point[k] = y[k];
    }
}

} // namespace

void validate(const GapEstimatorConfig& cfg)
{
    if (cfg.n_samples < 1 || cfg.n_restarts < 1 || cfg.ascent_iters < 1) {
        throw std::invalid_argument("gap estimator: sample, restart and iteration counts must be at least 1");
    }
    if (!(cfg.ascent_step > 0.0)) throw std::invalid_argument("gap estimator: ascent step must be positive");
}

double dual_gap_estimate(const ProblemSpec& problem, const Vector& x, const GapEstimatorConfig& cfg)
{
    validate(cfg);
    if (!problem.bounded()) {
        throw std::invalid_argument(
            "dual_gap_estimate: X is unbounded and cannot be sampled; use natural_residual instead");
    }
    const Index n = problem.dim();
    if (x.size() != n) throw std::invalid_argument("dual_gap_estimate: dimension mismatch");

    Vector Fy(n), diff(n), jv(n), grad(n), scratch_point(n), scratch_map(n);
    // psi(x) = 0, so the floor at zero is itself attained by a feasible probe
    double best = 0.0;

    auto psi = [&](const Vector& y) {
        problem.map(y, Fy);
        diff = x - y;
        return Fy.dot(diff);
    };

    // Probes and restart points come from separate streams so that a larger
    // n_samples only ever adds probes.
    Rng probe_rng(derive_seed(cfg.seed, 1));
    for (std::size_t t = 0; t < cfg.n_samples; ++t) {
        const Vector y = problem.sample_feasible(probe_rng);
        const double v = psi(y);
        if (std::isfinite(v) && v > best) best = v;
    }

    Rng restart_rng(derive_seed(cfg.seed, 2));
    for (std::size_t r = 0; r < cfg.n_restarts; ++r) {
        Vector y = r == 0 ? problem.project(x) : problem.sample_feasible(restart_rng);
        for (std::size_t it = 0; it <= cfg.ascent_iters; ++it) {
            const double v = psi(y);
            if (!std::isfinite(v)) break;
            if (v > best) best = v;
            if (it == cfg.ascent_iters) break;
            transpose_jacobian_product(problem, y, diff, Fy, jv, scratch_point, scratch_map);
            grad = jv - Fy;
            y = problem.project(y + cfg.ascent_step * grad);
        }
    }
    return best;
}

double natural_residual(const ProblemSpec& problem, const Vector& x)
{
    const Vector Fx = problem.map(x);
    return (x - problem.project(x - Fx)).norm();
}

double reference_value(const ProblemSpec& problem)
{
    if (problem.known_optimal_value) return *problem.known_optimal_value;
    if (problem.known_solution) return problem.f(*problem.known_solution);
    throw std::invalid_argument("suboptimality: problem has no known solution or optimal value");
}

double suboptimality(const ProblemSpec& problem, const Vector& x)
{
    return problem.f(x) - reference_value(problem);
}

BoundConstants bound_constants(const ProblemSpec& problem)
{
    std::vector<std::string> missing;
    const auto& c = problem.constants;
    if (!c.M) missing.emplace_back("M");
    if (!c.C_F) missing.emplace_back("C_F");
    if (!c.C_f) missing.emplace_back("C_f");
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "missing problem constants:";
        for (const auto& m : missing) msg << ' ' << m;
        throw std::invalid_argument(msg.str());
    }
    return {*c.M, *c.C_F, *c.C_f, problem.structure->p_min()};
}

std::uint64_t bound_threshold(double r)
{
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("bound_threshold: r must lie in [0, 1)");
    const double t = std::pow(2.0, 2.0 / (1.0 - r)) - 1.0;
    return static_cast<std::uint64_t>(std::ceil(t - 1e-12));
}

RateBounds rate_bounds(const BoundConstants& c, const Schedule& s, std::uint64_t N)
{
    if (!(s.b > 0.0 && s.b < 0.5)) throw std::invalid_argument("rate bounds: need 0 < b < 0.5");
    if (!(s.r >= 0.0 && s.r < 1.0)) throw std::invalid_argument("rate bounds: need 0 <= r < 1");
    if (!(s.gamma0 > 0.0 && s.eta0 > 0.0)) throw std::invalid_argument("rate bounds: gamma0 and eta0 must be positive");
    const auto threshold = bound_threshold(s.r);
    if (N < threshold) {
        std::ostringstream msg;
        msg << "rate bounds: N = " << N << " is below the minimal N = " << threshold << " for r = " << s.r;
        throw std::invalid_argument(msg.str());
    }
    const double r = s.r;
    const double b = s.b;
    const double g0 = s.gamma0;
    const double e0 = s.eta0;
    const double noise = c.C_F * c.C_F + e0 * e0 * c.C_f * c.C_f;
    const double n1 = static_cast<double>(N) + 1.0;

    const double subopt = (2.0 - r) / (c.p_min * e0)
                        * (4.0 * c.M * c.M / g0 + g0 * noise / (0.5 - 0.5 * r + b))
                        * std::pow(n1, -(0.5 - b));
    const double gap = (2.0 - r) / c.p_min
                     * (4.0 * c.M * c.M / g0 + g0 * noise / (0.5 - 0.5 * r)
                        + 2.0 * c.p_min * c.C_f * c.M * e0 / (1.0 - 0.5 * r - b))
                     * std::pow(n1, -b);
    return {subopt, gap};
}

ErrorMoments rb_error_moments(const ProblemSpec& problem, const Vector& x, std::size_t n_draws, Rng& rng)
{
    if (n_draws < 1) throw std::invalid_argument("rb_error_moments: need at least one draw");
    const auto& st = *problem.structure;
    const std::size_t d = st.num_blocks();
    const Vector F = problem.map(x);
    const Vector G = problem.subgradient(x);

    // The error vector only depends on the drawn block, so tabulate the d outcomes.
    std::vector<Vector> Delta(d, F), delta(d, G);
    std::vector<double> Delta_sq(d), delta_sq(d);
    for (std::size_t i = 0; i < d; ++i) {
        st.segment(Delta[i], i) -= st.segment(F, i) / st.prob(i);
        st.segment(delta[i], i) -= st.segment(G, i) / st.prob(i);
        Delta_sq[i] = Delta[i].squaredNorm();
        delta_sq[i] = delta[i].squaredNorm();
    }
    std::vector<std::size_t> counts(d, 0);
    for (std::size_t t = 0; t < n_draws; ++t) ++counts[sample_block(st, rng)];

    ErrorMoments m;
    m.mean_Delta = Vector::Zero(x.size());
    m.mean_delta = Vector::Zero(x.size());
    const double n = static_cast<double>(n_draws);
    for (std::size_t i = 0; i < d; ++i) {
        const double w = static_cast<double>(counts[i]) / n;
        m.mean_Delta += w * Delta[i];
        m.mean_delta += w * delta[i];
        m.msq_Delta += w * Delta_sq[i];
        m.msq_delta += w * delta_sq[i];
    }
    const double correction = n_draws > 1 ? n / (n - 1.0) : 1.0;
    const double tr_Delta = std::max(0.0, (m.msq_Delta - m.mean_Delta.squaredNorm()) * correction);
    const double tr_delta = std::max(0.0, (m.msq_delta - m.mean_delta.squaredNorm()) * correction);
    m.se_Delta = std::sqrt(tr_Delta / n);
    m.se_delta = std::sqrt(tr_delta / n);
    return m;
}

std::uint64_t harmonic_threshold(double alpha)
{
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("harmonic bounds: alpha must lie in [0, 1)");
    const double t = std::pow(2.0, 1.0 / (1.0 - alpha)) - 1.0;
    return static_cast<std::uint64_t>(std::ceil(t - 1e-12));
}

HarmonicCheck harmonic_bounds_check(double alpha, std::uint64_t N)
{
    const auto threshold = harmonic_threshold(alpha);
    if (N < threshold) {
        std::ostringstream msg;
        msg << "harmonic bounds: N = " << N << " is below the minimal N = " << threshold << " for alpha = " << alpha;
        throw std::invalid_argument(msg.str());
    }
    // smallest terms first
    long double sum = 0.0L;
    for (std::uint64_t k = N + 1; k-- > 0;) {
        sum += std::pow(static_cast<long double>(k) + 1.0L, -static_cast<long double>(alpha));
    }
    const double grown = std::pow(static_cast<double>(N) + 1.0, 1.0 - alpha);
    HarmonicCheck out;
    out.sum = static_cast<double>(sum);
    out.upper = grown / (1.0 - alpha);
    out.lower = grown / (2.0 * (1.0 - alpha));
    const double slack = 1e-12 * out.upper;
    out.ok = out.lower <= out.sum + slack && out.sum <= out.upper + slack;
    return out;
}

double fit_log_slope(std::span<const double> N, std::span<const double> values, double window)
{
    if (N.size() != values.size()) throw std::invalid_argument("rate_slope: length mismatch");
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("rate_slope: window must lie in (0, 1]");
    const auto count = N.size();
    const auto start = static_cast<std::size_t>(std::floor((1.0 - window) * static_cast<double>(count)));
    std::vector<double> xs, ys;
    for (std::size_t t = start; t < count; ++t) {
        if (values[t] > 0.0 && std::isfinite(values[t])) {
            xs.push_back(std::log(N[t] + 1.0));
            ys.push_back(std::log(values[t]));
        }
    }
    if (xs.size() < 10) {
        throw std::invalid_argument("rate_slope: fewer than 10 positive values in the window");
    }
    const double m = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        mx += xs[t];
        my += ys[t];
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        sxy += (xs[t] - mx) * (ys[t] - my);
        sxx += (xs[t] - mx) * (xs[t] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("rate_slope: degenerate N axis");
    return sxy / sxx;
}

double rate_slope(const RunTrace& trace, MetricField field, double window)
{
    std::vector<double> N, values;
    for (const auto& rec : trace.records) {
        const auto v = field_value(rec, field);
        N.push_back(static_cast<double>(rec.k));
        values.push_back(v ? *v : 0.0);
    }
    return fit_log_slope(N, values, window);
}

} // namespace arbirg
