#include "arbirg/problems.hpp"
#include "arbirg/solvers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace arbirg;

namespace {

StructurePtr blocks_of(std::size_t d, Index m) { return std::make_shared<const BlockStructure>(BlockStructure::uniform(d, m)); }

// F = 0, f = 0.5 ||x - c||^2
ProblemSpec pure_objective(const Vector& c, StructurePtr st, std::vector<SetDescriptor> sets)
{
    const Index n = c.size();
    return build_affine_quadratic(Matrix::Zero(n, n), Vector::Zero(n), c, std::move(st), std::move(sets));
}

} // namespace

TEST_CASE("aRB-IRG single steps")
{
    SUBCASE("F(x) = x on the line, f = 0")
    {
        const auto prob = build_penalized_program(Matrix::Identity(1, 1), Vector::Zero(1), {}, nullptr,
                                                  {SetDescriptor::whole_space(1)});
        for (double eta : {0.0001, 1.0, 50.0}) {
            auto st = init_state(prob, Schedule{}, 1, Vector::Ones(1));
            arbirg_step(st, prob, 0.5, eta);
            CHECK(st.x.data()[0] == doctest::Approx(0.5));
            CHECK(st.block_evals == 1);
        }
    }
    SUBCASE("F = 0, f = x^2 / 2 on [-1, 1]")
    {
        const auto prob = pure_objective(Vector::Zero(1), nullptr, {SetDescriptor::box(1, -1, 1)});
        auto st = init_state(prob, Schedule{}, 1, Vector::Ones(1));
        arbirg_step(st, prob, 1.0, 1.0);
        CHECK(st.x.data()[0] == 0.0);
    }
    SUBCASE("only the sampled block moves and iterates stay feasible")
    {
        const auto prob = benchmark_cournot_instance(2024);
        Schedule s{0.1, 0.1, 0.5, 0.25, 0.0, ScheduleMode::BoundedX};
        auto st = init_state(prob, s, 3);
        int untouched_changed = 0, infeasible = 0;
        for (std::uint64_t k = 0; k < 1000; ++k) {
            const Vector before = st.x.data();
            const std::size_t i = arbirg_step(st, prob, stepsize(s, k), regparam(s, k));
            for (std::size_t j = 0; j < prob.num_blocks(); ++j) {
                if (j != i && st.x.block(j) != prob.structure->segment(before, j)) ++untouched_changed;
            }
            if (!prob.contains(st.x.data())) ++infeasible;
        }
        CHECK(untouched_changed == 0);
        CHECK(infeasible == 0);
        CHECK(st.block_evals == 1000);
    }
}

TEST_CASE("run_arbirg converges on the simple families")
{
    SUBCASE("F = 0 on R^4, two blocks: xbar -> c")
    {
        const Vector c = (Vector(4) << 1, -2, 0.5, 3).finished();
        const auto prob = pure_objective(c, blocks_of(2, 2), {SetDescriptor::whole_space(2), SetDescriptor::whole_space(2)});
        RunOptions o;
        o.seed = 5;
        o.budget.max_iters = 100000;
        o.cadence = {Cadence::Spacing::Uniform, 1, 10};
        const auto trace = run_arbirg(prob, Schedule{1.0, 1.0, 0.6, 0.3, 0.0, ScheduleMode::UnboundedX}, o);
        REQUIRE(trace.records.size() == 10);
        CHECK(trace.records.back().k == 100000);
        CHECK(trace.records.back().evals_full == doctest::Approx(50000));
        CHECK(std::sqrt(2.0 * trace.records.back().f_value) <= 1e-2);
        CHECK_FALSE(trace.records.back().gap_estimate.has_value());
    }
    SUBCASE("strongly monotone affine map on a box, f = 0")
    {
        Matrix A(3, 3);
        A << 2, 1, 0, 0, 1.5, 0.5, 0.3, 0, 1;
        const Vector b = A * Vector((Vector(3) << 1.5, -0.2, 0.4).finished()); // target outside the box
        const auto prob = build_penalized_program(A, b, {}, blocks_of(3, 1),
                                                  {SetDescriptor::box(1, -1, 1), SetDescriptor::box(1, -1, 1),
                                                   SetDescriptor::box(1, -1, 1)});
        RunOptions o;
        o.seed = 8;
        o.budget.max_iters = 100000;
        o.cadence = {Cadence::Spacing::Uniform, 1, 5};
        const auto trace = run_arbirg(prob, Schedule{0.1, 0.1, 0.5, 0.25, 0.0, ScheduleMode::BoundedX}, o);
        REQUIRE_FALSE(trace.records.empty());
        CHECK(*trace.records.back().natural_residual <= 1e-2);
    }
}

TEST_CASE("run_arbirg is seed-deterministic and records metadata")
{
    const auto prob = synthetic_l1_instance({});
    RunOptions o;
    o.seed = 99;
    o.budget.max_full_evals = 500;
    o.cadence = {Cadence::Spacing::Log, 1, 20};
    o.metrics.gap = GapEstimatorConfig{100, 2, 20, 1e-2, 4};
    const Schedule s{1.0, 0.1, 0.5, 0.25, 0.5, ScheduleMode::BoundedX};
    const auto t1 = run_arbirg(prob, s, o);
    const auto t2 = run_arbirg(prob, s, o);
    REQUIRE(t1.records.size() == t2.records.size());
    for (std::size_t i = 0; i < t1.records.size(); ++i) {
        CHECK(t1.records[i].k == t2.records[i].k);
        CHECK(t1.records[i].f_value == t2.records[i].f_value);
        CHECK(*t1.records[i].gap_estimate == *t2.records[i].gap_estimate);
        CHECK(*t1.records[i].dist_to_solution == *t2.records[i].dist_to_solution);
        if (i > 0) {
            CHECK(t1.records[i].k > t1.records[i - 1].k);
            CHECK(t1.records[i].evals_full >= t1.records[i - 1].evals_full);
        }
    }
    CHECK(t1.records.back().k == 2000);
    CHECK(*t1.meta("seed") == "99");
    CHECK(*t1.meta("r") == "0.5");
    CHECK(t1.meta("gap_estimator").has_value());
    o.seed = 100;
    CHECK(run_arbirg(prob, s, o).records.back().f_value != t1.records.back().f_value);
}

TEST_CASE("run_arbirg faults and aborts")
{
    const auto prob = synthetic_l1_instance({});
    RunOptions o;
    o.budget.max_iters = 100;
    CHECK_THROWS_AS(run_arbirg(prob, Schedule{1, 1, 0.6, 0.25, 0, ScheduleMode::BoundedX}, o), std::invalid_argument);
    CHECK_THROWS_AS(run_arbirg(prob, Schedule{1, 1, 0.5, 0.25, 0, ScheduleMode::BoundedX}, RunOptions{}),
                    std::invalid_argument);

    const auto nan_prob = build_lcp(
        [](const Vector& x) {
            Vector out = x;
            out[0] = std::numeric_limits<double>::quiet_NaN();
            return out;
        },
        2, blocks_of(2, 1));
    o.checkpoints = {10, 50, 100};
    const auto trace = run_arbirg(nan_prob, Schedule{1, 1, 0.6, 0.3, 0, ScheduleMode::UnboundedX}, o);
    CHECK(trace.aborted);
    CHECK_FALSE(trace.diagnostic.empty());
}

TEST_CASE("regularized VI solves")
{
    SUBCASE("F = 0: the solve returns c for any eta")
    {
        const Vector c = (Vector(3) << 1, -1, 2).finished();
        const auto prob = pure_objective(c, nullptr, {SetDescriptor::whole_space(3)});
        for (double eta : {1e-3, 0.5, 10.0}) {
            const auto res = solve_regularized_vi(prob, eta, 1e-10, 1000);
            CHECK(res.converged);
            CHECK((res.x - c).norm() <= 1e-10);
        }
    }
    SUBCASE("F(x) = x on [1, 2], identity regularization: left endpoint")
    {
        const auto prob = build_affine_quadratic(Matrix::Identity(1, 1), Vector::Zero(1), Vector::Zero(1), nullptr,
                                                 {SetDescriptor::box(1, 1, 2)});
        const auto res = solve_regularized_vi(prob, 1.0, 1e-12, 1000, Regularizer::Identity, Vector::Constant(1, 2.0));
        CHECK(res.converged);
        CHECK(res.x[0] == doctest::Approx(1.0));
    }
    SUBCASE("3 x 3 LCP against pattern enumeration")
    {
        Matrix Q(3, 3);
        Q << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 1.5;
        const Vector q = (Vector(3) << -1, 0.5, -2).finished();
        const auto prob = build_affine_quadratic(Q, q, Vector::Zero(3), nullptr, {SetDescriptor::nonneg_orthant(3)});
        const auto sols = oracle::lcp_solutions(Q + 0.1 * Matrix::Identity(3, 3), q);
        REQUIRE(sols.size() == 1);
        const auto res = solve_regularized_vi(prob, 0.1, 1e-11, 100000);
        CHECK(res.converged);
        CHECK((res.x - sols[0]).norm() <= 1e-9);
    }
    SUBCASE("step residual decreases monotonically")
    {
        const auto prob = synthetic_unbounded_instance({});
        std::vector<double> steps;
        Vector prev;
        solve_regularized_vi(prob, 0.3, 1e-12, 5000, Regularizer::Objective, Vector::Constant(6, 3.0),
                             [&](const Vector& x, std::uint64_t) {
                                 if (prev.size() > 0) steps.push_back((x - prev).norm());
                                 prev = x;
                                 return true;
                             });
        REQUIRE(steps.size() > 10);
        int increases = 0;
        for (std::size_t i = 1; i < steps.size(); ++i) increases += steps[i] > steps[i - 1] + 1e-14 ? 1 : 0;
        CHECK(increases == 0);
    }
    SUBCASE("iteration cap is reported, not thrown")
    {
        const auto prob = synthetic_unbounded_instance({});
        const auto res = solve_regularized_vi(prob, 1e-3, 1e-14, 3, Regularizer::Objective, Vector::Constant(6, 3.0));
        CHECK_FALSE(res.converged);
        CHECK(res.iterations == 3);
        CHECK(res.residual > 0);
    }
    SUBCASE("merely monotone problems need the identity variant")
    {
        const auto prob = benchmark_cournot_instance(2024);
        CHECK_THROWS_AS(solve_regularized_vi(prob, 0.1, 1e-6, 10, Regularizer::Objective), std::invalid_argument);
        CHECK(resolve(Regularizer::Auto, prob) == Regularizer::Identity);
        CHECK(resolve(Regularizer::Auto, synthetic_unbounded_instance({})) == Regularizer::Objective);
    }
}

TEST_CASE("Tikhonov points")
{
    // F(x) = x - 1 on R, f = x^2 / 2
    const auto prob = build_affine_quadratic(Matrix::Identity(1, 1), Vector::Constant(1, -1.0), Vector::Zero(1), nullptr,
                                             {SetDescriptor::whole_space(1)});
    CHECK(tikhonov_point(prob, 1.0, 1e-12)[0] == doctest::Approx(0.5).epsilon(1e-10));
    double last = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (int e = 0; e <= 10; ++e) {
        const double eta = std::ldexp(1.0, -e);
        const double x = tikhonov_point(prob, eta, 1e-13)[0];
        CHECK(x == doctest::Approx(1.0 / (1.0 + eta)).epsilon(1e-10));
        const double err = std::abs(x - 1.0);
        monotone = monotone && err < last;
        last = err;
    }
    CHECK(monotone);
    CHECK(last <= 1e-3);

    const Vector c = (Vector(2) << 3, -4).finished();
    const auto flat = pure_objective(c, nullptr, {SetDescriptor::box(2, -1, 1)});
    for (double eta : {0.01, 1.0}) CHECK((tikhonov_point(flat, eta, 1e-12) - Vector((Vector(2) << 1, -1).finished())).norm() < 1e-10);

    CHECK_THROWS_AS(tikhonov_point(benchmark_cournot_instance(1), 0.1, 1e-6), std::invalid_argument);
}

TEST_CASE("sequential regularization")
{
    SUBCASE("F = 0: every solve lands on c and the trace is flat")
    {
        const Vector c = (Vector(2) << 0.5, -0.25).finished();
        const auto prob = pure_objective(c, nullptr, {SetDescriptor::box(2, -1, 1)});
        SrOptions sr;
        RunOptions o;
        o.budget.max_full_evals = 50;
        o.cadence = {Cadence::Spacing::Every, 5, 0};
        o.seed = 2;
        const auto trace = run_sr(prob, sr, o);
        REQUIRE(trace.records.size() == 10);
        for (const auto& rec : trace.records) CHECK(rec.f_value <= 1e-20);
        CHECK(*trace.meta("regularizer") == "objective");
    }
    SUBCASE("one outer step is one regularized solve")
    {
        const auto prob = synthetic_unbounded_instance({});
        SrOptions sr;
        sr.eta0 = 0.5;
        sr.outer_steps = 1;
        sr.inner_tol_floor = 1e-10;
        sr.inner_tol_factor = 0.0;
        RunOptions o;
        o.budget.max_full_evals = 1e6;
        o.cadence = {Cadence::Spacing::Every, 1, 0};
        o.x0 = Vector::Constant(6, 1.0);
        const auto trace = run_sr(prob, sr, o);
        const auto solve = solve_regularized_vi(prob, 0.5, 1e-10, sr.inner_max_iters, Regularizer::Objective, o.x0);
        REQUIRE(solve.converged);
        CHECK(*trace.meta("outer_steps") == "1");
        REQUIRE_FALSE(trace.records.empty());
        CHECK(trace.records.back().k == solve.iterations);
        CHECK(trace.records.back().f_value == prob.f(solve.x));
    }
    SUBCASE("SR is deterministic and its clock is in full evaluations")
    {
        const auto prob = benchmark_cournot_instance(2024);
        SrOptions sr;
        sr.eta0 = 0.1;
        RunOptions o;
        o.budget.max_full_evals = 2000;
        o.cadence = {Cadence::Spacing::Uniform, 1, 10};
        o.seed = 7;
        const auto a = run_sr(prob, sr, o);
        const auto b = run_sr(prob, sr, o);
        REQUIRE(a.records.size() == 10);
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].f_value == b.records[i].f_value);
            CHECK(a.records[i].evals_full == static_cast<double>(a.records[i].k));
        }
        CHECK(a.records.back().evals_full == 2000);
        CHECK(*a.meta("regularizer") == "identity");
        CHECK_THROWS_AS(run_sr(prob, SrOptions{1.0, 1.5}, o), std::invalid_argument);
    }
}
