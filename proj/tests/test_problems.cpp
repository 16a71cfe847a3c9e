#include "arbirg/problems.hpp"
#include "arbirg/solvers.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace arbirg;

namespace {

CournotParams single_firm(double sigma)
{
    CournotParams p;
    p.firms = 1;
    p.nodes = 1;
    p.cost_slopes = Matrix::Constant(1, 1, 10.0);
    p.alpha = Vector::Constant(1, 50.0);
    p.beta = Vector::Constant(1, 0.05);
    p.caps = Matrix::Constant(1, 1, 200.0);
    p.sigma = sigma;
    return p;
}

// g_i as a function of the whole profile
double firm_cost(const CournotParams& p, const Vector& x, std::size_t i)
{
    const Index J = static_cast<Index>(p.nodes);
    const Index off = static_cast<Index>(i) * 2 * J;
    double g = 0.0;
    for (Index j = 0; j < J; ++j) {
        double sbar = 0.0;
        for (std::size_t k = 0; k < p.firms; ++k) sbar += x[static_cast<Index>(k) * 2 * J + J + j];
        const double price = p.alpha[j] - p.beta[j] * std::pow(sbar, p.sigma);
        g += p.cost_slopes(static_cast<Index>(i), j) * x[off + j] - x[off + J + j] * price;
    }
    return g;
}

double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

} // namespace

TEST_CASE("Cournot map: hand-differentiated example")
{
    const auto prob = build_cournot(single_firm(1.0));
    Vector x(2);
    x << 100, 100;
    const Vector F = prob.map(x);
    CHECK(F[0] == doctest::Approx(10));
    CHECK(F[1] == doctest::Approx(-40));
    const Vector fd = oracle::fd_gradient([&](const Vector& z) { return firm_cost(single_firm(1.0), z, 0); }, x);
    CHECK(rel_err(F, fd) < 1e-6);
}

TEST_CASE("Cournot map at zero sales")
{
    const auto prob = benchmark_cournot_instance(5);
    Vector x = Vector::Zero(prob.dim());
    const Vector F = prob.map(x);
    for (std::size_t i = 0; i < 4; ++i)
        for (Index j = 0; j < 3; ++j) CHECK(F[static_cast<Index>(i) * 6 + 3 + j] == doctest::Approx(-50.0));
}

TEST_CASE("benchmark Cournot instance")
{
    const auto params = benchmark_cournot_params(2024);
    CHECK(params.firms == 4);
    CHECK(params.nodes == 3);
    CHECK(params.sigma == 1.01);
    CHECK(params.cost_slopes.minCoeff() >= 10.0);
    CHECK(params.cost_slopes.maxCoeff() <= 50.0);
    CHECK(params.caps.minCoeff() == 120.0);
    const auto prob = benchmark_cournot_instance(2024);
    CHECK(prob.dim() == 24);
    CHECK(prob.num_blocks() == 4);
    CHECK(std::isfinite(*prob.constants.M));
    CHECK(*prob.constants.M == doctest::Approx(std::sqrt(12 * 120.0 * 120 + 4 * 360.0 * 360)));
    // the seed determines the slopes
    CHECK(benchmark_cournot_params(2024).cost_slopes == params.cost_slopes);
    CHECK(benchmark_cournot_params(2025).cost_slopes != params.cost_slopes);
}

TEST_CASE("Cournot monotonicity guard")
{
    auto p = benchmark_cournot_params(1);
    p.sigma = 2.0; // limit (3*2-1)/(2-1) = 5
    p.firms = 6;
    p.cost_slopes = Matrix::Constant(6, 3, 20.0);
    p.caps = Matrix::Constant(6, 3, 120.0);
    CHECK_THROWS_AS(build_cournot(p), std::invalid_argument);
    p.firms = 5;
    p.cost_slopes = Matrix::Constant(5, 3, 20.0);
    p.caps = Matrix::Constant(5, 3, 120.0);
    CHECK_NOTHROW(build_cournot(p));
    p.sigma = 3.5;
    CHECK_THROWS_AS(build_cournot(p), std::invalid_argument);
    p.sigma = 0.5;
    CHECK_THROWS_AS(build_cournot(p), std::invalid_argument);
}

TEST_CASE("Cournot gradients against finite differences at 100 feasible points")
{
    const auto params = benchmark_cournot_params(2024);
    const auto prob = build_cournot(params);
    Rng rng(9);
    double worst_f = 0, worst_F = 0, worst_vjp = 0;
    for (int t = 0; t < 100; ++t) {
        const Vector x = prob.sample_feasible(rng);
        worst_f = std::max(worst_f, rel_err(prob.subgradient(x), oracle::fd_gradient(prob.objective, x)));
        const Vector F = prob.map(x);
        for (std::size_t i = 0; i < params.firms; ++i) {
            const Vector g = oracle::fd_gradient([&](const Vector& z) { return firm_cost(params, z, i); }, x);
            worst_F = std::max(worst_F, rel_err(prob.structure->segment(F, i), prob.structure->segment(g, i)));
        }
        // J^T v column by column through finite differences of F
        Vector v(x.size());
        for (Index k = 0; k < v.size(); ++k) v[k] = std::sin(1.0 + k + t);
        Vector jtv(x.size());
        prob.map_vjp(x, v, jtv);
        const Vector fd = oracle::fd_gradient([&](const Vector& z) { return v.dot(prob.map(z)); }, x);
        worst_vjp = std::max(worst_vjp, rel_err(jtv, fd));
    }
    CHECK(worst_f <= 1e-6);
    CHECK(worst_F <= 1e-6);
    CHECK(worst_vjp <= 1e-6);
}

TEST_CASE("monotonicity, convexity and block consistency on the constructed families")
{
    Rng rng(11);
    std::vector<ProblemSpec> probs;
    probs.push_back(benchmark_cournot_instance(2024));
    probs.push_back(synthetic_l1_instance({}));
    {
        Matrix A(2, 4);
        A << 1, 2, 0, -1, 0, 1, 1, 1;
        std::vector<ConvexConstraint> h{{[](const Vector& x) { return x.squaredNorm() - 4.0; },
                                         [](const Vector& x) { return Vector(2.0 * x); }}};
        auto st = std::make_shared<const BlockStructure>(BlockStructure::uniform(2, 2));
        probs.push_back(build_penalized_program(A, A * Vector::Constant(4, 0.1), h, st,
                                                {SetDescriptor::box(2, -2, 2), SetDescriptor::box(2, -2, 2)}));
    }
    for (const auto& prob : probs) {
        CAPTURE(prob.id);
        int mono_fail = 0, convex_fail = 0, block_fail = 0;
        for (int t = 0; t < 1000; ++t) {
            const Vector x = prob.sample_feasible(rng);
            const Vector y = prob.sample_feasible(rng);
            if ((prob.map(x) - prob.map(y)).dot(x - y) < -1e-9 * (1 + x.norm() * y.norm())) ++mono_fail;
            const double mid = prob.f(0.5 * (x + y));
            if (mid > 0.5 * (prob.f(x) + prob.f(y)) + 1e-9 * (1 + std::abs(mid))) ++convex_fail;
            const Vector full = prob.map(x);
            for (std::size_t i = 0; i < prob.num_blocks(); ++i) {
                Vector blk(prob.structure->block_dim(i));
                prob.map_block(x, i, blk);
                if (blk != prob.structure->segment(full, i)) ++block_fail;
            }
        }
        CHECK(mono_fail == 0);
        CHECK(convex_fail == 0);
        CHECK(block_fail == 0);
    }
}

TEST_CASE("penalized programs")
{
    SUBCASE("equality only: F(x) = x")
    {
        const auto prob = build_penalized_program(Matrix::Identity(1, 1), Vector::Zero(1), {}, nullptr,
                                                  {SetDescriptor::whole_space(1)});
        Vector x(1);
        x << 3.5;
        CHECK(prob.map(x)[0] == doctest::Approx(3.5));
        CHECK(natural_residual(prob, Vector::Zero(1)) == 0.0);
    }
    SUBCASE("inequality only: F(x) = max(0, x - 1)")
    {
        std::vector<ConvexConstraint> h{{[](const Vector& x) { return x[0] - 1.0; },
                                         [](const Vector&) { return Vector::Ones(1); }}};
        for (double v : {-3.0, 0.0, 1.0, 1.5, 4.0}) {
            Vector x(1);
            x << v;
            CHECK(penalized_map(Matrix(0, 1), Vector(0), h, x)[0] == doctest::Approx(std::max(0.0, v - 1.0)));
        }
    }
    SUBCASE("the map is the gradient of the penalty potential")
    {
        Rng rng(2);
        std::normal_distribution<double> nd;
        Matrix A(2, 3);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 3; ++j) A(i, j) = nd(rng);
        const Vector b = Vector::Constant(2, 0.3);
        std::vector<ConvexConstraint> h{{[](const Vector& x) { return x.squaredNorm() - 1.0; },
                                         [](const Vector& x) { return Vector(2.0 * x); }}};
        for (int t = 0; t < 20; ++t) {
            Vector x(3);
            for (Index j = 0; j < 3; ++j) x[j] = 2.0 * nd(rng);
            const Vector fd = oracle::fd_gradient([&](const Vector& z) { return penalized_potential(A, b, h, z); }, x);
            CHECK(rel_err(penalized_map(A, b, h, x), fd) < 1e-6);
        }
    }
    SUBCASE("random rank-2 system inside [-2, 2]^5")
    {
        Rng rng(13);
        std::normal_distribution<double> nd;
        Matrix U(3, 2), V(2, 5);
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 2; ++j) U(i, j) = nd(rng);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 5; ++j) V(i, j) = nd(rng);
        const Matrix A = U * V;
        Vector xhat(5);
        for (Index j = 0; j < 5; ++j) xhat[j] = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
        const Vector b = A * xhat;
        auto st = std::make_shared<const BlockStructure>(BlockStructure::uniform(1, 5));
        const auto prob = build_penalized_program(A, b, {}, st, {SetDescriptor::box(5, -2, 2)});
        const auto sol = solve_monotone_vi(prob, 1e-8, 2'000'000, Vector::Zero(5));
        REQUIRE(sol.converged);
        CHECK((A * sol.x - b).norm() <= 1e-6);
    }
}

TEST_CASE("complementarity problems")
{
    SUBCASE("F(x) = x - 1")
    {
        const auto prob = build_lcp([](const Vector& x) { return Vector(x.array() - 1.0); }, 1);
        Vector x(1);
        x << 1.0;
        CHECK(natural_residual(prob, x) == 0.0);
        CHECK(prob.f(x) == doctest::Approx(0.5));
    }
    SUBCASE("Q = I, q = (-1, 2) by pattern enumeration")
    {
        const Matrix Q = Matrix::Identity(2, 2);
        Vector q(2);
        q << -1, 2;
        const auto sols = oracle::lcp_solutions(Q, q);
        REQUIRE(sols.size() == 1);
        CHECK((sols[0] - Vector((Vector(2) << 1, 0).finished())).norm() < 1e-12);
        CHECK((AffineLcp::one_solution(Q, q) - sols[0]).norm() < 1e-9);
        CHECK((AffineLcp::select(Q, q, Vector::Zero(2)) - sols[0]).norm() < 1e-9);
    }
    SUBCASE("aRB-IRG on Q = I, q = (-1, 2) reaches approximate complementarity")
    {
        const Matrix Q = Matrix::Identity(2, 2);
        Vector q(2);
        q << -1, 2;
        auto st = std::make_shared<const BlockStructure>(BlockStructure::uniform(2, 1));
        const auto prob = build_lcp([Q, q](const Vector& x) { return Vector(Q * x + q); }, 2, st);
        RunOptions o;
        o.seed = 4;
        o.budget.max_iters = 200000;
        o.checkpoints = {200000};
        const auto trace = run_arbirg(prob, Schedule{0.5, 0.01, 0.6, 0.3, 0.0, ScheduleMode::UnboundedX}, o);
        REQUIRE(trace.records.size() == 1);
        // the averaged iterate lives in the orthant; its residual shrinks with eta
        CHECK(*trace.records[0].natural_residual < 1e-3);
    }
    SUBCASE("random positive definite LCPs agree with enumeration")
    {
        Rng rng(21);
        std::normal_distribution<double> nd;
        for (int t = 0; t < 30; ++t) {
            Matrix G(4, 4);
            for (Index i = 0; i < 4; ++i)
                for (Index j = 0; j < 4; ++j) G(i, j) = nd(rng);
            const Matrix Q = G.transpose() * G + 0.1 * Matrix::Identity(4, 4);
            Vector q(4), c(4);
            for (Index j = 0; j < 4; ++j) {
                q[j] = nd(rng);
                c[j] = nd(rng);
            }
            const auto sols = oracle::lcp_solutions(Q, q, 1e-9);
            REQUIRE(sols.size() == 1);
            CHECK((AffineLcp::one_solution(Q, q) - sols[0]).norm() < 1e-8);
            CHECK((AffineLcp::select(Q, q, c) - sols[0]).norm() < 1e-8);
        }
    }
}

TEST_CASE("l1 over an affine box")
{
    SUBCASE("b = 0 in a symmetric box")
    {
        Matrix A(1, 2);
        A << 1, -2;
        const auto ref = l1_affine_box_reference(A, Vector::Zero(1), Vector::Constant(2, -1), Vector::Constant(2, 1));
        CHECK(ref.value == doctest::Approx(0.0));
        CHECK(ref.solution.norm() < 1e-12);
    }
    SUBCASE("segment where every point is optimal")
    {
        Matrix A(1, 2);
        A << 1, 1;
        const auto ref = l1_affine_box_reference(A, Vector::Ones(1), Vector::Zero(2), Vector::Ones(2));
        CHECK(ref.value == doctest::Approx(1.0));
        auto st = std::make_shared<const BlockStructure>(BlockStructure::uniform(2, 1));
        const auto prob = build_l1_over_affine_box(A, Vector::Ones(1), Vector::Zero(2), Vector::Ones(2), st);
        CHECK(suboptimality(prob, Vector((Vector(2) << 0.3, 0.7).finished())) == doctest::Approx(0.0));
    }
    SUBCASE("random 2 x 4 instances against a null-space grid")
    {
        Rng rng(17);
        std::normal_distribution<double> nd;
        for (int t = 0; t < 5; ++t) {
            Matrix A(2, 4);
            for (Index i = 0; i < 2; ++i)
                for (Index j = 0; j < 4; ++j) A(i, j) = nd(rng);
            Vector xhat(4);
            for (Index j = 0; j < 4; ++j) xhat[j] = std::uniform_real_distribution<double>(-0.8, 0.8)(rng);
            const Vector b = A * xhat;
            const Vector lo = Vector::Constant(4, -1), hi = Vector::Constant(4, 1);
            const auto ref = l1_affine_box_reference(A, b, lo, hi);
            const double grid = oracle::l1_min_by_grid(A, b, lo, hi);
            CHECK(ref.value <= grid + 1e-9);
            CHECK(grid - ref.value <= 1e-6);
            CHECK((A * ref.solution - b).norm() < 1e-9);
            CHECK(ref.solution.lpNorm<1>() == doctest::Approx(ref.value));
        }
    }
    SUBCASE("infeasible data is a fault")
    {
        Matrix A(1, 2);
        A << 1, 1;
        CHECK_THROWS(l1_affine_box_reference(A, Vector::Constant(1, 5.0), Vector::Zero(2), Vector::Ones(2)));
    }
    SUBCASE("generated instance carries consistent constants")
    {
        const auto prob = synthetic_l1_instance({});
        CHECK(prob.dim() == 8);
        CHECK(prob.num_blocks() == 4);
        CHECK(*prob.constants.M == doctest::Approx(std::sqrt(8.0)));
        CHECK(*prob.constants.C_f == doctest::Approx(std::sqrt(8.0)));
        Rng rng(1);
        for (int t = 0; t < 500; ++t) {
            const Vector x = prob.sample_feasible(rng);
            CHECK(prob.map(x).norm() <= *prob.constants.C_F + 1e-9);
        }
        CHECK(natural_residual(prob, *prob.known_solution) < 1e-9);
        CHECK(prob.f(*prob.known_solution) == doctest::Approx(*prob.known_optimal_value));
    }
}

TEST_CASE("strongly convex selection over an LCP on the orthant")
{
    SUBCASE("singleton solution set: x* = xhat whatever c is")
    {
        const Matrix Q = Matrix::Identity(3, 3) * 2.0;
        const Vector xhat = (Vector(3) << 1, 0, 2).finished();
        Vector q = -Q * xhat;
        q[1] += 1.0;
        for (const Vector& c : {Vector(Vector::Zero(3)), Vector(Vector::Constant(3, 5.0))}) {
            const auto prob = build_strongly_convex_unbounded(Q, q, c);
            CHECK((*prob.known_solution - xhat).norm() < 1e-9);
        }
    }
    SUBCASE("F = 0: x* is the projection of c onto the orthant")
    {
        const Vector c = (Vector(3) << 1, -2, 0.5).finished();
        const auto prob = build_strongly_convex_unbounded(Matrix::Zero(3, 3), Vector::Zero(3), c);
        CHECK((*prob.known_solution - Vector((Vector(3) << 1, 0, 0.5).finished())).norm() < 1e-9);
    }
    SUBCASE("degenerate face in 3-D")
    {
        // SOL = {x1 + x2 = 1, x1, x2 >= 0, x3 = 0}; nearest point to c is (0.6, 0.4, 0)
        Matrix Q(3, 3);
        Q << 1, 1, 0, 1, 1, 0, 0, 0, 1;
        const Vector q = (Vector(3) << -1, -1, 1).finished();
        const Vector c = (Vector(3) << 0.8, 0.6, 0.3).finished();
        const auto prob = build_strongly_convex_unbounded(Q, q, c);
        CHECK((*prob.known_solution - Vector((Vector(3) << 0.6, 0.4, 0.0).finished())).norm() < 1e-9);
        // with c far out the answer moves to an endpoint of the segment
        const Vector c2 = (Vector(3) << 3.0, -1.0, 0.0).finished();
        CHECK((AffineLcp::select(Q, q, c2) - Vector((Vector(3) << 1, 0, 0).finished())).norm() < 1e-9);
    }
    SUBCASE("non-symmetric or indefinite Q is rejected")
    {
        Matrix Q(2, 2);
        Q << 1, 2, 0, 1;
        CHECK_THROWS_AS(build_strongly_convex_unbounded(Q, Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
        Q << -1, 0, 0, 1;
        CHECK_THROWS_AS(build_strongly_convex_unbounded(Q, Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
    }
    SUBCASE("generated instance agrees with pattern enumeration")
    {
        const auto prob = synthetic_unbounded_instance({});
        CHECK(prob.dim() == 6);
        CHECK_FALSE(prob.bounded());
        CHECK(*prob.constants.mu_F >= 1.0 - 1e-12);
        const Matrix Q = [&] {
            Matrix m(6, 6);
            for (Index j = 0; j < 6; ++j) m.col(j) = prob.map(Vector::Unit(6, j)) - prob.map(Vector::Zero(6));
            return m;
        }();
        const auto sols = oracle::lcp_solutions(Q, prob.map(Vector::Zero(6)), 1e-9);
        REQUIRE(sols.size() == 1);
        CHECK((*prob.known_solution - sols[0]).norm() < 1e-8);
    }
}
