#include "arbirg/core.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace arbirg;

TEST_CASE("block structure layout and validation")
{
    const BlockStructure st({2, 3, 1}, {0.5, 0.3, 0.2});
    CHECK(st.num_blocks() == 3);
    CHECK(st.dim() == 6);
    CHECK(st.offset(0) == 0);
    CHECK(st.offset(1) == 2);
    CHECK(st.offset(2) == 5);
    CHECK(st.p_min() == doctest::Approx(0.2));
    CHECK(st.p_max() == doctest::Approx(0.5));

    CHECK_THROWS_AS(BlockStructure({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(BlockStructure({1, 1}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(BlockStructure({1, 0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(BlockStructure({1, 1}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(BlockStructure({1, 1}, {0.5, 0.6}), std::invalid_argument);

    const auto u = BlockStructure::uniform(4, 2);
    CHECK(u.dim() == 8);
    CHECK(u.p_min() == doctest::Approx(0.25));
}

TEST_CASE("block vectors split and reassemble")
{
    auto st = std::make_shared<const BlockStructure>(BlockStructure::uniform({1, 2}));
    Vector a(1), b(2);
    a << 1;
    b << 2, 3;
    auto v = BlockVector::from_blocks(st, {a, b});
    CHECK(v.data() == Vector::LinSpaced(3, 1, 3));
    v.block(1)[0] = 7;
    CHECK(v.data()[1] == 7);
    CHECK(v.blocks()[1][1] == 3);
    CHECK_THROWS_AS(BlockVector(st, Vector::Zero(4)), std::invalid_argument);
    CHECK_THROWS_AS(BlockVector::from_blocks(st, {a}), std::invalid_argument);
}

TEST_CASE("schedules")
{
    const Schedule s{0.1, 1.0, 0.5, 0.25, 0.0, ScheduleMode::BoundedX};
    CHECK(stepsize(s, 0) == doctest::Approx(0.1));
    CHECK(stepsize(s, 3) == doctest::Approx(0.05));
    CHECK(regparam(s, 15) == doctest::Approx(0.5));
    CHECK(validate_schedule(s).accepted);

    SUBCASE("bounded mode needs a = 1/2 and 0 < b < 1/2")
    {
        Schedule bad = s;
        bad.a = 0.6;
        CHECK_FALSE(validate_schedule(bad).accepted);
        bad = s;
        bad.b = 0.5;
        CHECK_FALSE(validate_schedule(bad).accepted);
    }
    SUBCASE("unbounded mode needs 0 < b < 1/2 < a and a + b < 1")
    {
        Schedule u{0.2, 0.1, 0.6, 0.3, 0.0, ScheduleMode::UnboundedX};
        CHECK(validate_schedule(u).accepted);
        u.b = 0.45;
        const auto rep = validate_schedule(u);
        CHECK_FALSE(rep.accepted);
        CHECK_FALSE(rep.violations.empty());
        u.b = 0.3;
        u.a = 0.5;
        CHECK_FALSE(validate_schedule(u).accepted);
    }
    SUBCASE("r and initial values")
    {
        Schedule bad = s;
        bad.r = 1.0;
        CHECK_FALSE(validate_schedule(bad).accepted);
        bad = s;
        bad.gamma0 = 0.0;
        CHECK_FALSE(validate_schedule(bad).accepted);
    }
    CHECK(parse_schedule_mode(to_string(ScheduleMode::UnboundedX)) == ScheduleMode::UnboundedX);
    CHECK_THROWS(parse_schedule_mode("sideways"));
}

TEST_CASE("block sampling follows the probabilities")
{
    const BlockStructure st({1, 1, 1}, {0.2, 0.5, 0.3});
    Rng rng(42);
    const int n = 200000;
    std::map<std::size_t, int> counts;
    for (int t = 0; t < n; ++t) ++counts[sample_block(st, rng)];
    for (std::size_t i = 0; i < 3; ++i) {
        const double p = st.prob(i);
        const double se = std::sqrt(p * (1 - p) / n);
        CHECK(std::abs(counts[i] / double(n) - p) < 4 * se);
    }
    const auto single = BlockStructure::uniform(1, 3);
    CHECK(sample_block(single, rng) == 0);
}

TEST_CASE("block distance weights by inverse probabilities")
{
    const BlockStructure st({1, 1}, {0.25, 0.75});
    Vector x(2), y(2);
    x << 1, 1;
    y << 0, 0;
    CHECK(block_distance(st, x, y) == doctest::Approx(4.0 + 1.0 / 0.75));
}

TEST_CASE("seed derivation is stable and spreads")
{
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
    CHECK(hash_string("cell") == hash_string("cell"));
    CHECK(hash_string("a") != hash_string("b"));
    // FNV-1a of the empty string is the offset basis
    CHECK(hash_string("") == 14695981039346656037ULL);
}

TEST_CASE("weighted average recursion equals the explicit weighted mean")
{
    const double r = 0.5;
    const Schedule s{0.3, 1.0, 0.5, 0.25, r, ScheduleMode::BoundedX};
    Rng rng(1);
    std::normal_distribution<double> nd;
    std::vector<Vector> xs;
    for (int k = 0; k < 50; ++k) {
        Vector x(3);
        for (int i = 0; i < 3; ++i) x[i] = nd(rng);
        xs.push_back(x);
    }
    WeightedAverage avg(xs[0], stepsize(s, 0), r);
    for (std::size_t k = 1; k < xs.size(); ++k) update_average(avg, xs[k], stepsize(s, k), r);

    Vector num = Vector::Zero(3);
    double den = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double w = std::pow(stepsize(s, k), r);
        num += w * xs[k];
        den += w;
    }
    CHECK((avg.xbar - num / den).norm() < 1e-12);
    CHECK(avg.weight_sum == doctest::Approx(den));

    // r = 0 gives the plain arithmetic mean
    WeightedAverage plain(xs[0], 0.3, 0.0);
    Vector sum = xs[0];
    for (std::size_t k = 1; k < 10; ++k) {
        update_average(plain, xs[k], 0.1, 0.0);
        sum += xs[k];
    }
    CHECK((plain.xbar - sum / 10.0).norm() < 1e-12);
}
