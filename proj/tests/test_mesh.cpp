#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "caginalp/mesh.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace caginalp;

TEST_CASE("grid invariants") {
    auto g = Grid::interval(1.0, 41);
    CHECK(g->dim() == 1);
    CHECK(g->node_count() == 41);
    CHECK(g->spacing(0) == doctest::Approx(0.025));
    CHECK(g->measure() == doctest::Approx(1.0));

    auto g2 = Grid::rectangle(2.0, 1.0, 5, 9);
    CHECK(g2->node_count() == 45);
    CHECK(g2->measure() == doctest::Approx(2.0));
    CHECK(g2->x_of(6) == doctest::Approx(0.5));  // idx 6 = (ix=1, iy=1)
    CHECK(g2->y_of(6) == doctest::Approx(0.125));

    CHECK_THROWS_AS(Grid::interval(1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Grid::interval(-1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(Grid::rectangle(1.0, 1.0, 3, 2), std::invalid_argument);
}

TEST_CASE("field and trajectory invariants") {
    auto g = Grid::interval(1.0, 5);
    CHECK_THROWS_AS(Field(g, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(Trajectory(g, -0.1, 4), std::invalid_argument);
    CHECK_THROWS_AS(Trajectory(g, 0.1, 0), std::invalid_argument);
    Trajectory t(g, 0.1, 4, 1.5);
    CHECK(t.steps() == 4);
    CHECK(t.duration() == doctest::Approx(0.4));
    CHECK(t.frame(4)[2] == 1.5);
}

TEST_CASE("laplacian stencil with mirrored ghosts") {
    // values [1,2,4] with h=1: (2-2*1+2)=2, (1-4+4)=1, (2-8+2)=-4
    auto g = Grid::interval(2.0, 3);
    Field f(g, std::vector<double>{1.0, 2.0, 4.0});
    Field lap = laplacian_neumann(f);
    CHECK(lap[0] == doctest::Approx(2.0));
    CHECK(lap[1] == doctest::Approx(1.0));
    CHECK(lap[2] == doctest::Approx(-4.0));
}

TEST_CASE("laplacian of constants vanishes exactly") {
    for (const GridPtr& g : {Grid::interval(1.0, 17), Grid::rectangle(1.0, 2.0, 9, 13)}) {
        Field lap = laplacian_neumann(Field(g, 3.7));
        for (int i = 0; i < lap.size(); ++i) CHECK(lap[i] == 0.0);
    }
}

TEST_CASE("laplacian approximates the second derivative of a cosine mode") {
    auto g = Grid::interval(1.0, 201);
    Field f(g);
    for (int i = 0; i < f.size(); ++i) f[i] = std::cos(M_PI * g->x_of(i));
    Field lap = laplacian_neumann(f);
    double worst = 0.0;
    for (int i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(lap[i] + M_PI * M_PI * f[i]));
    CHECK(worst < 1e-3);
}

TEST_CASE("omega norms") {
    auto g = Grid::interval(1.0, 11);
    CHECK(norm_lp_omega(Field(g, 2.0), 2.0) == doctest::Approx(2.0));
    CHECK(norm_lp_omega(Field(g, 0.0), 3.5) == 0.0);
    CHECK_THROWS_AS(norm_lp_omega(Field(g, 1.0), 0.5), std::invalid_argument);

    auto g2 = Grid::interval(1.0, 1001);
    Field x(g2);
    for (int i = 0; i < x.size(); ++i) x[i] = g2->x_of(i);
    CHECK(norm_lp_omega(x, 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-5));
}

TEST_CASE("space-time norms") {
    auto g = Grid::interval(1.0, 11);
    CHECK(norm_lp_q(Trajectory(g, 0.1, 10, 3.0), 2.0) == doctest::Approx(3.0));
    CHECK(norm_lp_q(Trajectory(g, 0.1, 10, 0.0), 4.0) == 0.0);

    // e^{-t} in time, constant in space, T = 1
    const int steps = 1000;
    Trajectory e(g, 1e-3, steps, 0.0);
    for (int k = 0; k <= steps; ++k)
        for (int i = 0; i < e.frame(k).size(); ++i)
            e.frame(k)[i] = std::exp(-e.time_of(k));
    const double exact = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
    CHECK(norm_lp_q(e, 2.0) == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("h1 seminorm") {
    auto g = Grid::interval(1.0, 101);
    CHECK(h1_seminorm(Field(g, 5.0)) == 0.0);

    Field x(g);
    for (int i = 0; i < x.size(); ++i) x[i] = g->x_of(i);
    CHECK(h1_seminorm(x) == doctest::Approx(1.0).epsilon(1e-10));

    auto g2 = Grid::interval(1.0, 201);
    Field c(g2);
    for (int i = 0; i < c.size(); ++i) c[i] = std::cos(M_PI * g2->x_of(i));
    CHECK(h1_seminorm(c) == doctest::Approx(std::sqrt(M_PI * M_PI / 2.0)).epsilon(5e-4));
}

TEST_CASE("mean") {
    auto g = Grid::interval(1.0, 101);
    CHECK(mean(Field(g, -2.5)) == doctest::Approx(-2.5));
    CHECK(mean(Field(g, 0.0)) == 0.0);
    Field x(g);
    for (int i = 0; i < x.size(); ++i) x[i] = g->x_of(i);
    CHECK(mean(x) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("laplacian is self-adjoint and negative semidefinite in the weighted product") {
    for (const GridPtr& g : {Grid::interval(1.3, 23), Grid::rectangle(1.0, 0.7, 11, 7)}) {
        for (uint64_t seed : {1, 2, 3}) {
            Field f = test_helpers::random_field(g, seed);
            Field h = test_helpers::random_field(g, seed + 100);
            const double lhs = inner_product_omega(laplacian_neumann(f), h);
            const double rhs = inner_product_omega(f, laplacian_neumann(h));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
            CHECK(inner_product_omega(laplacian_neumann(f), f) <=
                  1e-12 * inner_product_omega(f, f));
        }
    }
}

TEST_CASE("discrete divergence theorem: weighted sum of the laplacian vanishes") {
    for (const GridPtr& g : {Grid::interval(1.0, 31), Grid::rectangle(2.0, 1.0, 13, 9)}) {
        Field f = test_helpers::random_field(g, 7);
        Field lap = laplacian_neumann(f);
        double sum = 0.0, scale = 0.0;
        for (int i = 0; i < lap.size(); ++i) {
            sum += lap[i] * g->quad_weight(i);
            scale += std::abs(lap[i]) * g->quad_weight(i);
        }
        CHECK(std::abs(sum) <= 1e-12 * std::max(scale, 1.0));
    }
}

TEST_CASE("norms are absolutely homogeneous and satisfy the triangle inequality") {
    auto g = Grid::interval(1.0, 41);
    for (double p : {1.0, 2.0, 3.5, 6.0}) {
        for (uint64_t seed : {11, 12, 13}) {
            Field f = test_helpers::random_field(g, seed);
            Field h = test_helpers::random_field(g, seed + 50);
            const double alpha = -2.75;
            Field af = linear_combination(alpha, f, 0.0, f);
            CHECK(norm_lp_omega(af, p) ==
                  doctest::Approx(std::abs(alpha) * norm_lp_omega(f, p)).epsilon(1e-12));
            CHECK(norm_lp_omega(linear_combination(1.0, f, 1.0, h), p) <=
                  norm_lp_omega(f, p) + norm_lp_omega(h, p) + 1e-12);
        }
    }
}

TEST_CASE("csv snapshot round-trip") {
    auto g = Grid::interval(1.5, 9);
    Trajectory t(g, 0.25, 3, 0.0);
    for (int k = 0; k <= 3; ++k)
        for (int i = 0; i < t.frame(k).size(); ++i)
            t.frame(k)[i] = std::sin(1.0 + k) * (i + 0.137) / 7.0;

    std::stringstream ss;
    write_csv(ss, t);
    Trajectory back = read_trajectory_csv(ss);
    REQUIRE(back.steps() == t.steps());
    CHECK(back.dt() == doctest::Approx(t.dt()));
    CHECK(back.grid()->nodes(0) == 9);
    CHECK(back.grid()->extent(0) == doctest::Approx(1.5));
    for (int k = 0; k <= 3; ++k)
        for (int i = 0; i < t.frame(k).size(); ++i)
            CHECK(back.frame(k)[i] == t.frame(k)[i]);  // full-precision decimals
}

TEST_CASE("csv snapshot round-trip in 2-D") {
    auto g = Grid::rectangle(1.0, 2.0, 5, 7);
    Trajectory t(g, 0.5, 2, 0.0);
    for (int k = 0; k <= 2; ++k)
        for (int i = 0; i < t.frame(k).size(); ++i) t.frame(k)[i] = k * 100.0 + i * 0.001;
    std::stringstream ss;
    write_csv(ss, t);
    Trajectory back = read_trajectory_csv(ss);
    REQUIRE(back.grid()->dim() == 2);
    CHECK(back.grid()->nodes(0) == 5);
    CHECK(back.grid()->nodes(1) == 7);
    CHECK(back.grid()->extent(1) == doctest::Approx(2.0));
    for (int k = 0; k <= 2; ++k)
        for (int i = 0; i < t.frame(k).size(); ++i) CHECK(back.frame(k)[i] == t.frame(k)[i]);
}
