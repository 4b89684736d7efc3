#include <catch_amalgamated.hpp>

#include <cmath>

#include "relvac/grid.hpp"

using namespace relvac;

TEST_CASE("grid construction and invariants") {
    Grid g(64, 0.1);
    REQUIRE(g.n_nodes() == 65);
    REQUIRE(g.x[0] == 0.0);
    REQUIRE(g.x[64] == 1.0);
    REQUIRE(g.dx * g.n_cells == Catch::Approx(1.0).epsilon(1e-15));
    for (int i = 1; i <= 64; ++i)
        REQUIRE(g.x[i] > g.x[i - 1]);

    REQUIRE_THROWS_AS(Grid(3), std::invalid_argument);
    REQUIRE_THROWS_AS(Grid(64, 0.3), std::invalid_argument);
    REQUIRE_THROWS_AS(Grid(64, 0.0), std::invalid_argument);
}

TEST_CASE("deriv: constants and quadratics are exact") {
    for (int n : {16, 100}) {
        Grid g(n);
        field c(g.n_nodes(), 3.0);
        for (double v : deriv(c, g))
            REQUIRE(v == 0.0);

        field q(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i)
            q[i] = g.x[i] * g.x[i];
        const field dq = deriv(q, g);
        for (int i = 0; i < g.n_nodes(); ++i)
            REQUIRE(std::fabs(dq[i] - 2.0 * g.x[i]) <= 1e-12);
    }
}

TEST_CASE("deriv: second order on sin") {
    double err[3];
    const int grids[3] = {64, 128, 256};
    for (int k = 0; k < 3; ++k) {
        Grid g(grids[k]);
        field f(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i)
            f[i] = std::sin(g.x[i]);
        const field df = deriv(f, g);
        double e = 0.0;
        for (int i = 0; i < g.n_nodes(); ++i)
            e = std::max(e, std::fabs(df[i] - std::cos(g.x[i])));
        err[k] = e;
    }
    const double p1 = std::log2(err[0] / err[1]);
    const double p2 = std::log2(err[1] / err[2]);
    REQUIRE(p1 == Catch::Approx(2.0).margin(0.1));
    REQUIRE(p2 == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("deriv4: constants, cubics and quartics") {
    for (int n : {16, 100}) {
        Grid g(n);
        field c(g.n_nodes(), 2.5);
        for (double v : deriv4(c, g))
            REQUIRE(v == 0.0);

        field cubic(g.n_nodes()), quartic(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i) {
            const double x = g.x[i];
            cubic[i] = 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x;
            quartic[i] = x * x * x * x;
        }
        const field dc = deriv4(cubic, g);
        const field dq = deriv4(quartic, g);
        for (int i = 0; i < g.n_nodes(); ++i) {
            const double x = g.x[i];
            REQUIRE(dc[i] == Catch::Approx(-2.0 + x + 9.0 * x * x).margin(1e-11));
            REQUIRE(dq[i] == Catch::Approx(4.0 * x * x * x).margin(1e-11));
        }
    }
}

TEST_CASE("deriv: shape mismatch") {
    Grid g(16);
    field f(10, 1.0);
    REQUIRE_THROWS_AS(deriv(f, g), std::invalid_argument);
    REQUIRE_THROWS_AS(integrate(f, g), std::invalid_argument);
}

TEST_CASE("integrate: affine exactness and the distance function") {
    Grid g(64);
    field ones(g.n_nodes(), 1.0);
    REQUIRE(integrate(ones, g) == Catch::Approx(1.0).epsilon(1e-15));

    REQUIRE(integrate(g.x, g) == Catch::Approx(0.5).epsilon(1e-15));

    const field d = distance_to_boundary(g);
    REQUIRE(integrate(d, g) == Catch::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("deriv/integrate fundamental theorem") {
    Grid g(128);

    SECTION("quadratics: exact") {
        field f(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i)
            f[i] = 1.7 - 0.3 * g.x[i] + 2.1 * g.x[i] * g.x[i];
        const double lhs = integrate(deriv(f, g), g);
        REQUIRE(std::fabs(lhs - (f[g.n_cells] - f[0])) <= 1e-13);
    }

    SECTION("fields symmetric about the midpoint: exact") {
        field f(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i)
            f[i] = std::cos(2.0 * M_PI * g.x[i]) + std::exp(-8.0 * (g.x[i] - 0.5) * (g.x[i] - 0.5));
        const double lhs = integrate(deriv(f, g), g);
        REQUIRE(std::fabs(lhs - (f[g.n_cells] - f[0])) <= 1e-12);
    }

    SECTION("generic smooth field: residual decays at order >= 2") {
        double res[3];
        const int grids[3] = {32, 64, 128};
        for (int k = 0; k < 3; ++k) {
            Grid gk(grids[k]);
            field f(gk.n_nodes());
            for (int i = 0; i < gk.n_nodes(); ++i)
                f[i] = gk.x[i] * gk.x[i] * gk.x[i] + std::sin(gk.x[i]);
            res[k] = std::fabs(integrate(deriv(f, gk), gk) - (f[gk.n_cells] - f[0]));
        }
        REQUIRE(res[0] / res[1] >= 3.4);
        REQUIRE(res[1] / res[2] >= 3.4);
    }
}

TEST_CASE("cutoff functions") {
    Grid g(64, 0.125);  // 1.5*delta and delta/2 are grid nodes
    const field xi = cutoff_interior(g);
    const field chi = cutoff_boundary(g);

    SECTION("plateau values") {
        REQUIRE(xi[0] == 1.0);
        for (int i = 0; i < g.n_nodes(); ++i) {
            if (g.x[i] <= g.delta)
                REQUIRE(xi[i] == 1.0);
            if (g.x[i] >= 2.0 * g.delta)
                REQUIRE(xi[i] == 0.0);
            if (g.x[i] >= g.delta)
                REQUIRE(chi[i] == 1.0);
            if (g.x[i] <= 0.5 * g.delta)
                REQUIRE(chi[i] == 0.0);
        }
        REQUIRE(chi[g.n_cells] == 1.0);
    }

    SECTION("midpoint of the transition") {
        const int mid = int(std::lround(1.5 * g.delta * g.n_cells));
        REQUIRE(g.x[mid] == Catch::Approx(1.5 * g.delta).epsilon(1e-15));
        REQUIRE(xi[mid] == Catch::Approx(0.5).epsilon(1e-15));
    }

    SECTION("range, monotonicity, slope bound, covering") {
        const field dxi = deriv(xi, g);
        const field dchi = deriv(chi, g);
        for (int i = 0; i < g.n_nodes(); ++i) {
            REQUIRE(xi[i] >= 0.0);
            REQUIRE(xi[i] <= 1.0);
            REQUIRE(chi[i] >= 0.0);
            REQUIRE(chi[i] <= 1.0);
            REQUIRE(xi[i] + chi[i] >= 1.0);
            REQUIRE(std::fabs(dxi[i]) <= 1.5 / g.delta + 1e-9);
            REQUIRE(std::fabs(dchi[i]) <= 3.0 / g.delta + 1e-9);
        }
        for (int i = 1; i < g.n_nodes(); ++i) {
            REQUIRE(xi[i] <= xi[i - 1]);
            REQUIRE(chi[i] >= chi[i - 1]);
        }
    }
}

TEST_CASE("determinism of grid operations") {
    Grid g(64);
    field f(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i)
        f[i] = std::sin(3.0 * g.x[i]) + 0.2 * g.x[i];
    const field a = deriv(f, g);
    const field b = deriv(f, g);
    for (int i = 0; i < g.n_nodes(); ++i)
        REQUIRE(a[i] == b[i]);
    REQUIRE(integrate(f, g) == integrate(f, g));
}
