#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pinnhs/case_config.hpp"
#include "pinnhs/oracle.hpp"

using namespace pinnhs;

TEST_CASE("toy plate closed forms") {
    ToyPlateProblem p;  // W=0.1, k=20, T0=100, Tinf=25
    p.h_true = 100.0;
    CHECK(toy_exact_temperature(p, 0.0) == 100.0);
    CHECK(toy_exact_temperature(p, p.w) == doctest::Approx(75.0).epsilon(1e-14));

    ToyPlateProblem p0 = p;
    p0.h_true = 0.0;
    CHECK(toy_exact_temperature(p0, 0.05) == 100.0);  // no convection, uniform

    // inverse pair at h = 1000
    ToyPlateProblem p1 = p;
    p1.h_true = 1000.0;
    const double tw = toy_exact_temperature(p1, p1.w);
    CHECK(std::abs(toy_invert_h(p1, tw) - 1000.0) / 1000.0 < 1e-10);

    CHECK(toy_invert_h(p, 75.0) == doctest::Approx(100.0).epsilon(1e-12));

    // T(W) -> T0 limit drives h -> 0
    CHECK(toy_invert_h(p, 99.9999) < 1e-3);
    CHECK_THROWS_AS(toy_invert_h(p, 24.0), UnphysicalError);
}

TEST_CASE("inverse identity over four decades of h") {
    ToyPlateProblem p;
    for (int i = 0; i <= 100; ++i) {
        const double h = std::pow(10.0, 5.0 * i / 100.0);
        p.h_true = h;
        const double back = toy_invert_h(p, toy_exact_temperature(p, p.w));
        CHECK(std::abs(back - h) / h < 1e-10);
    }
}

TEST_CASE("slab solve matches the 1-D closed form everywhere") {
    const double k = 20.0, q_pp = 5000.0, h = 800.0, t_w = 285.0;
    const double height = 0.02;
    FdConfig cfg;
    cfg.nx = 16;
    cfg.ny = 64;
    const FdSolution sol = fd_solve_slab(0.05, height, k, q_pp, h, t_w, cfg);
    auto exact = [&](double y) { return t_w + q_pp / h + q_pp * y / k; };
    for (int j = 0; j < sol.ny; ++j) {
        for (int i = 0; i < sol.nx; ++i) {
            const double y = sol.y_centers[static_cast<std::size_t>(j)];
            const double rel = std::abs(sol.at(i, j) - exact(y)) / exact(y);
            CHECK(rel < 1e-3);
        }
    }
    // discrete energy balance closes
    CHECK(std::abs(sol.flux_in_w_per_m - sol.robin_out_w_per_m) <
          1e-6 * std::abs(sol.flux_in_w_per_m));
}

TEST_CASE("zero flux relaxes to the coolant temperature") {
    const FdSolution sol = fd_solve_slab(0.05, 0.02, 20.0, 0.0, 800.0, 285.0, FdConfig{8, 8});
    for (double t : sol.temp_k) CHECK(t == doctest::Approx(285.0).epsilon(1e-12));
}

namespace {
CaseConfig fd_case() {
    CaseConfig c;
    c.case_id = "fd";
    c.power_w = 259.2;
    c.t_in_c = 10.0226;
    c.t_out_c = 12.5535;
    c.r_pipe_m = 0.005;
    return c;
}
}  // namespace

TEST_CASE("full-rig solve: energy balance and grid convergence") {
    const RigGeometry g = default_rig();
    const CaseConfig c = fd_case();
    FdConfig cfg;
    cfg.nx = 128;
    cfg.ny = 64;
    const FdSolution a = fd_solve(g, c, 2900.0, cfg);
    CHECK(std::abs(a.flux_in_w_per_m - a.robin_out_w_per_m) <
          0.01 * std::abs(a.flux_in_w_per_m));

    FdConfig cfg2;
    cfg2.nx = 256;
    cfg2.ny = 128;
    const FdSolution b = fd_solve(g, c, 2900.0, cfg2);
    const double max_a = *std::max_element(a.temp_k.begin(), a.temp_k.end());
    const double max_b = *std::max_element(b.temp_k.begin(), b.temp_k.end());
    CHECK(std::abs(max_a - max_b) / (max_b - c.t_w_k()) < 0.03);

    // hottest column sits inside the heated footprint
    int hot_i = 0, hot_j = 0;
    for (int j = 0; j < b.ny; ++j) {
        for (int i = 0; i < b.nx; ++i) {
            if (b.at(i, j) > b.at(hot_i, hot_j)) {
                hot_i = i;
                hot_j = j;
            }
        }
    }
    const double hot_x = (hot_i + 0.5) * b.dx;
    CHECK(hot_x >= g.x_a);
    CHECK(hot_x <= g.x_b);
}

TEST_CASE("jacobi solver agrees with CG on a small grid") {
    const double k = 20.0;
    FdConfig cg;
    cg.nx = 8;
    cg.ny = 16;
    FdConfig jac = cg;
    jac.solver = FdConfig::Solver::kJacobi;
    jac.max_iter = 2000000;
    const FdSolution a = fd_solve_slab(0.05, 0.02, k, 3000.0, 500.0, 285.0, cg);
    const FdSolution b = fd_solve_slab(0.05, 0.02, k, 3000.0, 500.0, 285.0, jac);
    for (std::size_t i = 0; i < a.temp_k.size(); ++i) {
        CHECK(a.temp_k[i] == doctest::Approx(b.temp_k[i]).epsilon(1e-5));
    }
}

TEST_CASE("fd_probe: nodal exactness, constants, and linear reproduction") {
    FdConfig cfg;
    cfg.nx = 16;
    cfg.ny = 32;
    const FdSolution sol = fd_solve_slab(0.05, 0.02, 20.0, 5000.0, 800.0, 285.0, cfg);
    // probe at a cell center returns the nodal value
    const double x5 = (5 + 0.5) * sol.dx;
    const double y7 = sol.y_centers[7];
    CHECK(fd_probe(sol, {x5, y7}) == sol.at(5, 7));

    // the slab solution is linear in y between cell centers, so bilinear
    // interpolation reproduces it exactly
    const double k = 20.0, q_pp = 5000.0, h = 800.0, t_w = 285.0;
    auto exact = [&](double y) { return t_w + q_pp / h + q_pp * y / k; };
    const double ymid = 0.5 * (sol.y_centers[3] + sol.y_centers[4]);  // between nodes
    CHECK(fd_probe(sol, {x5, ymid}) == doctest::Approx(exact(ymid)).epsilon(1e-6));

    CHECK_THROWS_AS(fd_probe(sol, {0.06, 0.01}), RangeError);

    const FdSolution flat = fd_solve_slab(0.05, 0.02, 20.0, 0.0, 800.0, 285.0, FdConfig{8, 8});
    CHECK(fd_probe(flat, {0.0123, 0.0177}) == doctest::Approx(285.0).epsilon(1e-12));
}

TEST_CASE("solution is invariant under pipe-center translation modulo the width") {
    const RigGeometry g = default_rig();
    const CaseConfig c = fd_case();
    FdConfig cfg;
    cfg.nx = 96;
    cfg.ny = 48;
    const double dx = g.x_n / cfg.nx;
    const int shift_cells = 12;
    const double shift = shift_cells * dx;

    RigGeometry g2 = g;
    for (auto& p : g2.pipes) {
        p.x_c = std::fmod(p.x_c + shift, g.x_n);
    }
    // same flux footprint shifted as well, wrapping across the seam is not
    // needed for this choice
    g2.x_a = g.x_a + shift;
    g2.x_b = g.x_b + shift;
    REQUIRE(g2.x_b <= g.x_n);

    const FdSolution a = fd_solve(g, c, 2000.0, cfg);
    const FdSolution b = fd_solve(g2, c, 2000.0, cfg);
    for (int j = 0; j < cfg.ny; ++j) {
        for (int i = 0; i < cfg.nx; ++i) {
            const int i2 = (i + shift_cells) % cfg.nx;
            CHECK(b.at(i2, j) == doctest::Approx(a.at(i, j)).epsilon(5e-6));
        }
    }
}

TEST_CASE("grid resolution guard") {
    const RigGeometry g = default_rig();
    FdConfig cfg;
    cfg.nx = 32;
    cfg.ny = 8;  // below the 3-rows-per-layer floor
    CHECK_THROWS_AS(fd_solve(g, fd_case(), 1000.0, cfg), ConfigError);
}
