#pragma once

#include <vector>

#include "pinnhs/case_config.hpp"
#include "pinnhs/geometry.hpp"

namespace pinnhs {

// Rectangular plate with a hot left face, insulated top/bottom, and a
// convective right face: the inverse problem with a closed-form answer.
struct ToyPlateProblem {
    double w = 0.1;        // m
    double h_height = 0.1; // m
    double k = 20.0;       // W/(m·K)
    double t0_c = 100.0;   // left-face temperature
    double t_inf_c = 25.0; // ambient/coolant temperature
    double h_true = 100.0; // W/m²K

    void validate() const;
};

// T(x) = −h(T0 − T∞)/(k + hW)·x + T0, in °C.
double toy_exact_temperature(const ToyPlateProblem& p, double x);

// h = (T0 − T(W))·k / (W·(T(W) − T∞)); exact inverse of the profile at x = W.
double toy_invert_h(const ToyPlateProblem& p, double t_w_c);

// --- finite-difference forward solver -----------------------------------------
//
// Cell-centered 5-point scheme with harmonic face conductances, periodic
// left/right coupling, insulated bottom and top segments, a prescribed flux
// on [x_a, x_b], and a Robin condition toward t_w (through the half-cell
// resistance) on faces bordering the coolant. Pipe circles are rasterized by
// cell-center membership. Rows are allocated per layer (at least 3 each), so
// the sub-millimeter interface sheets stay resolved at any nominal
// resolution; ny is the target total row count.

struct FdConfig {
    int nx = 256;
    int ny = 128;       // target; per-layer minimums may add a few rows
    double tol = 1e-8;  // relative residual
    int max_iter = 60000;
    enum class Solver { kCG, kJacobi } solver = Solver::kCG;
};

struct FdSolution {
    int nx = 0, ny = 0;
    double dx = 0;
    std::vector<double> y_centers;  // per row
    std::vector<double> y_heights;  // per row
    double x_extent = 0, y_extent = 0;
    std::vector<double> temp_k;  // nx*ny cell centers; coolant cells hold t_w
    std::vector<int> region;     // -1 coolant, 0..4 layer, 5 pipe wall
    int iterations = 0;
    double residual_norm = 0;
    double flux_in_w_per_m = 0;    // discrete heat entering through the flux segment
    double robin_out_w_per_m = 0;  // discrete heat extracted across the pipes

    double at(int i, int j) const { return temp_k[static_cast<std::size_t>(j) * nx + i]; }
};

FdSolution fd_solve(const RigGeometry& geom, const CaseConfig& c, double h, const FdConfig& cfg);

// Single-material slab of size width × height with flux q'' on the whole top
// face and a Robin condition (h, t_w) on the whole bottom face; verifies the
// scheme against the 1-D closed form T(y) = t_w + q''/h + q''·y/k.
FdSolution fd_solve_slab(double width, double height, double k, double q_pp, double h,
                         double t_w_k, const FdConfig& cfg);

// Bilinear interpolation between cell centers (clamped at the domain edge).
double fd_probe(const FdSolution& sol, Point2 p_m);

}  // namespace pinnhs
