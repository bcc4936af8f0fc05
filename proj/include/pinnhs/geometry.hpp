#pragma once

#include <array>
#include <string>
#include <vector>

#include "pinnhs/errors.hpp"

namespace pinnhs {

struct Point2 {
    double x = 0, y = 0;
};

// One material layer of the stack, bottom (cold plate, id 0) to top (id 4).
struct LayerSpec {
    int id = 0;
    double k = 0;        // W/(m·K)
    double y_bottom = 0; // m
    double y_top = 0;    // m
};

// One pipe pass cross-section inside the cold plate.
struct PipeSpec {
    int id = 1;  // p1..p6
    double x_c = 0, y_c = 0;  // m
    double r_outer = 0;       // m
    double r_inner = 0;       // m
    double k_pipe = 16.2;     // stainless steel, W/(m·K)
};

// Full cross-section: five layers, six pipes, flux footprint [x_a, x_b] on
// the top face. depth is the out-of-plane extent used to turn the case power
// into a flux per area.
struct RigGeometry {
    std::array<LayerSpec, 5> layers;
    std::array<PipeSpec, 6> pipes;
    double x_n = 0;   // m
    double x_a = 0;   // m
    double x_b = 0;   // m
    double depth = 0; // m

    double y_n() const { return layers[4].y_top; }
    const LayerSpec& layer(int id) const { return layers[static_cast<std::size_t>(id)]; }
    const PipeSpec& pipe(int id1) const { return pipes[static_cast<std::size_t>(id1 - 1)]; }
};

// Checks the tiling/ordering invariants; throws GeometryError.
void validate_geometry(const RigGeometry& g);

// Documented default rig (the paper gives no absolute dimensions): cold plate
// 12.7 mm with six evenly spaced pipe passes (r_inner 5 mm, wall 0.8 mm), PGS
// 0.1 mm, aluminum plates 6.35 mm, plate 0.3 m wide and deep, heated footprint
// the centered middle half of the top face.
RigGeometry default_rig();

RigGeometry load_geometry(const std::string& path);
void save_geometry(const RigGeometry& g, const std::string& path);

// --- non-dimensionalization -------------------------------------------------

struct NondimScales {
    double x_l = 0;  // m
    double y_l = 0;  // m
    double u_0 = 0;  // K (absolute)
};

// Defaults: x_l = x_n, y_l = y_n (domain maps to the unit square) and
// u_0 = the case's coolant inlet temperature in kelvin.
NondimScales make_scales(const RigGeometry& g, double u_0_kelvin);

inline Point2 nondim_point(Point2 p, const NondimScales& s) {
    return {p.x / s.x_l, p.y / s.y_l};
}
inline Point2 redim_point(Point2 p_star, const NondimScales& s) {
    return {p_star.x * s.x_l, p_star.y * s.y_l};
}
inline double nondim_temp(double u_kelvin, const NondimScales& s) {
    return (u_kelvin - s.u_0) / s.u_0;
}
inline double redim_temp(double u_star, const NondimScales& s) {
    return s.u_0 * (1.0 + u_star);
}

inline double celsius_to_kelvin(double c) { return c + 273.15; }
inline double kelvin_to_celsius(double k) { return k - 273.15; }

// Dimensionless conductivities as defined by the governing equations:
// k* = k·U0/(x_l²·y_l²) multiplies the PDE residual, k̂* = k·U0/y_l the
// interface and Robin fluxes.
inline double k_star(double k, const NondimScales& s) {
    return k * s.u_0 / (s.x_l * s.x_l * s.y_l * s.y_l);
}
inline double k_hat_star(double k, const NondimScales& s) { return k * s.u_0 / s.y_l; }

// Flux per unit depth alpha = q''/k_top and its dimensionless form
// alpha* = alpha·y_l/U0.
double flux_per_depth(double q_pp, double k_top);
double flux_star(double alpha, const NondimScales& s);

// --- membership predicates ---------------------------------------------------

bool inside_layer(const RigGeometry& g, int layer_id, Point2 p);
// Inside the annulus (pipe wall) of the given pipe.
bool inside_pipe_wall(const RigGeometry& g, int pipe_id1, Point2 p);
// Inside the outer circle (wall or water) of any pipe.
bool inside_any_pipe(const RigGeometry& g, Point2 p);

}  // namespace pinnhs
