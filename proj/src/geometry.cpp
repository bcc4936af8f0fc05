#include "pinnhs/geometry.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace pinnhs {

void validate_geometry(const RigGeometry& g) {
    if (g.x_n <= 0) throw GeometryError("x_n must be positive");
    if (g.depth <= 0) throw GeometryError("depth must be positive");
    if (!(0.0 <= g.x_a && g.x_a < g.x_b && g.x_b <= g.x_n)) {
        throw GeometryError("flux footprint must satisfy 0 <= x_a < x_b <= x_n");
    }
    double y = 0.0;
    for (int i = 0; i < 5; ++i) {
        const LayerSpec& L = g.layers[i];
        if (L.id != i) throw GeometryError("layers must be ordered with ids 0..4");
        if (L.k <= 0) throw GeometryError("layer conductivity must be positive");
        if (std::abs(L.y_bottom - y) > 1e-12) {
            throw GeometryError("layers must tile [0, y_n] without gaps or overlap");
        }
        if (L.y_top <= L.y_bottom) throw GeometryError("layer must have positive thickness");
        y = L.y_top;
    }
    for (int p = 0; p < 6; ++p) {
        const PipeSpec& P = g.pipes[p];
        if (P.id != p + 1) throw GeometryError("pipes must be ordered with ids 1..6");
        if (!(0 < P.r_inner && P.r_inner < P.r_outer)) {
            throw GeometryError("pipe radii must satisfy 0 < r_inner < r_outer");
        }
        if (P.k_pipe <= 0) throw GeometryError("pipe conductivity must be positive");
        const LayerSpec& cold = g.layers[0];
        if (P.y_c - P.r_outer <= cold.y_bottom || P.y_c + P.r_outer >= cold.y_top ||
            P.x_c - P.r_outer <= 0.0 || P.x_c + P.r_outer >= g.x_n) {
            throw GeometryError("pipe circles must lie strictly inside the cold plate");
        }
    }
}

RigGeometry default_rig() {
    RigGeometry g;
    const double t_cold = 0.0127;
    const double t_pgs = 0.0001;
    const double t_al = 0.00635;
    double y = 0.0;
    const double ks[5] = {200.0, 0.842, 142.0, 0.842, 142.0};
    const double ts[5] = {t_cold, t_pgs, t_al, t_pgs, t_al};
    for (int i = 0; i < 5; ++i) {
        g.layers[i] = {i, ks[i], y, y + ts[i]};
        y += ts[i];
    }
    g.x_n = 0.3;
    g.depth = 0.3;
    g.x_a = 0.075;
    g.x_b = 0.225;
    for (int p = 0; p < 6; ++p) {
        const double xc = (p + 0.5) * g.x_n / 6.0;
        g.pipes[p] = {p + 1, xc, t_cold / 2.0, 0.0058, 0.005, 16.2};
    }
    validate_geometry(g);
    return g;
}

RigGeometry load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open geometry file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError("geometry file is not valid JSON: " + std::string(e.what()));
    }
    auto need = [&](const char* field) -> const nlohmann::json& {
        if (!j.contains(field)) throw SchemaError(std::string("geometry missing field: ") + field);
        return j.at(field);
    };
    RigGeometry g;
    g.x_n = need("x_n_m").get<double>();
    g.depth = need("depth_m").get<double>();
    g.x_a = need("x_a_m").get<double>();
    g.x_b = need("x_b_m").get<double>();
    const auto& layers = need("layers");
    if (!layers.is_array() || layers.size() != 5) throw SchemaError("geometry needs 5 layers");
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& L = layers[i];
        g.layers[i].id = L.at("id").get<int>();
        g.layers[i].k = L.at("k_w_mk").get<double>();
        g.layers[i].y_bottom = L.at("y_bottom_m").get<double>();
        g.layers[i].y_top = L.at("y_top_m").get<double>();
    }
    const auto& pipes = need("pipes");
    if (!pipes.is_array() || pipes.size() != 6) throw SchemaError("geometry needs 6 pipes");
    for (std::size_t p = 0; p < 6; ++p) {
        const auto& P = pipes[p];
        g.pipes[p].id = P.at("id").get<int>();
        g.pipes[p].x_c = P.at("x_c_m").get<double>();
        g.pipes[p].y_c = P.at("y_c_m").get<double>();
        g.pipes[p].r_outer = P.at("r_outer_m").get<double>();
        g.pipes[p].r_inner = P.at("r_inner_m").get<double>();
        g.pipes[p].k_pipe = P.value("k_w_mk", 16.2);
    }
    validate_geometry(g);
    return g;
}

void save_geometry(const RigGeometry& g, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["x_n_m"] = g.x_n;
    j["depth_m"] = g.depth;
    j["x_a_m"] = g.x_a;
    j["x_b_m"] = g.x_b;
    for (const auto& L : g.layers) {
        j["layers"].push_back({{"id", L.id},
                               {"k_w_mk", L.k},
                               {"y_bottom_m", L.y_bottom},
                               {"y_top_m", L.y_top}});
    }
    for (const auto& P : g.pipes) {
        j["pipes"].push_back({{"id", P.id},
                              {"x_c_m", P.x_c},
                              {"y_c_m", P.y_c},
                              {"r_outer_m", P.r_outer},
                              {"r_inner_m", P.r_inner},
                              {"k_w_mk", P.k_pipe}});
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write geometry file: " + path);
    out << j.dump(1, '\t') << "\n";
}

NondimScales make_scales(const RigGeometry& g, double u_0_kelvin) {
    if (u_0_kelvin <= 0) throw ConfigError("U0 must be a positive absolute temperature");
    return {g.x_n, g.y_n(), u_0_kelvin};
}

double flux_per_depth(double q_pp, double k_top) {
    if (k_top <= 0) throw ConfigError("top-layer conductivity must be positive");
    return q_pp / k_top;
}

double flux_star(double alpha, const NondimScales& s) { return alpha * s.y_l / s.u_0; }

bool inside_layer(const RigGeometry& g, int layer_id, Point2 p) {
    const LayerSpec& L = g.layer(layer_id);
    if (p.x < 0.0 || p.x > g.x_n) return false;
    if (p.y < L.y_bottom || p.y > L.y_top) return false;
    if (layer_id == 0 && inside_any_pipe(g, p)) return false;
    return true;
}

bool inside_pipe_wall(const RigGeometry& g, int pipe_id1, Point2 p) {
    const PipeSpec& P = g.pipe(pipe_id1);
    const double dx = p.x - P.x_c;
    const double dy = p.y - P.y_c;
    const double r2 = dx * dx + dy * dy;
    return r2 >= P.r_inner * P.r_inner && r2 <= P.r_outer * P.r_outer;
}

bool inside_any_pipe(const RigGeometry& g, Point2 p) {
    for (const auto& P : g.pipes) {
        const double dx = p.x - P.x_c;
        const double dy = p.y - P.y_c;
        if (dx * dx + dy * dy < P.r_outer * P.r_outer) return true;
    }
    return false;
}

}  // namespace pinnhs
