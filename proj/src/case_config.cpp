#include "pinnhs/case_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

namespace pinnhs {

double CaseConfig::pipe_length(const RigGeometry& g) const {
    return pipe_length_m ? *pipe_length_m : 6.0 * g.x_n;
}

double CaseConfig::area_inner(const RigGeometry& g) const {
    return a1_m2 ? *a1_m2 : 2.0 * std::numbers::pi * r_pipe_m * pipe_length(g);
}

double CaseConfig::area_flow() const {
    return a2_m2 ? *a2_m2 : std::numbers::pi * r_pipe_m * r_pipe_m;
}

double CaseConfig::flux_per_area(const RigGeometry& g) const {
    return power_w / ((g.x_b - g.x_a) * g.depth);
}

double velocity_from_flow(double flow_rate_lpm, double a2_m2) {
    return flow_rate_lpm / 6.0e4 / a2_m2;
}

void validate_case(const CaseConfig& c) {
    if (c.case_id.empty()) throw ValidationError("case_id must not be empty");
    if (c.power_w <= 0) throw ValidationError("power_w must be positive");
    if (c.t_out_c <= c.t_in_c) {
        throw ValidationError("t_out_c must exceed t_in_c (heat is removed by the coolant)");
    }
    if (c.rho <= 0 || c.cp <= 0) throw ValidationError("fluid properties must be positive");
    if (c.r_pipe_m <= 0) throw ValidationError("r_pipe_m must be positive");
    for (const auto& [name, _] : c.probes_c) {
        if (name != "Side" && name != "Face" && name != "In1" && name != "In2") {
            throw ValidationError("unknown probe name: " + name);
        }
    }
}

CaseConfig parse_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open case file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError("case file is not valid JSON: " + std::string(e.what()));
    }
    auto need = [&](const char* field) -> const nlohmann::json& {
        if (!j.contains(field)) throw SchemaError(std::string("case missing field: ") + field);
        return j.at(field);
    };
    CaseConfig c;
    c.case_id = need("case_id").get<std::string>();
    c.power_w = need("power_w").get<double>();
    c.t_in_c = need("t_in_c").get<double>();
    c.t_out_c = need("t_out_c").get<double>();
    if (j.contains("flow_rate_lpm")) c.flow_rate_lpm = j["flow_rate_lpm"].get<double>();
    if (j.contains("amb_c")) c.amb_c = j["amb_c"].get<double>();
    c.rho = j.value("rho_kg_m3", 999.1);
    c.cp = j.value("cp_j_kgk", 4188.5);
    c.r_pipe_m = need("r_pipe_m").get<double>();
    if (j.contains("pipe_length_m")) c.pipe_length_m = j["pipe_length_m"].get<double>();
    if (j.contains("a1_m2")) c.a1_m2 = j["a1_m2"].get<double>();
    if (j.contains("a2_m2")) c.a2_m2 = j["a2_m2"].get<double>();
    if (j.contains("v_exp_mps")) c.v_exp_mps = j["v_exp_mps"].get<double>();
    if (j.contains("probes_c")) {
        for (const auto& [name, v] : j["probes_c"].items()) c.probes_c[name] = v.get<double>();
    }
    if (j.contains("data_probes")) {
        c.data_probe_names = j["data_probes"].get<std::vector<std::string>>();
    }
    if (j.contains("probe_points_m")) {
        for (const auto& [name, v] : j["probe_points_m"].items()) {
            c.probe_points_m[name] = {v.at("x").get<double>(), v.at("y").get<double>()};
        }
    }
    if (j.contains("geometry")) c.geometry_path = j["geometry"].get<std::string>();
    c.notes = j.value("notes", "");
    validate_case(c);
    return c;
}

void save_case_file(const CaseConfig& c, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["case_id"] = c.case_id;
    j["power_w"] = c.power_w;
    j["t_in_c"] = c.t_in_c;
    j["t_out_c"] = c.t_out_c;
    if (c.flow_rate_lpm) j["flow_rate_lpm"] = *c.flow_rate_lpm;
    if (c.amb_c) j["amb_c"] = *c.amb_c;
    j["rho_kg_m3"] = c.rho;
    j["cp_j_kgk"] = c.cp;
    j["r_pipe_m"] = c.r_pipe_m;
    if (c.pipe_length_m) j["pipe_length_m"] = *c.pipe_length_m;
    if (c.a1_m2) j["a1_m2"] = *c.a1_m2;
    if (c.a2_m2) j["a2_m2"] = *c.a2_m2;
    if (c.v_exp_mps) j["v_exp_mps"] = *c.v_exp_mps;
    if (!c.probes_c.empty()) j["probes_c"] = c.probes_c;
    j["data_probes"] = c.data_probe_names;
    for (const auto& [name, p] : c.probe_points_m) {
        j["probe_points_m"][name] = {{"x", p.x}, {"y", p.y}};
    }
    if (c.geometry_path) j["geometry"] = *c.geometry_path;
    if (!c.notes.empty()) j["notes"] = c.notes;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write case file: " + path);
    out << j.dump(1, '\t') << "\n";
}

std::map<std::string, Point2> default_probe_points(const RigGeometry& g) {
    const LayerSpec& mid = g.layer(2);
    const double y_mid2 = 0.5 * (mid.y_bottom + mid.y_top);
    return {
        {"Face", {0.5 * (g.x_a + g.x_b), g.y_n()}},
        {"Side", {0.5 * (g.x_b + g.x_n), g.y_n()}},
        {"In1", {0.45 * g.x_n, y_mid2}},
        {"In2", {0.55 * g.x_n, y_mid2}},
    };
}

}  // namespace pinnhs
