#pragma once

#include <map>
#include <optional>
#include <string>

#include "pinnhs/geometry.hpp"

namespace pinnhs {

// One experimental run: heater power, coolant inlet/outlet temperatures,
// fluid properties, pipe dimensions, and the four probe readings.
// Temperatures in files are degrees Celsius; everything is converted to
// kelvin internally before non-dimensionalization.
struct CaseConfig {
    std::string case_id;
    double power_w = 0;
    double t_in_c = 0;
    double t_out_c = 0;
    std::optional<double> flow_rate_lpm;
    std::optional<double> amb_c;  // stored but unused: all outer boundaries are insulated/periodic
    double rho = 999.1;           // kg/m³
    double cp = 4188.5;           // J/(kg·K)
    double r_pipe_m = 0.005;
    std::optional<double> pipe_length_m;  // total length in contact with the cold plate
    std::optional<double> a1_m2;          // inner surface area; default 2·pi·r·l
    std::optional<double> a2_m2;          // flow cross-section; default pi·r²
    std::optional<double> v_exp_mps;
    std::map<std::string, double> probes_c;        // experimental readings: Side/Face/In1/In2
    // Probes whose readings enter the data term; the others are held out for
    // comparison (the study feeds only the Face and Side sensors).
    std::vector<std::string> data_probe_names = {"Face", "Side"};
    std::map<std::string, Point2> probe_points_m;  // probe coordinates; defaults from geometry
    std::optional<std::string> geometry_path;
    std::string notes;

    double t_in_k() const { return celsius_to_kelvin(t_in_c); }
    double t_out_k() const { return celsius_to_kelvin(t_out_c); }
    double t_w_k() const { return 0.5 * (t_in_k() + t_out_k()); }
    double delta_t2() const { return t_out_c - t_in_c; }

    // Geometry-dependent defaults.
    double pipe_length(const RigGeometry& g) const;  // default: six straight passes
    double area_inner(const RigGeometry& g) const;   // A1 = 2·pi·r·l
    double area_flow() const;                        // A2 = pi·r²
    double flux_per_area(const RigGeometry& g) const;  // q'' = P0 / ((x_b-x_a)·depth)
};

// v_exp from the volumetric flow rate: (L/min → m³/s) / A2.
double velocity_from_flow(double flow_rate_lpm, double a2_m2);

void validate_case(const CaseConfig& c);

CaseConfig parse_case_file(const std::string& path);
void save_case_file(const CaseConfig& c, const std::string& path);

// Default probe coordinates: Face mid-footprint on the top face, Side on the
// right insulated segment of the top face, In1/In2 at mid-depth of layer 2
// under the footprint. The paper locates these on a diagram only, so they are
// configuration, echoed into every report.
std::map<std::string, Point2> default_probe_points(const RigGeometry& g);

}  // namespace pinnhs
