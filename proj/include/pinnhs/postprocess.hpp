#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pinnhs/training.hpp"

namespace pinnhs {

// h = h*/U0 (the trainable parameter is h* = h·U0).
double extract_h(const NetworkEnsemble& e, const NondimScales& s);

// Per-pipe ΔT_i = max inner-surface temperature − t_w, in kelvin; the same
// maxima the energy term trains against.
std::array<double, 6> pipe_delta_ts(const NetworkEnsemble& e, const NondimScales& s,
                                    const std::array<std::vector<Point2>, 6>& inner_pts_m,
                                    double t_w_k);

struct VelocityResult {
    double v_mps = 0;
    bool negative_dt_warning = false;  // mean ΔT_i came out negative
};

// v = h·A1·mean(ΔT_i) / (rho·A2·cp·ΔT2).
VelocityResult compute_velocity(double h, const CaseConfig& c, const RigGeometry& g,
                                const std::array<double, 6>& delta_t_k);

// Redimensioned predictions at the probe points, kelvin.
std::map<std::string, double> probe_temperatures(const NetworkEnsemble& e, const CaseConfig& c,
                                                 const RigGeometry& g, const NondimScales& s);

// Q_in − Q_out in watts at the trained state.
double energy_balance(const NetworkEnsemble& e, const CaseConfig& c, const RigGeometry& g,
                      const NondimScales& s,
                      const std::array<std::vector<Point2>, 6>& inner_pts_m);

// Region id for field exports: 0..4 layers, 5 pipe wall, -1 water.
int region_of(const RigGeometry& g, Point2 p_m);

struct FieldSample {
    double x = 0, y = 0;
    int region = -1;
    double t_c = 0;
};
struct FieldGrid {
    int nx = 0, ny = 0;
    std::vector<FieldSample> samples;  // water nodes omitted
};

FieldGrid temperature_field(const NetworkEnsemble& e, const RigGeometry& g,
                            const NondimScales& s, int nx, int ny);
void write_field_csv(const FieldGrid& f, const std::string& path);

// Sample statistics (std with the n−1 denominator; 0 for a single value).
struct Aggregate {
    double mean = 0;
    double std = 0;
};
Aggregate aggregate(std::span<const double> values);

struct TrialRow {
    int trial = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::string divergence_message;
    double h_nn = 0;    // W/m²K
    double v_nn = 0;    // m/s
    bool velocity_warning = false;
    std::map<std::string, double> probe_pred_c;
    double energy_residual_w = 0;
    LossState final_loss;
    int epochs_run = 0;
};

struct CaseReport {
    std::string case_id;
    std::vector<TrialRow> trials;
    Aggregate h_agg, v_agg;
    std::map<std::string, Aggregate> probe_agg_c;
    double v_exp = 0;
    std::map<std::string, double> probe_exp_c;
    std::map<std::string, std::string> config_echo;  // architecture, schedule, seeds, geometry assumptions
};

void write_report_json(const CaseReport& r, const std::string& path);
std::string report_summary_header();
std::string report_summary_row(const CaseReport& r);

// --- full-rig runs -------------------------------------------------------------

struct RigRunSpec {
    RigGeometry geometry;
    CaseConfig case_config;
    SampleCounts counts;          // full-scale defaults
    double count_divisor = 1.0;   // desk-scale runs divide the paper's counts
    std::vector<int> widths = {2, 64, 64, 64, 64, 1};
    TrainConfig train_config;
    bool with_probes = true;
    double h_star_init = 1.0;
    double init_field_offset_k = 4.0;  // output-bias warm start above t_w
};

struct TrialOutput {
    TrialRow row;
    NetworkEnsemble ensemble;
    TrainResult train_result;
};

// One training run with the given seed.
TrialOutput run_trial(const RigRunSpec& spec, std::uint64_t seed, int trial_index);

// Runs n_trials with seeds seed, seed+1, ...; diverged trials are excluded
// from the aggregates and flagged in their rows. on_trial, when given, sees
// each finished trial (artifact writers hook in here).
CaseReport multi_trial(const RigRunSpec& spec, int n_trials,
                       const std::function<void(const TrialOutput&)>& on_trial = nullptr);

}  // namespace pinnhs
