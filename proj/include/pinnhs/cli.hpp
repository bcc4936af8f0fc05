#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pinnhs/postprocess.hpp"
#include "pinnhs/validation.hpp"

namespace pinnhs {

inline constexpr const char* kVersion = "0.1.0";

// Everything a run needs, resolvable from CLI flags or environment overrides;
// echoed to disk so any artifact can be regenerated from its manifest.
struct RunManifest {
    std::string command;  // validate | train-case | sweep | fd-check | compare-modes
    std::string study;    // validate: intro1d | toy_h_sweep | convergence_probe
    std::string case_path;
    std::string geometry_path;  // empty: bundled default rig
    std::string out_dir = "out";
    int trials = 1;
    std::uint64_t seed = 1;
    std::string schedule = "sequential";
    bool with_probes = true;
    bool deterministic = true;
    int threads = 1;
    std::optional<int> epochs;
    std::optional<int> epochs_per_layer;
    std::optional<int> sweeps;
    std::optional<double> lr;
    std::optional<double> lr_h;
    std::optional<double> lr_lambda;
    std::optional<double> epsilon_stop;
    std::optional<double> count_divisor;
    std::vector<int> widths;  // empty: module default
    // fd-check
    std::optional<double> fd_h;
    int fd_nx = 256;
    int fd_ny = 128;
    // field export resolution
    int field_nx = 181;
    int field_ny = 61;
};

void validate_manifest(const RunManifest& m);

// Executes the command and writes all artifacts (report JSON, summary CSV,
// per-trial training logs, field grids, reproducibility manifest) under
// out_dir. Returns the process exit status; failures also leave a
// machine-readable error.json.
int run(const RunManifest& m);

// Building blocks used by run() and exercised directly in tests.
RigRunSpec build_rig_spec(const RunManifest& m);
CaseReport run_train_case(const RunManifest& m);
void run_compare_modes(const RunManifest& m);
void write_manifest_json(const RunManifest& m, const std::string& path);

}  // namespace pinnhs
