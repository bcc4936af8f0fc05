#include "pinnhs/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace pinnhs {

namespace fs = std::filesystem;

void validate_manifest(const RunManifest& m) {
    const std::vector<std::string> commands = {"validate", "train-case", "sweep", "fd-check",
                                               "compare-modes"};
    if (std::find(commands.begin(), commands.end(), m.command) == commands.end()) {
        throw ConfigError("unknown command: " + m.command);
    }
    if (m.command == "validate") {
        const std::vector<std::string> studies = {"intro1d", "toy_h_sweep", "convergence_probe"};
        if (std::find(studies.begin(), studies.end(), m.study) == studies.end()) {
            throw ConfigError("unknown study: " + m.study);
        }
    }
    if ((m.command == "train-case" || m.command == "compare-modes" || m.command == "fd-check") &&
        m.case_path.empty()) {
        throw ConfigError(m.command + " needs --case");
    }
    if (m.trials < 1) throw ConfigError("--trials must be at least 1");
    if (m.schedule != "joint" && m.schedule != "sequential") {
        throw ConfigError("--schedule must be joint or sequential");
    }
}

namespace {

nlohmann::json manifest_json(const RunManifest& m) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["code_version"] = kVersion;
    j["command"] = m.command;
    j["study"] = m.study;
    j["case"] = m.case_path;
    j["geometry"] = m.geometry_path;
    j["out"] = m.out_dir;
    j["trials"] = m.trials;
    j["seed"] = m.seed;
    j["schedule"] = m.schedule;
    j["with_probes"] = m.with_probes;
    j["deterministic"] = m.deterministic;
    j["threads"] = m.threads;
    if (m.epochs) j["epochs"] = *m.epochs;
    if (m.epochs_per_layer) j["epochs_per_layer"] = *m.epochs_per_layer;
    if (m.sweeps) j["sweeps"] = *m.sweeps;
    if (m.lr) j["lr"] = *m.lr;
    if (m.lr_h) j["lr_h"] = *m.lr_h;
    if (m.lr_lambda) j["lr_lambda"] = *m.lr_lambda;
    if (m.epsilon_stop) j["epsilon_stop"] = *m.epsilon_stop;
    if (m.count_divisor) j["count_divisor"] = *m.count_divisor;
    if (!m.widths.empty()) j["widths"] = m.widths;
    if (m.fd_h) j["fd_h"] = *m.fd_h;
    j["fd_nx"] = m.fd_nx;
    j["fd_ny"] = m.fd_ny;
    j["field_nx"] = m.field_nx;
    j["field_ny"] = m.field_ny;
    return j;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

RigGeometry resolve_geometry(const RunManifest& m, const CaseConfig& c) {
    if (!m.geometry_path.empty()) return load_geometry(m.geometry_path);
    if (c.geometry_path) {
        const fs::path base = fs::path(m.case_path).parent_path();
        return load_geometry((base / *c.geometry_path).string());
    }
    return default_rig();
}

void write_train_artifacts(const RunManifest& m, const std::string& dir, const RigRunSpec& spec,
                           const TrialOutput& t) {
    const std::string tag = "trial" + std::to_string(t.row.trial);
    {
        std::ofstream log(dir + "/train_log_" + tag + ".csv");
        log << loss_csv_header() << "\n";
        for (const auto& rec : t.train_result.history) {
            log << loss_csv_row(rec.epoch, rec.loss, rec.h_star, rec.wall_ms) << "\n";
        }
    }
    save_ensemble(t.ensemble, dir + "/ensemble_" + tag + ".json");
    if (!t.row.diverged) {
        const NondimScales scales = make_scales(spec.geometry, spec.case_config.t_in_k());
        const FieldGrid field =
            temperature_field(t.ensemble, spec.geometry, scales, m.field_nx, m.field_ny);
        write_field_csv(field, dir + "/field_" + tag + ".csv");
    }
}

CaseReport train_case_into(const RunManifest& m, const std::string& dir, bool with_probes) {
    RigRunSpec spec = build_rig_spec(m);
    spec.with_probes = with_probes;
    fs::create_directories(dir);
    CaseReport report = multi_trial(spec, m.trials, [&](const TrialOutput& t) {
        write_train_artifacts(m, dir, spec, t);
    });
    write_report_json(report, dir + "/report.json");
    write_text(dir + "/summary.csv", report_summary_header() + "\n" + report_summary_row(report) + "\n");
    return report;
}

}  // namespace

void write_manifest_json(const RunManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    out << manifest_json(m).dump(1, '\t') << "\n";
}

RigRunSpec build_rig_spec(const RunManifest& m) {
    RigRunSpec spec;
    spec.case_config = parse_case_file(m.case_path);
    spec.geometry = resolve_geometry(m, spec.case_config);
    spec.count_divisor = m.count_divisor.value_or(4.0);
    spec.widths = m.widths.empty() ? std::vector<int>{2, 24, 24, 24, 1} : m.widths;
    spec.with_probes = m.with_probes;

    TrainConfig& tc = spec.train_config;
    tc.schedule = m.schedule == "joint" ? Schedule::kJoint : Schedule::kSequential;
    tc.max_epochs = m.epochs.value_or(12000);
    tc.epochs_per_layer = m.epochs_per_layer.value_or(250);
    tc.sweeps = m.sweeps.value_or(3);
    tc.lr_params = m.lr.value_or(2e-3);
    tc.lr_final = 1e-4;
    tc.lr_h = m.lr_h.value_or(0.05);
    tc.lr_lambda = m.lr_lambda.value_or(0.0);
    tc.epsilon_stop = m.epsilon_stop.value_or(1e-10);
    tc.seed = m.seed;
    tc.deterministic = m.deterministic;
    tc.threads = m.threads;
    // enforcement weights: interfaces and the Robin/energy/data terms carry
    // the coupling and the information; see README for the rationale
    tc.lambda_init = {10, 1, 50, 50, 50, 20, 50};
    return spec;
}

CaseReport run_train_case(const RunManifest& m) {
    return train_case_into(m, m.out_dir, m.with_probes);
}

void run_compare_modes(const RunManifest& m) {
    CaseConfig c = parse_case_file(m.case_path);
    if (c.probes_c.empty()) {
        throw ConfigError("compare-modes needs a case with probe readings");
    }
    const CaseReport with = train_case_into(m, m.out_dir + "/with_probes", true);
    const CaseReport without = train_case_into(m, m.out_dir + "/no_probes", false);

    std::ofstream out(m.out_dir + "/compare.csv");
    if (!out) throw ConfigError("cannot write compare.csv");
    out << "mode," << report_summary_header() << "\n";
    out << "no_probes," << report_summary_row(without) << "\n";
    out << "with_probes," << report_summary_row(with) << "\n";

    nlohmann::json j;
    j["schema_version"] = 1;
    j["case_id"] = with.case_id;
    j["h_mean_no_probes"] = without.h_agg.mean;
    j["h_mean_with_probes"] = with.h_agg.mean;
    // The study found the unconstrained runs to overestimate h; reported as a
    // soft flag, not asserted.
    j["no_probe_h_higher"] = without.h_agg.mean > with.h_agg.mean;
    write_text(m.out_dir + "/compare.json", j.dump(1, '\t') + "\n");
}

int run(const RunManifest& m) {
    try {
        validate_manifest(m);
        fs::create_directories(m.out_dir);
        write_manifest_json(m, m.out_dir + "/manifest.json");

        if (m.command == "validate") {
            if (m.study == "intro1d") {
                Intro1dSpec spec;
                spec.seed = m.seed;
                if (m.epochs) spec.max_epochs = *m.epochs;
                if (m.lr) spec.lr = *m.lr;
                if (!m.widths.empty()) spec.widths = m.widths;
                const Intro1dResult r = run_intro1d(spec);
                write_intro1d_csv(r, m.out_dir + "/intro1d.csv");
                std::cout << "intro1d mse=" << r.mse << " epochs=" << r.epochs_run << "\n";
            } else if (m.study == "toy_h_sweep") {
                ToySweepSpec spec;
                spec.train.seed = m.seed;
                if (m.epochs) spec.train.max_epochs = *m.epochs;
                if (m.lr) spec.train.lr = *m.lr;
                if (m.lr_h) spec.train.lr_h = *m.lr_h;
                if (!m.widths.empty()) spec.train.widths = m.widths;
                const ToySweepResult r = run_toy_h_sweep(spec);
                write_sweep_csv(r, m.out_dir + "/h_sweep.csv");
                std::cout << "toy_h_sweep R2=" << r.r_squared_loglog << "\n";
            } else {
                ConvergenceSpec spec;
                spec.train.seed = m.seed;
                if (m.epochs) spec.train.max_epochs = *m.epochs;
                if (m.lr) spec.train.lr = *m.lr;
                if (m.lr_h) spec.train.lr_h = *m.lr_h;
                if (!m.widths.empty()) spec.train.widths = m.widths;
                const auto rows = run_convergence_probe(spec);
                write_convergence_csv(rows, m.out_dir + "/convergence.csv");
                std::cout << "convergence_probe rows=" << rows.size() << "\n";
            }
        } else if (m.command == "sweep") {
            ToySweepSpec spec;
            spec.train.seed = m.seed;
            if (m.epochs) spec.train.max_epochs = *m.epochs;
            if (m.lr) spec.train.lr = *m.lr;
            if (m.lr_h) spec.train.lr_h = *m.lr_h;
            if (!m.widths.empty()) spec.train.widths = m.widths;
            const ToySweepResult r = run_toy_h_sweep(spec);
            write_sweep_csv(r, m.out_dir + "/h_sweep.csv");
            std::cout << "sweep R2=" << r.r_squared_loglog << "\n";
        } else if (m.command == "train-case") {
            const CaseReport r = run_train_case(m);
            std::cout << r.case_id << ": h=" << r.h_agg.mean << " (std " << r.h_agg.std
                      << "), v=" << r.v_agg.mean << " m/s (exp " << r.v_exp << ")\n";
        } else if (m.command == "compare-modes") {
            run_compare_modes(m);
            std::cout << "compare-modes artifacts in " << m.out_dir << "\n";
        } else if (m.command == "fd-check") {
            const CaseConfig c = parse_case_file(m.case_path);
            const RigGeometry g = resolve_geometry(m, c);
            const double h = m.fd_h.value_or(2900.0);
            FdConfig fc;
            fc.nx = m.fd_nx;
            fc.ny = m.fd_ny;
            const FdSolution sol = fd_solve(g, c, h, fc);
            // same grid CSV schema as the network field export
            FieldGrid grid;
            grid.nx = sol.nx;
            grid.ny = sol.ny;
            for (int j = 0; j < sol.ny; ++j) {
                for (int i = 0; i < sol.nx; ++i) {
                    const int region = sol.region[static_cast<std::size_t>(j) * sol.nx + i];
                    if (region < 0) continue;
                    grid.samples.push_back({(i + 0.5) * sol.dx,
                                            sol.y_centers[static_cast<std::size_t>(j)], region,
                                            kelvin_to_celsius(sol.at(i, j))});
                }
            }
            write_field_csv(grid, m.out_dir + "/fd_field.csv");
            nlohmann::json j;
            j["schema_version"] = 1;
            j["h"] = h;
            j["iterations"] = sol.iterations;
            j["residual_norm"] = sol.residual_norm;
            j["flux_in_w_per_m"] = sol.flux_in_w_per_m;
            j["robin_out_w_per_m"] = sol.robin_out_w_per_m;
            write_text(m.out_dir + "/fd_summary.json", j.dump(1, '\t') + "\n");
            std::cout << "fd-check: in " << sol.flux_in_w_per_m << " W/m, out "
                      << sol.robin_out_w_per_m << " W/m\n";
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
        try {
            fs::create_directories(m.out_dir);
            nlohmann::json j;
            j["error_kind"] = e.kind();
            j["message"] = e.what();
            write_text(m.out_dir + "/error.json", j.dump(1, '\t') + "\n");
        } catch (...) {
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pinnhs
