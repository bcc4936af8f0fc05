#include "pinnhs/postprocess.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pinnhs {

double extract_h(const NetworkEnsemble& e, const NondimScales& s) {
    const double h = e.h_star() / s.u_0;
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw UnphysicalError("extracted heat transfer coefficient is not positive");
    }
    return h;
}

std::array<double, 6> pipe_delta_ts(const NetworkEnsemble& e, const NondimScales& s,
                                    const std::array<std::vector<Point2>, 6>& inner_pts_m,
                                    double t_w_k) {
    std::array<double, 6> dts{};
    NetWorkspace ws;
    for (int p = 0; p < 6; ++p) {
        const auto& pts = inner_pts_m[static_cast<std::size_t>(p)];
        if (pts.empty()) throw ConfigError("pipe " + std::to_string(p + 1) + " has no inner points");
        double max_u = -1e300;
        for (const Point2& pm : pts) {
            max_u = std::max(max_u,
                             ens_forward(e, Subdomain::kPipes, pm.x / s.x_l, pm.y / s.y_l, ws).u);
        }
        dts[static_cast<std::size_t>(p)] = redim_temp(max_u, s) - t_w_k;
    }
    return dts;
}

VelocityResult compute_velocity(double h, const CaseConfig& c, const RigGeometry& g,
                                const std::array<double, 6>& delta_t_k) {
    const double dt2 = c.t_out_k() - c.t_in_k();
    if (dt2 <= 0) throw ConfigError("ΔT2 = t_out − t_in must be positive");
    double mean_dt = 0;
    for (double d : delta_t_k) mean_dt += d;
    mean_dt /= 6.0;
    VelocityResult r;
    r.negative_dt_warning = mean_dt < 0;
    r.v_mps = h * c.area_inner(g) * mean_dt / (c.rho * c.area_flow() * c.cp * dt2);
    return r;
}

std::map<std::string, double> probe_temperatures(const NetworkEnsemble& e, const CaseConfig& c,
                                                 const RigGeometry& g, const NondimScales& s) {
    const auto points = c.probe_points_m.empty() ? default_probe_points(g) : c.probe_points_m;
    std::map<std::string, double> out;
    NetWorkspace ws;
    for (const auto& [name, pm] : points) {
        Subdomain sd;
        try {
            sd = subdomain_of(g, pm);
        } catch (const RegionError&) {
            throw ConfigError("probe " + name + " lies outside its subdomain");
        }
        out[name] = redim_temp(ens_forward(e, sd, pm.x / s.x_l, pm.y / s.y_l, ws).u, s);
    }
    return out;
}

double energy_balance(const NetworkEnsemble& e, const CaseConfig& c, const RigGeometry& g,
                      const NondimScales& s,
                      const std::array<std::vector<Point2>, 6>& inner_pts_m) {
    const auto dts = pipe_delta_ts(e, s, inner_pts_m, c.t_w_k());
    double mean_dt = 0;
    for (double d : dts) mean_dt += d;
    mean_dt /= 6.0;
    const double h = extract_h(e, s);
    return c.power_w - h * c.area_inner(g) * mean_dt;
}

int region_of(const RigGeometry& g, Point2 p_m) {
    if (p_m.x < 0 || p_m.x > g.x_n || p_m.y < 0 || p_m.y > g.y_n()) return -1;
    for (int pid = 1; pid <= 6; ++pid) {
        const PipeSpec& P = g.pipe(pid);
        const double dx = p_m.x - P.x_c;
        const double dy = p_m.y - P.y_c;
        const double r2 = dx * dx + dy * dy;
        if (r2 < P.r_inner * P.r_inner) return -1;
        if (r2 <= P.r_outer * P.r_outer) return 5;
    }
    for (int li = 0; li < 5; ++li) {
        const LayerSpec& L = g.layer(li);
        if (p_m.y >= L.y_bottom && (p_m.y < L.y_top || li == 4)) return li;
    }
    return -1;
}

FieldGrid temperature_field(const NetworkEnsemble& e, const RigGeometry& g,
                            const NondimScales& s, int nx, int ny) {
    if (nx < 2 || ny < 2) throw ConfigError("field grid needs at least 2 nodes per axis");
    FieldGrid f;
    f.nx = nx;
    f.ny = ny;
    NetWorkspace ws;
    for (int j = 0; j < ny; ++j) {
        const double y = (j == ny - 1) ? g.y_n() : g.y_n() * j / (ny - 1);
        for (int i = 0; i < nx; ++i) {
            const double x = (i == nx - 1) ? g.x_n : g.x_n * i / (nx - 1);
            const Point2 pm{x, y};
            const int region = region_of(g, pm);
            if (region < 0) continue;  // coolant region is not part of the solid field
            const Subdomain sd = region == 5 ? Subdomain::kPipes : static_cast<Subdomain>(region);
            const double u = ens_forward(e, sd, pm.x / s.x_l, pm.y / s.y_l, ws).u;
            f.samples.push_back({pm.x, pm.y, region, kelvin_to_celsius(redim_temp(u, s))});
        }
    }
    return f;
}

void write_field_csv(const FieldGrid& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write field CSV: " + path);
    out.precision(17);
    out << "x_m,y_m,region,t_c\n";
    for (const auto& sm : f.samples) {
        out << sm.x << ',' << sm.y << ',' << sm.region << ',' << sm.t_c << '\n';
    }
}

Aggregate aggregate(std::span<const double> values) {
    Aggregate a;
    if (values.empty()) return a;
    double sum = 0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return a;
}

namespace {

nlohmann::json loss_to_json(const LossState& s) {
    nlohmann::json j;
    const auto t = s.terms.as_array();
    for (int i = 0; i < 7; ++i) j["terms"][LossTerms::names()[static_cast<std::size_t>(i)]] = t[static_cast<std::size_t>(i)];
    j["lambdas"] = s.lambdas;
    j["total"] = s.total;
    return j;
}

}  // namespace

void write_report_json(const CaseReport& r, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["case_id"] = r.case_id;
    j["v_exp_mps"] = r.v_exp;
    j["probe_exp_c"] = r.probe_exp_c;
    for (const auto& t : r.trials) {
        nlohmann::json tj;
        tj["trial"] = t.trial;
        tj["seed"] = t.seed;
        tj["diverged"] = t.diverged;
        if (t.diverged) {
            tj["divergence_message"] = t.divergence_message;
        } else {
            tj["h_nn_w_m2k"] = t.h_nn;
            tj["v_nn_mps"] = t.v_nn;
            tj["velocity_warning"] = t.velocity_warning;
            tj["probe_pred_c"] = t.probe_pred_c;
            tj["energy_residual_w"] = t.energy_residual_w;
            tj["final_loss"] = loss_to_json(t.final_loss);
            tj["epochs_run"] = t.epochs_run;
        }
        j["trials"].push_back(tj);
    }
    j["aggregates"]["h_nn_w_m2k"] = {{"mean", r.h_agg.mean}, {"std", r.h_agg.std}};
    j["aggregates"]["v_nn_mps"] = {{"mean", r.v_agg.mean}, {"std", r.v_agg.std}};
    for (const auto& [name, agg] : r.probe_agg_c) {
        j["aggregates"]["probe_c"][name] = {{"mean", agg.mean}, {"std", agg.std}};
    }
    j["config"] = r.config_echo;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write report: " + path);
    out << j.dump(1, '\t') << "\n";
}

std::string report_summary_header() {
    return "case_id,trials,h_mean,h_std,v_mean,v_std,v_exp,side_pred,side_exp,face_pred,face_exp,"
           "in1_pred,in1_exp,in2_pred,in2_exp";
}

std::string report_summary_row(const CaseReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.case_id << ',' << r.trials.size() << ',' << r.h_agg.mean << ',' << r.h_agg.std << ','
       << r.v_agg.mean << ',' << r.v_agg.std << ',' << r.v_exp;
    for (const char* name : {"Side", "Face", "In1", "In2"}) {
        auto itp = r.probe_agg_c.find(name);
        auto ite = r.probe_exp_c.find(name);
        os << ',' << (itp != r.probe_agg_c.end() ? itp->second.mean : 0.0);
        os << ',' << (ite != r.probe_exp_c.end() ? ite->second : 0.0);
    }
    return os.str();
}

TrialOutput run_trial(const RigRunSpec& spec, std::uint64_t seed, int trial_index) {
    validate_geometry(spec.geometry);
    validate_case(spec.case_config);
    const NondimScales scales = make_scales(spec.geometry, spec.case_config.t_in_k());
    const SampleCounts counts =
        spec.count_divisor == 1.0 ? spec.counts : spec.counts.scaled(spec.count_divisor);
    const CollocationSet colloc = sample(spec.geometry, counts, seed);

    NetworkEnsemble ensemble = init_ensemble(spec.widths, seed, spec.h_star_init);
    // Warm start: output biases begin at the coolant level plus a small
    // offset so the early field sits in the physical range.
    const double u0_star =
        nondim_temp(spec.case_config.t_w_k() + spec.init_field_offset_k, scales);
    const std::size_t pn = ensemble.per_net();
    for (int s = 0; s < kNumSubnets; ++s) {
        ensemble.flat[static_cast<std::size_t>(s) * pn + pn - 1] = u0_star;
    }

    TrainConfig tc = spec.train_config;
    tc.seed = seed;

    RigObjective obj(spec.geometry, scales, spec.case_config, colloc, spec.with_probes,
                     std::move(ensemble));
    obj.loss().threads = tc.deterministic ? 1 : tc.threads;

    TrialOutput out{.row = {}, .ensemble = {}, .train_result = train(obj, tc)};
    out.row.trial = trial_index;
    out.row.seed = seed;
    out.ensemble = obj.ensemble();
    if (out.train_result.diverged) {
        out.row.diverged = true;
        out.row.divergence_message = out.train_result.divergence_message;
        return out;
    }
    const auto& inner = obj.loss().inner_points_m();
    out.row.h_nn = extract_h(out.ensemble, scales);
    const auto dts = pipe_delta_ts(out.ensemble, scales, inner, spec.case_config.t_w_k());
    const VelocityResult vr = compute_velocity(out.row.h_nn, spec.case_config, spec.geometry, dts);
    out.row.v_nn = vr.v_mps;
    out.row.velocity_warning = vr.negative_dt_warning;
    const auto probes_k = probe_temperatures(out.ensemble, spec.case_config, spec.geometry, scales);
    for (const auto& [name, tk] : probes_k) out.row.probe_pred_c[name] = kelvin_to_celsius(tk);
    out.row.energy_residual_w =
        energy_balance(out.ensemble, spec.case_config, spec.geometry, scales, inner);
    if (!out.train_result.history.empty()) {
        out.row.final_loss = out.train_result.history.back().loss;
        out.row.epochs_run = static_cast<int>(out.train_result.history.size());
    }
    return out;
}

CaseReport multi_trial(const RigRunSpec& spec, int n_trials,
                       const std::function<void(const TrialOutput&)>& on_trial) {
    if (n_trials < 1) throw ConfigError("n_trials must be at least 1");
    CaseReport report;
    report.case_id = spec.case_config.case_id;
    report.v_exp = spec.case_config.v_exp_mps.value_or(0.0);
    report.probe_exp_c = spec.case_config.probes_c;

    std::vector<double> hs, vs;
    std::map<std::string, std::vector<double>> probes;
    std::string seeds;
    for (int t = 0; t < n_trials; ++t) {
        const std::uint64_t seed = spec.train_config.seed + static_cast<std::uint64_t>(t);
        seeds += (t ? "," : "") + std::to_string(seed);
        TrialOutput out = run_trial(spec, seed, t + 1);
        if (on_trial) on_trial(out);
        if (!out.row.diverged) {
            hs.push_back(out.row.h_nn);
            vs.push_back(out.row.v_nn);
            for (const auto& [name, v] : out.row.probe_pred_c) probes[name].push_back(v);
        }
        report.trials.push_back(std::move(out.row));
    }
    report.h_agg = aggregate(hs);
    report.v_agg = aggregate(vs);
    for (const auto& [name, vals] : probes) report.probe_agg_c[name] = aggregate(vals);

    std::ostringstream arch;
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
        arch << spec.widths[i] << (i + 1 < spec.widths.size() ? "-" : "");
    }
    report.config_echo["architecture"] = arch.str();
    report.config_echo["schedule"] = schedule_name(spec.train_config.schedule);
    report.config_echo["seeds"] = seeds;
    report.config_echo["max_epochs"] = std::to_string(spec.train_config.max_epochs);
    report.config_echo["epochs_per_layer"] = std::to_string(spec.train_config.epochs_per_layer);
    report.config_echo["sweeps"] = std::to_string(spec.train_config.sweeps);
    report.config_echo["count_divisor"] = std::to_string(spec.count_divisor);
    report.config_echo["with_probes"] = spec.with_probes ? "true" : "false";
    report.config_echo["h_star_init"] = std::to_string(spec.h_star_init);
    report.config_echo["lr_params"] = std::to_string(spec.train_config.lr_params);
    report.config_echo["lr_h"] = std::to_string(spec.train_config.lr_h);
    report.config_echo["lr_lambda"] = std::to_string(spec.train_config.lr_lambda);
    report.config_echo["geometry_note"] =
        "stack dimensions are configured assumptions; see the geometry file";
    return report;
}

}  // namespace pinnhs
