#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pinnhs/postprocess.hpp"

using namespace pinnhs;

namespace {

CaseConfig a13_4() {
    return parse_case_file(std::string(PINNHS_DATA_DIR) + "/cases/A13_4.json");
}

NetworkEnsemble zero_ensemble() {
    NetworkEnsemble e = init_ensemble({2, 4, 1}, 1);
    std::fill(e.flat.begin(), e.flat.end() - 1, 0.0);  // u* == 0 everywhere
    return e;
}

std::array<std::vector<Point2>, 6> inner_points(const RigGeometry& g) {
    std::array<std::vector<Point2>, 6> inner;
    for (int p = 0; p < 6; ++p) {
        const PipeSpec& P = g.pipe(p + 1);
        for (double th : {0.4, 1.5, 2.7, 3.9, 5.2}) {
            inner[p].push_back({P.x_c + P.r_inner * std::cos(th), P.y_c + P.r_inner * std::sin(th)});
        }
    }
    return inner;
}

}  // namespace

TEST_CASE("aggregation reproduces the published trial statistics") {
    const std::vector<double> hs = {3170.89, 3281.05, 3165.11};
    const Aggregate a = aggregate(hs);
    // printed as 3205.68 / 65.34 (inputs themselves are 2 dp rounded)
    CHECK(std::abs(a.mean - 3205.68) < 0.005);
    CHECK(std::abs(a.std - 65.34) <= 0.01);

    // single value: std 0
    const std::vector<double> one = {3170.89};
    CHECK(aggregate(one).mean == 3170.89);
    CHECK(aggregate(one).std == 0.0);

    // order invariance
    const std::vector<double> perm = {3281.05, 3165.11, 3170.89};
    CHECK(aggregate(perm).mean == doctest::Approx(a.mean).epsilon(1e-15));
    CHECK(aggregate(perm).std == doctest::Approx(a.std).epsilon(1e-12));

    // velocity trials of the same table
    const std::vector<double> vs = {0.33, 0.32, 0.34};
    CHECK(aggregate(vs).mean == doctest::Approx(0.33).epsilon(1e-12));
    CHECK(aggregate(vs).std == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("extract_h inverts the non-dimensionalization") {
    const NondimScales s{0.3, 0.0256, 283.17};
    NetworkEnsemble e = init_ensemble({2, 4, 1}, 2);
    e.set_h_star(1.0 * s.u_0);  // h* = U0 -> h = 1
    CHECK(extract_h(e, s) == doctest::Approx(1.0).epsilon(1e-14));
    for (double h : {10.0, 998.26, 2929.71, 10000.0}) {
        e.set_h_star(h * s.u_0);
        CHECK(extract_h(e, s) == doctest::Approx(h).epsilon(1e-14));
    }
}

TEST_CASE("compute_velocity: base cases and exact homogeneity") {
    const RigGeometry g = default_rig();
    const CaseConfig c = a13_4();
    std::array<double, 6> dts = {1.2, 1.4, 1.3, 1.5, 1.1, 1.6};

    CHECK(compute_velocity(0.0, c, g, dts).v_mps == 0.0);

    const double v1 = compute_velocity(2929.71, c, g, dts).v_mps;
    // v is linear in h, linear in the mean ΔT, inverse in ΔT2
    const double v2 = compute_velocity(2.0 * 2929.71, c, g, dts).v_mps;
    CHECK(v2 == doctest::Approx(2.0 * v1).epsilon(1e-14));
    std::array<double, 6> dts2 = dts;
    for (double& d : dts2) d *= 3.0;
    CHECK(compute_velocity(2929.71, c, g, dts2).v_mps == doctest::Approx(3.0 * v1).epsilon(1e-14));
    CaseConfig c2 = c;
    c2.t_out_c = c.t_in_c + 2.0 * (c.t_out_c - c.t_in_c);
    CHECK(compute_velocity(2929.71, c2, g, dts).v_mps == doctest::Approx(0.5 * v1).epsilon(1e-14));

    // negative mean ΔT flags a warning
    std::array<double, 6> neg = {-1, -1, -1, -1, -1, -1};
    CHECK(compute_velocity(100.0, c, g, neg).negative_dt_warning);

    // published mean h with ΔT solved by back-substitution reproduces the
    // published velocity: mean ΔT = v·rho·A2·cp·ΔT2/(h·A1)
    const double v_pub = 0.28;
    const double mean_dt = v_pub * c.rho * c.area_flow() * c.cp * c.delta_t2() /
                           (2929.71 * c.area_inner(g));
    std::array<double, 6> dts3;
    dts3.fill(mean_dt);
    CHECK(compute_velocity(2929.71, c, g, dts3).v_mps == doctest::Approx(v_pub).epsilon(1e-12));
}

TEST_CASE("probe temperatures: constant field reads U0, evaluation is pure") {
    const RigGeometry g = default_rig();
    const CaseConfig c = a13_4();
    const NondimScales s = make_scales(g, c.t_in_k());
    const NetworkEnsemble e = zero_ensemble();
    const auto t1 = probe_temperatures(e, c, g, s);
    CHECK(t1.size() == 4);
    for (const auto& [name, tk] : t1) {
        CHECK(tk == doctest::Approx(s.u_0).epsilon(1e-14));
    }
    const auto t2 = probe_temperatures(e, c, g, s);
    CHECK(t1 == t2);

    CaseConfig bad = c;
    bad.probe_points_m["Face"] = {-0.5, 0.0};
    CHECK_THROWS_AS(probe_temperatures(e, bad, g, s), ConfigError);
}

TEST_CASE("energy balance: zero wall superheat means residual = P0") {
    const RigGeometry g = default_rig();
    const CaseConfig c = a13_4();
    // U0 = t_w so the zero field sits exactly at the coolant temperature
    const NondimScales s = make_scales(g, c.t_w_k());
    NetworkEnsemble e = zero_ensemble();
    e.set_h_star(1000.0 * s.u_0);
    const double r = energy_balance(e, c, g, s, inner_points(g));
    CHECK(r == doctest::Approx(c.power_w).epsilon(1e-12));
}

TEST_CASE("manufactured balanced field gives zero energy residual") {
    const RigGeometry g = default_rig();
    const CaseConfig c = a13_4();
    const NondimScales s = make_scales(g, c.t_in_k());
    NetworkEnsemble e = zero_ensemble();
    const double h = 2900.0;
    e.set_h_star(h * s.u_0);
    // constant wall field with ΔT solving P0 = h·A1·ΔT
    const double dt = c.power_w / (h * c.area_inner(g));
    const std::size_t pn = e.per_net();
    const std::size_t pipes_off = static_cast<std::size_t>(Subdomain::kPipes) * pn;
    e.flat[pipes_off + pn - 1] = nondim_temp(c.t_w_k() + dt, s);  // output bias
    const double r = energy_balance(e, c, g, s, inner_points(g));
    CHECK(std::abs(r) < 1e-9 * c.power_w);
}

TEST_CASE("temperature field: constant grid, regions masked, probes consistent") {
    const RigGeometry g = default_rig();
    const CaseConfig c = a13_4();
    const NondimScales s = make_scales(g, c.t_in_k());
    const NetworkEnsemble e = zero_ensemble();
    const FieldGrid f = temperature_field(e, g, s, 61, 41);
    CHECK(!f.samples.empty());
    for (const auto& sm : f.samples) {
        CHECK(sm.t_c == doctest::Approx(kelvin_to_celsius(s.u_0)).epsilon(1e-12));
        CHECK(sm.region >= 0);
        CHECK(sm.region <= 5);
    }
    // water nodes are excluded
    for (const auto& sm : f.samples) {
        for (int pid = 1; pid <= 6; ++pid) {
            const PipeSpec& P = g.pipe(pid);
            const double d2 = std::pow(sm.x - P.x_c, 2) + std::pow(sm.y - P.y_c, 2);
            CHECK(d2 >= P.r_inner * P.r_inner * 0.999);
        }
    }

    // grid value at the Face probe equals probe_temperatures
    const auto probes = probe_temperatures(e, c, g, s);
    const auto pts = default_probe_points(g);
    const Point2 face = pts.at("Face");
    bool found = false;
    for (const auto& sm : f.samples) {
        if (std::abs(sm.x - face.x) < 1e-12 && std::abs(sm.y - face.y) < 1e-12) {
            CHECK(celsius_to_kelvin(sm.t_c) == doctest::Approx(probes.at("Face")).epsilon(1e-12));
            found = true;
        }
    }
    CHECK(found);

    CHECK_THROWS_AS(temperature_field(e, g, s, 1, 41), ConfigError);

    write_field_csv(f, "field_test.csv");
    std::remove("field_test.csv");
}

TEST_CASE("report writers and summary row") {
    CaseReport r;
    r.case_id = "X";
    r.v_exp = 0.296;
    r.probe_exp_c = {{"Face", 27.47}};
    TrialRow t;
    t.trial = 1;
    t.seed = 5;
    t.h_nn = 2900.0;
    t.v_nn = 0.28;
    t.probe_pred_c = {{"Face", 26.76}};
    r.trials.push_back(t);
    r.h_agg = aggregate(std::vector<double>{2900.0});
    r.v_agg = aggregate(std::vector<double>{0.28});
    r.probe_agg_c["Face"] = aggregate(std::vector<double>{26.76});
    r.config_echo["architecture"] = "2-4-1";

    write_report_json(r, "report_test.json");
    std::remove("report_test.json");

    const std::string row = report_summary_row(r);
    CHECK(row.find("X,1,2900") == 0);
    CHECK(report_summary_header().find("case_id") == 0);
}

TEST_CASE("multi_trial: single tiny trial aggregates to itself") {
    RigRunSpec spec;
    spec.geometry = default_rig();
    spec.case_config = a13_4();
    spec.count_divisor = 200.0;
    spec.widths = {2, 4, 1};
    spec.train_config.max_epochs = 3;
    spec.train_config.schedule = Schedule::kJoint;
    spec.train_config.seed = 9;
    const CaseReport r = multi_trial(spec, 1);
    REQUIRE(r.trials.size() == 1);
    CHECK(!r.trials[0].diverged);
    CHECK(r.h_agg.mean == r.trials[0].h_nn);
    CHECK(r.h_agg.std == 0.0);
    CHECK(r.v_agg.mean == r.trials[0].v_nn);
    CHECK(r.config_echo.at("architecture") == "2-4-1");
}
