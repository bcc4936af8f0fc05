#include "pinnhs/physics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace pinnhs {

const std::array<const char*, 7>& LossTerms::names() {
    static const std::array<const char*, 7> n = {"L_PDE", "L_BC", "L_IC", "L_CB",
                                                 "L_h",   "L_Q",  "L_Data"};
    return n;
}

void LossState::recompute_total() {
    const auto t = terms.as_array();
    double sum = 0;
    for (int i = 0; i < 7; ++i) sum += lambdas[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(i)];
    total = sum;
}

BoundaryData make_boundary_data(const CaseConfig& c, const NondimScales& s, bool with_probes) {
    BoundaryData b;
    b.t_in_k = c.t_in_k();
    b.t_out_k = c.t_out_k();
    b.t_w_star = nondim_temp(c.t_w_k(), s);
    if (with_probes) {
        for (const std::string& name : c.data_probe_names) {
            auto it = c.probes_c.find(name);
            if (it != c.probes_c.end()) {
                b.probe_readings_k[name] = celsius_to_kelvin(it->second);
            }
        }
    }
    return b;
}

Subdomain subdomain_of(const RigGeometry& g, Point2 p_m) {
    if (p_m.x < 0.0 || p_m.x > g.x_n || p_m.y < 0.0 || p_m.y > g.y_n()) {
        throw RegionError("point outside the domain");
    }
    for (int pid = 1; pid <= 6; ++pid) {
        const PipeSpec& P = g.pipe(pid);
        const double dx = p_m.x - P.x_c;
        const double dy = p_m.y - P.y_c;
        const double r2 = dx * dx + dy * dy;
        if (r2 < P.r_inner * P.r_inner) throw RegionError("point lies in the coolant region");
        if (r2 <= P.r_outer * P.r_outer) return Subdomain::kPipes;
    }
    for (int li = 0; li < 5; ++li) {
        const LayerSpec& L = g.layer(li);
        if (p_m.y >= L.y_bottom && (p_m.y < L.y_top || (li == 4 && p_m.y <= L.y_top))) {
            return static_cast<Subdomain>(li);
        }
    }
    throw RegionError("point not contained in any layer");
}

// --- ResidualEvaluator -------------------------------------------------------

ResidualEvaluator::ResidualEvaluator(const RigGeometry& geom, const NondimScales& scales,
                                     Route route)
    : geom_(geom), scales_(scales), route_(route) {
    validate_geometry(geom_);
}

void ResidualEvaluator::override_field(Subdomain sd, FieldFn fn) {
    field_override_[static_cast<std::size_t>(sd)] = std::move(fn);
}

Deriv5 ResidualEvaluator::derivs_starred(const NetworkEnsemble& e, Subdomain sd, double xs,
                                         double ys) const {
    if (const auto& fn = field_override_[static_cast<std::size_t>(sd)]) return fn(xs, ys);
    if (route_ == Route::kLayerwise) {
        return ens_forward(e, sd, xs, ys, ws_);
    }
    const NetView net = e.subnet(sd);
    // Tape route: replay the identical graph and read derivatives off the
    // reverse pass (Dual arithmetic for the second derivatives); the input
    // map applies the same way as in the layerwise route.
    std::ostringstream key;
    for (std::size_t i = 0; i < e.widths.size(); ++i) key << e.widths[i] << (i + 1 < e.widths.size() ? "x" : "");
    auto it = tapes_.find(key.str());
    if (it == tapes_.end()) it = tapes_.emplace(key.str(), build_network_tape(e.widths)).first;
    const Tape& tape = it->second;

    const InputMap& im = e.input_maps[static_cast<std::size_t>(sd)];
    const std::size_t pn = e.per_net();
    std::vector<double> inputs(2 + pn);
    inputs[0] = xs;
    inputs[1] = im.y_scale * ys + im.y_shift;
    std::copy(net.theta, net.theta + pn, inputs.begin() + 2);

    Deriv5 d;
    Workspace<double> w0;
    d.u = tape.evaluate_into<double>(inputs, w0);
    tape.reverse_into(w0);
    d.ux = w0.adjoints[tape.input_node(0)];
    d.uy = w0.adjoints[tape.input_node(1)] * im.y_scale;

    for (int dir = 0; dir < 2; ++dir) {
        std::vector<Dual1> din(inputs.size());
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            din[i] = Dual1(inputs[i], i == static_cast<std::size_t>(dir) ? 1.0 : 0.0);
        }
        Workspace<Dual1> wd;
        tape.evaluate_into<Dual1>(din, wd);
        tape.reverse_into(wd);
        const double second = wd.adjoints[tape.input_node(static_cast<std::uint32_t>(dir))].tangent;
        if (dir == 0) d.uxx = second; else d.uyy = second * im.y_scale * im.y_scale;
    }
    return d;
}

Deriv5 ResidualEvaluator::eval_network(const NetworkEnsemble& e, Point2 p_m, Subdomain sd) const {
    const Point2 ps = nondim_point(p_m, scales_);
    return derivs_starred(e, sd, ps.x, ps.y);
}

double ResidualEvaluator::residual_pde(const NetworkEnsemble& e, Point2 p_m, Subdomain sd) const {
    double k = 0;
    if (sd == Subdomain::kPipes) {
        int pid = 0;
        for (int i = 1; i <= 6; ++i) {
            if (inside_pipe_wall(geom_, i, p_m)) { pid = i; break; }
        }
        if (pid == 0) throw RegionError("point is not inside any pipe wall");
        k = geom_.pipe(pid).k_pipe;
    } else {
        if (!inside_layer(geom_, static_cast<int>(sd), p_m)) {
            throw RegionError(std::string("point is not interior to ") + subdomain_name(sd));
        }
        k = geom_.layer(static_cast<int>(sd)).k;
    }
    const Deriv5 d = eval_network(e, p_m, sd);
    const double ks = k_star(k, scales_);
    return ks * (scales_.y_l * scales_.y_l * d.uxx + scales_.x_l * scales_.x_l * d.uyy);
}

double ResidualEvaluator::residual_periodic(const NetworkEnsemble& e, double y_m,
                                            int layer_id) const {
    const LayerSpec& L = geom_.layer(layer_id);
    if (y_m < L.y_bottom || y_m > L.y_top) throw RegionError("y not within the layer");
    const double ys = y_m / scales_.y_l;
    const auto sd = static_cast<Subdomain>(layer_id);
    const Deriv5 left = derivs_starred(e, sd, 0.0, ys);
    const Deriv5 right = derivs_starred(e, sd, geom_.x_n / scales_.x_l, ys);
    return left.ux - right.ux;
}

double ResidualEvaluator::residual_flux_top(const NetworkEnsemble& e, double x_m,
                                            double alpha_star) const {
    if (x_m < geom_.x_a || x_m > geom_.x_b) throw RegionError("x outside the flux footprint");
    const Deriv5 d = derivs_starred(e, Subdomain::kLayer4, x_m / scales_.x_l,
                                    geom_.y_n() / scales_.y_l);
    return d.uy - alpha_star;
}

double ResidualEvaluator::residual_insulated_top(const NetworkEnsemble& e, double x_m) const {
    const bool in_left = x_m >= 0.0 && x_m <= geom_.x_a;
    const bool in_right = x_m >= geom_.x_b && x_m <= geom_.x_n;
    if (!in_left && !in_right) throw RegionError("x not on an insulated top segment");
    const Deriv5 d = derivs_starred(e, Subdomain::kLayer4, x_m / scales_.x_l,
                                    geom_.y_n() / scales_.y_l);
    return d.uy;
}

double ResidualEvaluator::residual_insulated_bottom(const NetworkEnsemble& e, double x_m) const {
    if (x_m < 0.0 || x_m > geom_.x_n) throw RegionError("x outside the bottom boundary");
    const Deriv5 d = derivs_starred(e, Subdomain::kLayer0, x_m / scales_.x_l, 0.0);
    return d.uy;
}

std::pair<double, double> ResidualEvaluator::residual_interface_planar(const NetworkEnsemble& e,
                                                                       double x_m,
                                                                       int lower) const {
    if (lower < 0 || lower > 3) throw RegionError("planar interfaces pair layers 0..3 with 1..4");
    if (x_m < 0.0 || x_m > geom_.x_n) throw RegionError("x outside the interface");
    const double y_m = geom_.layer(lower).y_top;
    const double xs = x_m / scales_.x_l;
    const double ys = y_m / scales_.y_l;
    const Deriv5 lo = derivs_starred(e, static_cast<Subdomain>(lower), xs, ys);
    const Deriv5 hi = derivs_starred(e, static_cast<Subdomain>(lower + 1), xs, ys);
    const double khat_lo = k_hat_star(geom_.layer(lower).k, scales_);
    const double khat_hi = k_hat_star(geom_.layer(lower + 1).k, scales_);
    return {lo.u - hi.u, khat_lo * lo.uy - khat_hi * hi.uy};
}

std::pair<double, double> ResidualEvaluator::residual_interface_circular(const NetworkEnsemble& e,
                                                                         Point2 p_m,
                                                                         int pipe_id1) const {
    const PipeSpec& P = geom_.pipe(pipe_id1);
    const double dx = p_m.x - P.x_c;
    const double dy = p_m.y - P.y_c;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (std::abs(r - P.r_outer) > 1e-10 * P.r_outer) {
        throw GeometryError("point is not on the pipe outer circle");
    }
    const double xs = p_m.x / scales_.x_l;
    const double ys = p_m.y / scales_.y_l;
    const Deriv5 plate = derivs_starred(e, Subdomain::kLayer0, xs, ys);
    const Deriv5 wall = derivs_starred(e, Subdomain::kPipes, xs, ys);
    // Dimensionless normal components: (x*-x*_c)/r* carries y_l/x_l once from
    // the starred coordinates and once more as the anisotropy factor.
    const double ratio = scales_.y_l / scales_.x_l;
    const double nx = (dx / P.r_outer) * ratio * ratio;
    const double ny = dy / P.r_outer;
    const double khat_plate = k_hat_star(geom_.layer(0).k, scales_);
    const double khat_wall = k_hat_star(P.k_pipe, scales_);
    const double flux_plate = khat_plate * (plate.ux * nx + plate.uy * ny);
    const double flux_wall = khat_wall * (wall.ux * nx + wall.uy * ny);
    return {plate.u - wall.u, flux_plate - flux_wall};
}

double ResidualEvaluator::residual_convective(const NetworkEnsemble& e, Point2 p_m, int pipe_id1,
                                              double t_w_star) const {
    const PipeSpec& P = geom_.pipe(pipe_id1);
    const double dx = p_m.x - P.x_c;
    const double dy = p_m.y - P.y_c;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (std::abs(r - P.r_inner) > 1e-10 * P.r_inner) {
        throw GeometryError("point is not on the pipe inner surface");
    }
    const double xs = p_m.x / scales_.x_l;
    const double ys = p_m.y / scales_.y_l;
    const Deriv5 wall = derivs_starred(e, Subdomain::kPipes, xs, ys);
    // Outward normal of the solid at the inner surface points toward the pipe
    // axis, so the Robin flux uses the negated radial direction.
    const double ratio = scales_.y_l / scales_.x_l;
    const double nx = (dx / P.r_inner) * ratio;
    const double ny = dy / P.r_inner;
    const double khat = k_hat_star(P.k_pipe, scales_);
    return khat * (wall.ux * nx + wall.uy * ny) - e.h_star() * (wall.u - t_w_star);
}

double ResidualEvaluator::residual_energy(
    const NetworkEnsemble& e, const CaseConfig& c,
    const std::array<std::vector<Point2>, 6>& inner_points_m) const {
    for (const auto& pts : inner_points_m) {
        if (pts.empty()) throw ConfigError("energy residual needs inner-surface points per pipe");
    }
    const double t_w_star = nondim_temp(c.t_w_k(), scales_);
    const double a1 = c.area_inner(geom_);
    double sum = 0;
    for (const auto& pts : inner_points_m) {
        double max_u = -1e300;
        for (const Point2& p : pts) {
            const double xs = p.x / scales_.x_l;
            const double ys = p.y / scales_.y_l;
            max_u = std::max(max_u, derivs_starred(e, Subdomain::kPipes, xs, ys).u);
        }
        sum += max_u - t_w_star;
    }
    // Q_out = h·A1·mean(ΔT_i); h = h*/U0 and ΔT_i = U0·(u*_i,max − t_w*),
    // so in dimensionless form Q_out = h*·A1·mean(u*_i,max − t_w*).
    const double q_out = e.h_star() * a1 * sum / 6.0;
    return (c.power_w - q_out) / c.power_w;
}

double ResidualEvaluator::residual_data(
    const NetworkEnsemble& e,
    const std::map<std::string, std::pair<Point2, double>>& probes_m_k) const {
    double sum = 0;
    for (const auto& [name, pk] : probes_m_k) {
        Subdomain sd;
        try {
            sd = subdomain_of(geom_, pk.first);
        } catch (const RegionError&) {
            throw ConfigError("probe " + name + " lies outside the domain");
        }
        const Deriv5 d = eval_network(e, pk.first, sd);
        const double diff = d.u - nondim_temp(pk.second, scales_);
        sum += diff * diff;
    }
    return sum;
}

// --- RigLoss -----------------------------------------------------------------

namespace {

struct TermAcc {
    double sum = 0;
    std::size_t count = 0;
};

}  // namespace

RigLoss::RigLoss(const RigGeometry& geom, const NondimScales& scales, const CaseConfig& c,
                 const CollocationSet& colloc, bool with_probes)
    : geom_(geom), scales_(scales), case_(c) {
    validate_geometry(geom_);
    validate_case(case_);
    boundary_ = make_boundary_data(case_, scales_, with_probes);
    alpha_star_ = flux_star(flux_per_depth(case_.flux_per_area(geom_), geom_.layer(4).k), scales_);
    a1_ = case_.area_inner(geom_);

    for (int p = 0; p < 6; ++p) {
        const PipeSpec& P = geom_.pipes[static_cast<std::size_t>(p)];
        auto& cache = inner_cache_[static_cast<std::size_t>(p)];
        auto& pts_m = inner_pts_m_[static_cast<std::size_t>(p)];
        for (double th : colloc.inner_theta[static_cast<std::size_t>(p)]) {
            const Point2 pm{P.x_c + P.r_inner * std::cos(th), P.y_c + P.r_inner * std::sin(th)};
            pts_m.push_back(pm);
            cache.xs.push_back(pm.x / scales_.x_l);
            cache.ys.push_back(pm.y / scales_.y_l);
        }
        if (pts_m.empty()) throw ConfigError("each pipe needs inner-surface collocation points");
    }

    colloc_ = colloc;
    if (with_probes && !case_.probes_c.empty()) {
        probe_points_ = case_.probe_points_m.empty() ? default_probe_points(geom_)
                                                     : case_.probe_points_m;
    }
    ws_pool_.resize(12);
    grad_pool_.resize(12);
}

LossState RigLoss::eval(const NetworkEnsemble& e, const std::array<double, 7>& lambdas,
                        std::span<double> grad, std::uint32_t active_mask) {
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != e.param_count()) {
        throw ConfigError("gradient buffer size does not match the ensemble");
    }
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    const double xl = scales_.x_l;
    const double yl = scales_.y_l;
    const double yl2 = yl * yl;
    const double xl2 = xl * xl;
    const double c_pde = 1.0 / (yl2 + xl2);
    const double t_w_star = boundary_.t_w_star;
    const double h_star = e.h_star();
    const std::size_t pn = e.per_net();
    const std::size_t h_idx = e.h_index();

    // --- term counts (fixed by the collocation set) ---
    std::size_t n_pde = 0;
    for (const auto& v : colloc_.interior) n_pde += v.size();
    for (const auto& v : colloc_.pipe_interior) n_pde += v.size();
    std::size_t n_bc = colloc_.bottom_x.size() + colloc_.top_insulated_x.size() +
                       colloc_.top_flux_x.size();
    for (const auto& v : colloc_.periodic_y) n_bc += v.size();
    std::size_t n_ic = 0;
    for (const auto& v : colloc_.planar_interface_x) n_ic += 2 * v.size();
    for (const auto& v : colloc_.outer_theta) n_ic += 2 * v.size();
    std::size_t n_cbh = 0;
    for (const auto& c : inner_cache_) n_cbh += c.xs.size();

    LossState state;
    state.lambdas = lambdas;
    auto active = [&](Subdomain s) { return want_grad && (active_mask & active_bit(s)) != 0; };
    const bool h_active = want_grad && (active_mask & kActiveH) != 0;

    // ---- L_PDE: interior residuals, one batch per subnet region -------------
    // Batches are independent; with threads > 1 they run concurrently and are
    // reduced in fixed batch order.
    struct PdeBatch {
        Subdomain net;
        const std::vector<Point2>* pts;
    };
    std::vector<PdeBatch> batches;
    for (int li = 0; li < 5; ++li) {
        batches.push_back({static_cast<Subdomain>(li), &colloc_.interior[static_cast<std::size_t>(li)]});
    }
    for (int p = 0; p < 6; ++p) {
        batches.push_back({Subdomain::kPipes, &colloc_.pipe_interior[static_cast<std::size_t>(p)]});
    }
    std::vector<double> batch_sum(batches.size(), 0.0);
    const double pde_adj_scale = lambdas[0] * 2.0 / static_cast<double>(n_pde);

    auto run_batch = [&](std::size_t bi, NetWorkspace& ws, std::vector<double>& gslab) {
        const PdeBatch& b = batches[bi];
        const bool act = active(b.net);
        if (act) {
            gslab.assign(pn, 0.0);
        }
        double sum = 0;
        for (const Point2& pm : *b.pts) {
            const Deriv5 d = ens_forward(e, b.net, pm.x / xl, pm.y / yl, ws);
            const double r = c_pde * (yl2 * d.uxx + xl2 * d.uyy);
            sum += r * r;
            if (act) {
                Deriv5 adj;
                adj.uxx = pde_adj_scale * r * c_pde * yl2;
                adj.uyy = pde_adj_scale * r * c_pde * xl2;
                ens_backprop(e, b.net, ws, adj, gslab);
            }
        }
        batch_sum[bi] = sum;
    };

    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            run_batch(bi, ws_pool_[0], grad_pool_[bi]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t]() {
                std::size_t bi;
                while ((bi = next.fetch_add(1)) < batches.size()) {
                    run_batch(bi, ws_pool_[static_cast<std::size_t>(t)], grad_pool_[bi]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    double pde_sum = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
        pde_sum += batch_sum[bi];
        if (active(batches[bi].net)) {
            double* dst = grad.data() + static_cast<std::size_t>(batches[bi].net) * pn;
            const auto& slab = grad_pool_[bi];
            for (std::size_t i = 0; i < pn; ++i) dst[i] += slab[i];
        }
    }
    state.terms.pde = pde_sum / static_cast<double>(n_pde);

    NetWorkspace& ws = ws_pool_[0];
    auto grad_slice = [&](Subdomain s) {
        return std::span<double>(grad.data() + static_cast<std::size_t>(s) * pn, pn);
    };

    // ---- L_BC: periodic pairs, insulated bottom/top, flux segment -----------
    // Pair residuals share one workspace: evaluate left, evaluate right,
    // backprop the right side, re-evaluate the left and backprop it.
    {
        double sum = 0;
        const double adj_scale = lambdas[1] * 2.0 / static_cast<double>(n_bc);
        const double x_right = geom_.x_n / xl;
        for (int li = 0; li < 5; ++li) {
            const auto sd = static_cast<Subdomain>(li);
            const bool act = active(sd);
            for (double ym : colloc_.periodic_y[static_cast<std::size_t>(li)]) {
                const double ys = ym / yl;
                const Deriv5 dl = ens_forward(e, sd, 0.0, ys, ws);
                const double ux_left = dl.ux;
                const Deriv5 dr = ens_forward(e, sd, x_right, ys, ws);
                const double r = ux_left - dr.ux;
                sum += r * r;
                if (act) {
                    Deriv5 adj;
                    adj.ux = -adj_scale * r;
                    ens_backprop(e, sd, ws, adj, grad_slice(sd));
                    ens_forward(e, sd, 0.0, ys, ws);
                    adj.ux = adj_scale * r;
                    ens_backprop(e, sd, ws, adj, grad_slice(sd));
                }
            }
        }
        {
            const bool act0 = active(Subdomain::kLayer0);
            for (double xm : colloc_.bottom_x) {
                const Deriv5 d = ens_forward(e, Subdomain::kLayer0, xm / xl, 0.0, ws);
                sum += d.uy * d.uy;
                if (act0) {
                    Deriv5 adj;
                    adj.uy = adj_scale * d.uy;
                    ens_backprop(e, Subdomain::kLayer0, ws, adj, grad_slice(Subdomain::kLayer0));
                }
            }
            const bool act4 = active(Subdomain::kLayer4);
            const double y_top = geom_.y_n() / yl;
            for (double xm : colloc_.top_insulated_x) {
                const Deriv5 d = ens_forward(e, Subdomain::kLayer4, xm / xl, y_top, ws);
                sum += d.uy * d.uy;
                if (act4) {
                    Deriv5 adj;
                    adj.uy = adj_scale * d.uy;
                    ens_backprop(e, Subdomain::kLayer4, ws, adj, grad_slice(Subdomain::kLayer4));
                }
            }
            for (double xm : colloc_.top_flux_x) {
                const Deriv5 d = ens_forward(e, Subdomain::kLayer4, xm / xl, y_top, ws);
                const double r = d.uy - alpha_star_;
                sum += r * r;
                if (act4) {
                    Deriv5 adj;
                    adj.uy = adj_scale * r;
                    ens_backprop(e, Subdomain::kLayer4, ws, adj, grad_slice(Subdomain::kLayer4));
                }
            }
        }
        state.terms.bc = sum / static_cast<double>(n_bc);
    }

    // ---- L_IC: planar interfaces and outer pipe circles ----------------------
    {
        double sum = 0;
        const double adj_scale = lambdas[2] * 2.0 / static_cast<double>(n_ic);
        for (int ifc = 0; ifc < 4; ++ifc) {
            const auto lo_sd = static_cast<Subdomain>(ifc);
            const auto hi_sd = static_cast<Subdomain>(ifc + 1);
            const bool act_lo = active(lo_sd);
            const bool act_hi = active(hi_sd);
            const double ys = geom_.layer(ifc).y_top / yl;
            const double khat_lo = k_hat_star(geom_.layer(ifc).k, scales_);
            const double khat_hi = k_hat_star(geom_.layer(ifc + 1).k, scales_);
            const double fnorm = 1.0 / (khat_lo + khat_hi);
            double gap2 = 0;
            const auto& xs_list = colloc_.planar_interface_x[static_cast<std::size_t>(ifc)];
            for (double xm : xs_list) {
                const double xs = xm / xl;
                const Deriv5 dlo = ens_forward(e, lo_sd, xs, ys, ws);
                const double u_lo = dlo.u;
                const double uy_lo = dlo.uy;
                const Deriv5 dhi = ens_forward(e, hi_sd, xs, ys, ws);
                const double rv = u_lo - dhi.u;
                const double rf = fnorm * (khat_lo * uy_lo - khat_hi * dhi.uy);
                sum += rv * rv + rf * rf;
                gap2 += rv * rv;
                if (act_hi) {
                    Deriv5 adj;
                    adj.u = -adj_scale * rv;
                    adj.uy = -adj_scale * rf * fnorm * khat_hi;
                    ens_backprop(e, hi_sd, ws, adj, grad_slice(hi_sd));
                }
                if (act_lo) {
                    ens_forward(e, lo_sd, xs, ys, ws);
                    Deriv5 adj;
                    adj.u = adj_scale * rv;
                    adj.uy = adj_scale * rf * fnorm * khat_lo;
                    ens_backprop(e, lo_sd, ws, adj, grad_slice(lo_sd));
                }
            }
            interface_gap_[static_cast<std::size_t>(ifc)] =
                xs_list.empty() ? 0.0 : std::sqrt(gap2 / static_cast<double>(xs_list.size()));
        }
        const double ratio = yl / xl;
        const bool act_plate = active(Subdomain::kLayer0);
        const bool act_wall = active(Subdomain::kPipes);
        const double khat_plate = k_hat_star(geom_.layer(0).k, scales_);
        for (int p = 0; p < 6; ++p) {
            const PipeSpec& P = geom_.pipes[static_cast<std::size_t>(p)];
            const double khat_wall = k_hat_star(P.k_pipe, scales_);
            const double fnorm = 1.0 / (khat_plate + khat_wall);
            for (double th : colloc_.outer_theta[static_cast<std::size_t>(p)]) {
                const double ct = std::cos(th);
                const double st = std::sin(th);
                const double xs = (P.x_c + P.r_outer * ct) / xl;
                const double ys = (P.y_c + P.r_outer * st) / yl;
                const double nx = ct * ratio * ratio;
                const double ny = st;
                const Deriv5 dp = ens_forward(e, Subdomain::kLayer0, xs, ys, ws);
                const double u_p = dp.u;
                const double flux_p = khat_plate * (dp.ux * nx + dp.uy * ny);
                const Deriv5 dw = ens_forward(e, Subdomain::kPipes, xs, ys, ws);
                const double rv = u_p - dw.u;
                const double rf = fnorm * (flux_p - khat_wall * (dw.ux * nx + dw.uy * ny));
                sum += rv * rv + rf * rf;
                if (act_wall) {
                    Deriv5 adj;
                    adj.u = -adj_scale * rv;
                    adj.ux = -adj_scale * rf * fnorm * khat_wall * nx;
                    adj.uy = -adj_scale * rf * fnorm * khat_wall * ny;
                    ens_backprop(e, Subdomain::kPipes, ws, adj, grad_slice(Subdomain::kPipes));
                }
                if (act_plate) {
                    ens_forward(e, Subdomain::kLayer0, xs, ys, ws);
                    Deriv5 adj;
                    adj.u = adj_scale * rv;
                    adj.ux = adj_scale * rf * fnorm * khat_plate * nx;
                    adj.uy = adj_scale * rf * fnorm * khat_plate * ny;
                    ens_backprop(e, Subdomain::kLayer0, ws, adj, grad_slice(Subdomain::kLayer0));
                }
            }
        }
        state.terms.ic = sum / static_cast<double>(n_ic);
    }

    // ---- L_CB and L_h: Robin residuals on the pipe inner surfaces -----------
    // Both use the trainable h* against t_w*; they differ in the anisotropy
    // factor on the x component of the dimensionless normal. One forward
    // evaluation per point serves both terms and the energy-term max scan.
    std::array<double, 6> max_u{};
    std::array<std::pair<double, double>, 6> argmax_pt{};
    {
        double sum_cb = 0, sum_h = 0;
        const double adj_cb = lambdas[3] * 2.0 / static_cast<double>(n_cbh);
        const double adj_h = lambdas[4] * 2.0 / static_cast<double>(n_cbh);
        const double ratio = yl / xl;
        const bool act_wall = active(Subdomain::kPipes);
        for (int p = 0; p < 6; ++p) {
            const PipeSpec& P = geom_.pipes[static_cast<std::size_t>(p)];
            const double khat = k_hat_star(P.k_pipe, scales_);
            const double biot = h_star / khat;
            // conditioned by 1/(1+Bi) so the term scale tracks h*
            const double inv_bi = 1.0 / (1.0 + biot);
            const auto& cache = inner_cache_[static_cast<std::size_t>(p)];
            double mx = -1e300;
            std::pair<double, double> mx_pt{0, 0};
            for (std::size_t i = 0; i < cache.xs.size(); ++i) {
                const double xs = cache.xs[i];
                const double ys = cache.ys[i];
                const double ct = (xs * xl - P.x_c) / P.r_inner;
                const double st = (ys * yl - P.y_c) / P.r_inner;
                const Deriv5 d = ens_forward(e, Subdomain::kPipes, xs, ys, ws);
                if (d.u > mx) {
                    mx = d.u;
                    mx_pt = {xs, ys};
                }
                // Robin with the solid's outward normal (toward the pipe
                // axis); normalized by k̂ so the residual is O(1).
                const double du = d.u - t_w_star;
                const double r_cb = ((d.ux * ct * ratio * ratio + d.uy * st) - biot * du) * inv_bi;
                const double r_h = ((d.ux * ct * ratio + d.uy * st) - biot * du) * inv_bi;
                sum_cb += r_cb * r_cb;
                sum_h += r_h * r_h;
                if (act_wall) {
                    Deriv5 adj;
                    adj.u = -(adj_cb * r_cb + adj_h * r_h) * biot * inv_bi;
                    adj.ux = (adj_cb * r_cb * ct * ratio * ratio + adj_h * r_h * ct * ratio) * inv_bi;
                    adj.uy = (adj_cb * r_cb + adj_h * r_h) * st * inv_bi;
                    ens_backprop(e, Subdomain::kPipes, ws, adj, grad_slice(Subdomain::kPipes));
                }
                if (h_active) {
                    // r = (A - Bi·du)/(1+Bi) gives dr/dlog h* = -Bi·(du + r)/(1+Bi)
                    grad[h_idx] += -(adj_cb * r_cb * (du + r_cb) + adj_h * r_h * (du + r_h)) *
                                   biot * inv_bi;
                }
            }
            max_u[static_cast<std::size_t>(p)] = mx;
            argmax_pt[static_cast<std::size_t>(p)] = mx_pt;
        }
        state.terms.cb = sum_cb / static_cast<double>(n_cbh);
        state.terms.h = sum_h / static_cast<double>(n_cbh);
    }

    // ---- L_Q: energy balance -------------------------------------------------
    {
        double sum_du = 0;
        for (int p = 0; p < 6; ++p) sum_du += max_u[static_cast<std::size_t>(p)] - t_w_star;
        const double r_q = 1.0 - h_star * a1_ * sum_du / (6.0 * case_.power_w);
        state.terms.q = r_q * r_q;
        const double adj_q = lambdas[5] * 2.0 * r_q;
        if (active(Subdomain::kPipes)) {
            const double du_coeff = -h_star * a1_ / (6.0 * case_.power_w);
            for (int p = 0; p < 6; ++p) {
                ens_forward(e, Subdomain::kPipes, argmax_pt[static_cast<std::size_t>(p)].first,
                            argmax_pt[static_cast<std::size_t>(p)].second, ws);
                Deriv5 adj;
                adj.u = adj_q * du_coeff;
                ens_backprop(e, Subdomain::kPipes, ws, adj, grad_slice(Subdomain::kPipes));
            }
        }
        if (h_active) {
            grad[h_idx] += adj_q * (-h_star * a1_ * sum_du / (6.0 * case_.power_w));
        }
    }

    // ---- L_Data ---------------------------------------------------------------
    {
        const std::size_t n_data = boundary_.probe_readings_k.size();
        double sum = 0;
        if (n_data > 0) {
            const double adj_scale = lambdas[6] * 2.0 / static_cast<double>(n_data);
            for (const auto& [name, reading_k] : boundary_.probe_readings_k) {
                auto it = probe_points_.find(name);
                if (it == probe_points_.end()) {
                    throw ConfigError("no coordinates configured for probe " + name);
                }
                Subdomain sd;
                try {
                    sd = subdomain_of(geom_, it->second);
                } catch (const RegionError&) {
                    throw ConfigError("probe " + name + " lies outside the domain");
                }
                const Deriv5 d = ens_forward(e, sd, it->second.x / xl, it->second.y / yl, ws);
                const double r = d.u - nondim_temp(reading_k, scales_);
                sum += r * r;
                if (active(sd)) {
                    Deriv5 adj;
                    adj.u = adj_scale * r;
                    ens_backprop(e, sd, ws, adj, grad_slice(sd));
                }
            }
            state.terms.data = sum / static_cast<double>(n_data);
        }
    }

    state.recompute_total();
    return state;
}

std::string loss_csv_header() {
    return "epoch,L_PDE,L_BC,L_IC,L_CB,L_h,L_Q,L_Data,lambda0,lambda1,lambda2,lambda3,lambda4,"
           "lambda5,lambda6,total,h_star,wall_ms";
}

std::string loss_csv_row(int epoch, const LossState& s, double h_star, double wall_ms) {
    std::ostringstream os;
    os.precision(17);
    os << epoch;
    for (double t : s.terms.as_array()) os << ',' << t;
    for (double l : s.lambdas) os << ',' << l;
    os << ',' << s.total << ',' << h_star << ',' << wall_ms;
    return os.str();
}

}  // namespace pinnhs
