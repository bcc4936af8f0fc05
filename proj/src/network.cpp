#include "pinnhs/network.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "pinnhs/errors.hpp"

namespace pinnhs {

namespace {

void validate_widths(const std::vector<int>& widths) {
    if (widths.size() < 2) throw ConfigError("network needs at least input and output widths");
    for (int w : widths) {
        if (w <= 0) throw ConfigError("network width entries must be positive");
    }
    if (widths.front() != 2) throw ConfigError("network input width must be 2 (x*, y*)");
    if (widths.back() != 1) throw ConfigError("network output width must be 1 (u*)");
}

}  // namespace

std::size_t network_param_count(const std::vector<int>& widths) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        n += static_cast<std::size_t>(widths[l + 1]) * (widths[l] + 1);
    }
    return n;
}

NetworkParams init_network(const std::vector<int>& widths, std::uint64_t seed) {
    validate_widths(widths);
    NetworkParams p;
    p.widths = widths;
    p.seed = seed;
    p.theta.resize(network_param_count(widths));
    std::mt19937_64 rng(seed);
    std::size_t k = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l];
        const int fan_out = widths[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (int i = 0; i < fan_out * fan_in; ++i) p.theta[k++] = dist(rng);
        for (int i = 0; i < fan_out; ++i) p.theta[k++] = 0.0;  // biases
    }
    return p;
}

NetView view_of(const NetworkParams& p) {
    return {p.widths.data(), static_cast<int>(p.widths.size()) - 1, p.theta.data()};
}

void NetWorkspace::prepare(const NetView& net) {
    z_.resize(net.n_layers);
    a_.resize(net.n_layers + 1);
    int max_w = 2;
    a_[0].resize(2);
    for (int l = 0; l < net.n_layers; ++l) {
        z_[l].resize(net.out_width(l));
        a_[l + 1].resize(net.out_width(l));
        max_w = std::max(max_w, net.out_width(l));
    }
    adj_[0].resize(max_w);
    adj_[1].resize(max_w);
}

double net_forward(const NetView& net, double x, double y) {
    double buf_a[2] = {x, y};
    std::vector<double> cur(buf_a, buf_a + 2);
    std::vector<double> next;
    const double* th = net.theta;
    for (int l = 0; l < net.n_layers; ++l) {
        const int n_in = net.in_width(l);
        const int n_out = net.out_width(l);
        next.resize(n_out);
        const double* w = th;
        const double* b = th + static_cast<std::size_t>(n_out) * n_in;
        for (int i = 0; i < n_out; ++i) {
            const double* wi = w + static_cast<std::size_t>(i) * n_in;
            double acc = wi[0] * cur[0];
            for (int j = 1; j < n_in; ++j) acc += wi[j] * cur[j];
            acc += b[i];
            next[i] = (l + 1 == net.n_layers) ? acc : std::tanh(acc);
        }
        cur.swap(next);
        th = b + n_out;
    }
    return cur[0];
}

double forward(const NetworkParams& p, double x, double y) {
    validate_widths(p.widths);
    if (p.theta.size() != network_param_count(p.widths)) {
        throw ConfigError("parameter vector does not match widths");
    }
    return net_forward(view_of(p), x, y);
}

Deriv5 net_forward_derivs(const NetView& net, double x, double y, NetWorkspace& ws) {
    ws.prepare(net);
    auto& in = ws.a(0);
    in[0] = {x, 1.0, 0.0, 0.0, 0.0};
    in[1] = {y, 0.0, 1.0, 0.0, 0.0};
    const double* th = net.theta;
    for (int l = 0; l < net.n_layers; ++l) {
        const int n_in = net.in_width(l);
        const int n_out = net.out_width(l);
        const auto& prev = ws.a(l);
        auto& z = ws.z(l);
        auto& act = ws.a(l + 1);
        const double* w = th;
        const double* b = th + static_cast<std::size_t>(n_out) * n_in;
        const bool last = (l + 1 == net.n_layers);
        for (int i = 0; i < n_out; ++i) {
            const double* wi = w + static_cast<std::size_t>(i) * n_in;
            Deriv5 acc{wi[0] * prev[0].u, wi[0] * prev[0].ux, wi[0] * prev[0].uy,
                       wi[0] * prev[0].uxx, wi[0] * prev[0].uyy};
            for (int j = 1; j < n_in; ++j) {
                const double wj = wi[j];
                acc.u += wj * prev[j].u;
                acc.ux += wj * prev[j].ux;
                acc.uy += wj * prev[j].uy;
                acc.uxx += wj * prev[j].uxx;
                acc.uyy += wj * prev[j].uyy;
            }
            acc.u += b[i];
            z[i] = acc;
            if (last) {
                act[i] = acc;
            } else {
                const double s = std::tanh(acc.u);
                const double s1 = 1.0 - s * s;       // tanh'
                const double s2 = -2.0 * s * s1;     // tanh''
                act[i] = {s, s1 * acc.ux, s1 * acc.uy,
                          s2 * acc.ux * acc.ux + s1 * acc.uxx,
                          s2 * acc.uy * acc.uy + s1 * acc.uyy};
            }
        }
        th = b + n_out;
    }
    return ws.a(net.n_layers)[0];
}

void net_backprop(const NetView& net, NetWorkspace& ws, const Deriv5& out_adj,
                  std::span<double> grad) {
    // Layer offsets into theta/grad.
    // Adjoint of the output a-tuple flows backward; hidden activations need
    // tanh derivatives up to third order.
    std::vector<std::size_t> offset(net.n_layers);
    std::size_t off = 0;
    for (int l = 0; l < net.n_layers; ++l) {
        offset[l] = off;
        off += static_cast<std::size_t>(net.out_width(l)) * (net.in_width(l) + 1);
    }

    auto& abar = ws.adj_buf(0);
    auto& zbar = ws.adj_buf(1);
    abar[0] = out_adj;

    for (int l = net.n_layers - 1; l >= 0; --l) {
        const int n_in = net.in_width(l);
        const int n_out = net.out_width(l);
        const auto& z = ws.z(l);
        const auto& act = ws.a(l + 1);
        const auto& prev = ws.a(l);
        const bool last = (l + 1 == net.n_layers);

        // activation: adjoint of a-tuple -> adjoint of z-tuple
        for (int i = 0; i < n_out; ++i) {
            if (last) {
                zbar[i] = abar[i];
            } else {
                const double s = act[i].u;
                const double s1 = 1.0 - s * s;
                const double s2 = -2.0 * s * s1;
                const double s3 = -2.0 * s1 * (1.0 - 3.0 * s * s);  // tanh'''
                const Deriv5& ab = abar[i];
                const Deriv5& zi = z[i];
                Deriv5 zb;
                zb.u = ab.u * s1 + (ab.ux * zi.ux + ab.uy * zi.uy) * s2 +
                       ab.uxx * (zi.ux * zi.ux * s3 + zi.uxx * s2) +
                       ab.uyy * (zi.uy * zi.uy * s3 + zi.uyy * s2);
                zb.ux = ab.ux * s1 + ab.uxx * 2.0 * s2 * zi.ux;
                zb.uy = ab.uy * s1 + ab.uyy * 2.0 * s2 * zi.uy;
                zb.uxx = ab.uxx * s1;
                zb.uyy = ab.uyy * s1;
                zbar[i] = zb;
            }
        }

        // affine: grads for W, b and adjoint of the previous a-tuple
        const double* w = net.theta + offset[l];
        double* gw = grad.data() + offset[l];
        double* gb = gw + static_cast<std::size_t>(n_out) * n_in;
        for (int j = 0; j < n_in; ++j) abar[j] = Deriv5{};
        for (int i = 0; i < n_out; ++i) {
            const Deriv5& zb = zbar[i];
            const double* wi = w + static_cast<std::size_t>(i) * n_in;
            double* gwi = gw + static_cast<std::size_t>(i) * n_in;
            for (int j = 0; j < n_in; ++j) {
                const Deriv5& pj = prev[j];
                gwi[j] += zb.u * pj.u + zb.ux * pj.ux + zb.uy * pj.uy + zb.uxx * pj.uxx +
                          zb.uyy * pj.uyy;
                if (l > 0) {
                    Deriv5& ab = abar[j];
                    const double wij = wi[j];
                    ab.u += wij * zb.u;
                    ab.ux += wij * zb.ux;
                    ab.uy += wij * zb.uy;
                    ab.uxx += wij * zb.uxx;
                    ab.uyy += wij * zb.uyy;
                }
            }
            gb[i] += zb.u;
        }
    }
}

Tape build_network_tape(const std::vector<int>& widths) {
    validate_widths(widths);
    Tape tape;
    std::vector<Expr> cur = {tape.input("x"), tape.input("y")};
    // Parameter inputs are declared in flat order so positional binding with
    // [x, y, theta...] works.
    std::vector<Expr> next;
    struct LayerInputs {
        std::vector<Expr> w;
        std::vector<Expr> b;
    };
    std::vector<LayerInputs> layer_inputs(widths.size() - 1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int n_in = widths[l];
        const int n_out = widths[l + 1];
        auto& li = layer_inputs[l];
        li.w.reserve(static_cast<std::size_t>(n_out) * n_in);
        for (int i = 0; i < n_out; ++i) {
            for (int j = 0; j < n_in; ++j) {
                li.w.push_back(tape.input("w" + std::to_string(l) + "_" + std::to_string(i) + "_" +
                                          std::to_string(j)));
            }
        }
        li.b.reserve(n_out);
        for (int i = 0; i < n_out; ++i) {
            li.b.push_back(tape.input("b" + std::to_string(l) + "_" + std::to_string(i)));
        }
    }
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int n_in = widths[l];
        const int n_out = widths[l + 1];
        const auto& li = layer_inputs[l];
        next.clear();
        for (int i = 0; i < n_out; ++i) {
            Expr acc = li.w[static_cast<std::size_t>(i) * n_in] * cur[0];
            for (int j = 1; j < n_in; ++j) {
                acc = acc + li.w[static_cast<std::size_t>(i) * n_in + j] * cur[j];
            }
            acc = acc + li.b[i];
            next.push_back(l + 2 == widths.size() ? acc : tanh(acc));
        }
        cur = next;
    }
    tape.set_output(cur[0]);
    return tape;
}

void save_network(const NetworkParams& p, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["widths"] = p.widths;
    j["seed"] = p.seed;
    j["activation"] = "tanh";
    j["theta"] = p.theta;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << j.dump(1, '\t') << "\n";
}

NetworkParams load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1) {
        throw SchemaError("unsupported checkpoint schema in " + path);
    }
    NetworkParams p;
    p.widths = j.at("widths").get<std::vector<int>>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.theta = j.at("theta").get<std::vector<double>>();
    validate_widths(p.widths);
    if (p.theta.size() != network_param_count(p.widths)) {
        throw SchemaError("checkpoint parameter count does not match widths: " + path);
    }
    return p;
}

const char* subdomain_name(Subdomain s) {
    switch (s) {
        case Subdomain::kLayer0: return "layer0";
        case Subdomain::kLayer1: return "layer1";
        case Subdomain::kLayer2: return "layer2";
        case Subdomain::kLayer3: return "layer3";
        case Subdomain::kLayer4: return "layer4";
        case Subdomain::kPipes: return "pipes";
    }
    return "?";
}

NetView NetworkEnsemble::subnet(Subdomain s) const {
    const std::size_t pn = per_net();
    return {widths.data(), static_cast<int>(widths.size()) - 1,
            flat.data() + static_cast<std::size_t>(s) * pn};
}

double NetworkEnsemble::h_star() const { return std::exp(flat.back()); }

void NetworkEnsemble::set_h_star(double h_star) {
    if (h_star <= 0.0) throw ConfigError("h* must be positive");
    flat.back() = std::log(h_star);
}

NetworkEnsemble init_ensemble(const std::vector<int>& widths, std::uint64_t seed,
                              double h_star_init) {
    validate_widths(widths);
    if (h_star_init <= 0.0) throw ConfigError("h* init must be positive");
    NetworkEnsemble e;
    e.widths = widths;
    const std::size_t pn = network_param_count(widths);
    e.flat.resize(pn * kNumSubnets + 1);
    for (int s = 0; s < kNumSubnets; ++s) {
        NetworkParams p = init_network(widths, seed + static_cast<std::uint64_t>(s));
        std::copy(p.theta.begin(), p.theta.end(), e.flat.begin() + s * pn);
    }
    e.flat.back() = std::log(h_star_init);
    return e;
}

Deriv5 ens_forward(const NetworkEnsemble& e, Subdomain sd, double xs, double ys,
                   NetWorkspace& ws) {
    const InputMap& m = e.input_maps[static_cast<std::size_t>(sd)];
    Deriv5 d = net_forward_derivs(e.subnet(sd), xs, m.y_scale * ys + m.y_shift, ws);
    d.uy *= m.y_scale;
    d.uyy *= m.y_scale * m.y_scale;
    return d;
}

void ens_backprop(const NetworkEnsemble& e, Subdomain sd, NetWorkspace& ws, Deriv5 adj,
                  std::span<double> grad_slice) {
    const InputMap& m = e.input_maps[static_cast<std::size_t>(sd)];
    adj.uy *= m.y_scale;
    adj.uyy *= m.y_scale * m.y_scale;
    net_backprop(e.subnet(sd), ws, adj, grad_slice);
}

void save_ensemble(const NetworkEnsemble& e, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["widths"] = e.widths;
    j["activation"] = "tanh";
    j["flat"] = e.flat;
    for (const auto& m : e.input_maps) {
        j["input_maps"].push_back({{"y_scale", m.y_scale}, {"y_shift", m.y_shift}});
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write ensemble checkpoint: " + path);
    out << j.dump(1, '\t') << "\n";
}

NetworkEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read ensemble checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1) {
        throw SchemaError("unsupported ensemble schema in " + path);
    }
    NetworkEnsemble e;
    e.widths = j.at("widths").get<std::vector<int>>();
    e.flat = j.at("flat").get<std::vector<double>>();
    if (j.contains("input_maps")) {
        const auto& maps = j["input_maps"];
        for (std::size_t s = 0; s < 6 && s < maps.size(); ++s) {
            e.input_maps[s].y_scale = maps[s].at("y_scale").get<double>();
            e.input_maps[s].y_shift = maps[s].at("y_shift").get<double>();
        }
    }
    validate_widths(e.widths);
    if (e.flat.size() != network_param_count(e.widths) * kNumSubnets + 1) {
        throw SchemaError("ensemble parameter count does not match widths: " + path);
    }
    return e;
}

}  // namespace pinnhs
