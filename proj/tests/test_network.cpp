#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "pinnhs/network.hpp"

using namespace pinnhs;

namespace {

std::vector<double> tape_inputs(const NetworkParams& p, double x, double y) {
    std::vector<double> in;
    in.reserve(2 + p.theta.size());
    in.push_back(x);
    in.push_back(y);
    in.insert(in.end(), p.theta.begin(), p.theta.end());
    return in;
}

// Reference derivatives from the tape: value + first derivatives from one
// reverse pass, second derivatives from forward-over-reverse.
Deriv5 tape_derivs(const Tape& t, const NetworkParams& p, double x, double y) {
    Deriv5 d;
    const auto in = tape_inputs(p, x, y);
    Workspace<double> ws;
    d.u = t.evaluate_into<double>(in, ws);
    t.reverse_into(ws);
    d.ux = ws.adjoints[t.input_node(0)];
    d.uy = ws.adjoints[t.input_node(1)];
    for (int dir = 0; dir < 2; ++dir) {
        std::vector<Dual1> din(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
            din[i] = Dual1(in[i], i == static_cast<std::size_t>(dir) ? 1.0 : 0.0);
        }
        Workspace<Dual1> wd;
        t.evaluate_into<Dual1>(din, wd);
        t.reverse_into(wd);
        (dir == 0 ? d.uxx : d.uyy) =
            wd.adjoints[t.input_node(static_cast<std::uint32_t>(dir))].tangent;
    }
    return d;
}

}  // namespace

TEST_CASE("init: determinism, Glorot bound, seed sensitivity") {
    const std::vector<int> widths = {2, 64, 64, 1};
    const NetworkParams a = init_network(widths, 7);
    const NetworkParams b = init_network(widths, 7);
    CHECK(a.theta == b.theta);

    const NetworkParams c = init_network(widths, 8);
    CHECK(a.theta != c.theta);

    // all weights within the per-layer bound, all biases zero
    std::size_t k = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const double bound = std::sqrt(6.0 / (widths[l] + widths[l + 1]));
        for (int i = 0; i < widths[l + 1] * widths[l]; ++i) {
            CHECK(std::abs(a.theta[k]) <= bound);
            ++k;
        }
        for (int i = 0; i < widths[l + 1]; ++i) {
            CHECK(a.theta[k] == 0.0);
            ++k;
        }
    }
    CHECK_THROWS_AS(init_network({2, 0, 1}, 1), ConfigError);
}

TEST_CASE("forward base cases") {
    NetworkParams p = init_network({2, 8, 1}, 3);
    std::fill(p.theta.begin(), p.theta.end(), 0.0);
    CHECK(forward(p, 0.35, -2.0) == 0.0);  // tanh(0) propagates

    // single hidden unit, w=(1,0), b=0, output weight 1 -> tanh(x)
    NetworkParams q = init_network({2, 1, 1}, 3);
    q.theta = {1.0, 0.0, 0.0, 1.0, 0.0};  // W0=(1,0), b0=0, W1=(1), b1=0
    CHECK(forward(q, 0.5, 0.9) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
}

TEST_CASE("forward equals tape evaluation bit-exactly") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const std::vector<int> widths = {2, 13, 7, 1};
        NetworkParams p = init_network(widths, seed);
        std::mt19937_64 rng(seed + 99);
        std::uniform_real_distribution<double> d(-0.5, 0.5);
        for (auto& th : p.theta) th += 0.01 * d(rng);
        const Tape t = build_network_tape(widths);
        Workspace<double> ws;
        for (int rep = 0; rep < 20; ++rep) {
            const double x = d(rng) * 2;
            const double y = d(rng) * 2;
            const double direct = forward(p, x, y);
            const std::vector<double> in = tape_inputs(p, x, y);
            const double taped = t.evaluate_into<double>(in, ws);
            CHECK(direct == taped);  // identical op order, identical bits
        }
    }
}

TEST_CASE("layerwise derivative propagation agrees with the tape route") {
    const std::vector<int> widths = {2, 11, 9, 1};
    NetworkParams p = init_network(widths, 17);
    const Tape t = build_network_tape(widths);
    NetWorkspace ws;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        const double x = d(rng);
        const double y = d(rng);
        const Deriv5 fast = net_forward_derivs(view_of(p), x, y, ws);
        const Deriv5 ref = tape_derivs(t, p, x, y);
        CHECK(fast.u == doctest::Approx(ref.u).epsilon(1e-14));
        CHECK(fast.ux == doctest::Approx(ref.ux).epsilon(1e-12));
        CHECK(fast.uy == doctest::Approx(ref.uy).epsilon(1e-12));
        CHECK(fast.uxx == doctest::Approx(ref.uxx).epsilon(1e-10));
        CHECK(fast.uyy == doctest::Approx(ref.uyy).epsilon(1e-10));
    }
}

TEST_CASE("backprop through the derivative propagation matches finite differences") {
    // scalar = a·u + b·ux + c·uy + d·uxx + e·uyy with fixed coefficients;
    // d(scalar)/d(theta) from net_backprop vs central differences.
    const std::vector<int> widths = {2, 6, 5, 1};
    NetworkParams p = init_network(widths, 23);
    const Deriv5 coef{0.7, -1.3, 0.45, 0.9, -0.25};
    const double x = 0.31, y = -0.62;

    auto scalar_at = [&](const NetworkParams& q) {
        NetWorkspace ws;
        const Deriv5 d = net_forward_derivs(view_of(q), x, y, ws);
        return coef.u * d.u + coef.ux * d.ux + coef.uy * d.uy + coef.uxx * d.uxx +
               coef.uyy * d.uyy;
    };

    NetWorkspace ws;
    net_forward_derivs(view_of(p), x, y, ws);
    std::vector<double> grad(p.theta.size(), 0.0);
    net_backprop(view_of(p), ws, coef, grad);

    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t i = rng() % p.theta.size();
        const double h = 1e-6 * std::max(1.0, std::abs(p.theta[i]));
        NetworkParams q = p;
        q.theta[i] += h;
        const double fp = scalar_at(q);
        q.theta[i] = p.theta[i] - h;
        const double fm = scalar_at(q);
        const double fd = (fp - fm) / (2 * h);
        if (std::abs(fd) > 1e-9) {
            CHECK(grad[i] == doctest::Approx(fd).epsilon(2e-5));
        } else {
            CHECK(std::abs(grad[i]) < 1e-7);
        }
    }
}

TEST_CASE("hidden-unit permutation leaves the output invariant") {
    const std::vector<int> widths = {2, 4, 1};
    NetworkParams p = init_network(widths, 31);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-0.8, 0.8);
    for (auto& th : p.theta) th += 0.05 * d(rng);

    // swap hidden units 1 and 2 consistently in W0 rows, b0, and W1 columns
    NetworkParams q = p;
    auto w0 = [&](NetworkParams& n, int i, int j) -> double& {
        return n.theta[static_cast<std::size_t>(i) * 2 + j];
    };
    auto b0 = [&](NetworkParams& n, int i) -> double& { return n.theta[8 + i]; };
    auto w1 = [&](NetworkParams& n, int j) -> double& { return n.theta[12 + j]; };
    for (int j = 0; j < 2; ++j) std::swap(w0(q, 1, j), w0(q, 2, j));
    std::swap(b0(q, 1), b0(q, 2));
    std::swap(w1(q, 1), w1(q, 2));

    for (int rep = 0; rep < 10; ++rep) {
        const double x = d(rng), y = d(rng);
        CHECK(forward(p, x, y) == doctest::Approx(forward(q, x, y)).epsilon(1e-14));
    }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    const NetworkParams p = init_network({2, 10, 10, 1}, 77);
    const std::string path = "net_ckpt_test.json";
    save_network(p, path);
    const NetworkParams q = load_network(path);
    CHECK(p.widths == q.widths);
    CHECK(p.seed == q.seed);
    CHECK(p.theta == q.theta);
    std::remove(path.c_str());
}

TEST_CASE("ensemble: six subnets plus positive h*") {
    NetworkEnsemble e = init_ensemble({2, 8, 8, 1}, 5, 1.0);
    CHECK(e.param_count() == 6 * network_param_count({2, 8, 8, 1}) + 1);
    CHECK(e.h_star() == doctest::Approx(1.0));
    e.set_h_star(345.5);
    CHECK(e.h_star() == doctest::Approx(345.5).epsilon(1e-14));
    CHECK_THROWS_AS(e.set_h_star(-2.0), ConfigError);

    // distinct subnet initializations
    const NetView a = e.subnet(Subdomain::kLayer0);
    const NetView b = e.subnet(Subdomain::kLayer1);
    bool differ = false;
    for (std::size_t i = 0; i < e.per_net(); ++i) {
        if (a.theta[i] != b.theta[i]) {
            differ = true;
            break;
        }
    }
    CHECK(differ);

    const std::string path = "ens_ckpt_test.json";
    save_ensemble(e, path);
    const NetworkEnsemble e2 = load_ensemble(path);
    CHECK(e2.flat == e.flat);
    std::remove(path.c_str());
}
