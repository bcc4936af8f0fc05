#include "pinnhs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pinnhs {

namespace {

// One LHS round: n stratified samples of [0,1), shuffled stratum order.
std::vector<double> lhs_1d(int n, std::mt19937_64& rng) {
    std::vector<double> out(n);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<int> strata(n);
    for (int i = 0; i < n; ++i) strata[i] = i;
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int i = 0; i < n; ++i) out[i] = (strata[i] + u01(rng)) / n;
    return out;
}

}  // namespace

std::vector<double> lhs_interval(int n, double a, double b, std::mt19937_64& rng) {
    auto u = lhs_1d(n, rng);
    for (auto& v : u) v = a + v * (b - a);
    return u;
}

std::vector<Point2> lhs_rect(int n, double x0, double x1, double y0, double y1,
                             std::mt19937_64& rng) {
    auto ux = lhs_1d(n, rng);
    auto uy = lhs_1d(n, rng);
    std::vector<Point2> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = {x0 + ux[i] * (x1 - x0), y0 + uy[i] * (y1 - y0)};
    }
    return out;
}

SampleCounts SampleCounts::scaled(double divisor) const {
    if (divisor <= 0) throw ConfigError("count divisor must be positive");
    auto sc = [divisor](int n) { return std::max(1, static_cast<int>(std::lround(n / divisor))); };
    SampleCounts s = *this;
    for (auto& n : s.interior_layer) n = sc(n);
    s.interior_per_pipe = sc(interior_per_pipe);
    s.per_side_pairs = sc(per_side_pairs);
    s.bottom = sc(bottom);
    s.top_insulated = sc(top_insulated);
    s.flux = sc(flux);
    s.per_interface = sc(per_interface);
    return s;
}

std::size_t CollocationSet::total_points() const {
    std::size_t n = 0;
    for (const auto& v : interior) n += v.size();
    for (const auto& v : pipe_interior) n += v.size();
    for (const auto& v : periodic_y) n += 2 * v.size();
    n += bottom_x.size() + top_insulated_x.size() + top_flux_x.size();
    for (const auto& v : planar_interface_x) n += v.size();
    for (const auto& v : outer_theta) n += v.size();
    for (const auto& v : inner_theta) n += v.size();
    return n;
}

CollocationSet sample(const RigGeometry& geom, const SampleCounts& counts, std::uint64_t seed) {
    validate_geometry(geom);
    std::mt19937_64 rng(seed);
    CollocationSet cs;

    // Interior points, layer by layer. The cold plate rejects points inside
    // any pipe outer circle and refills with fresh LHS rounds.
    for (int li = 0; li < 5; ++li) {
        const LayerSpec& L = geom.layer(li);
        const int want = counts.interior_layer[static_cast<std::size_t>(li)];
        if (want <= 0) throw SamplingError("interior count must be positive");
        auto& dst = cs.interior[static_cast<std::size_t>(li)];
        dst.reserve(want);
        int rounds = 0;
        while (static_cast<int>(dst.size()) < want) {
            if (++rounds > 1000) {
                throw SamplingError("layer " + std::to_string(li) +
                                    " has too little feasible area to sample");
            }
            const int need = want - static_cast<int>(dst.size());
            for (Point2 p : lhs_rect(need, 0.0, geom.x_n, L.y_bottom, L.y_top, rng)) {
                if (li == 0 && inside_any_pipe(geom, p)) continue;
                dst.push_back(p);
            }
        }
    }

    // Pipe-wall annuli: LHS over angle and over radial area fraction.
    for (int p = 0; p < 6; ++p) {
        const PipeSpec& P = geom.pipes[static_cast<std::size_t>(p)];
        const int n = counts.interior_per_pipe;
        auto th = lhs_interval(n, 0.0, 2.0 * std::numbers::pi, rng);
        auto uf = lhs_1d(n, rng);
        auto& dst = cs.pipe_interior[static_cast<std::size_t>(p)];
        dst.resize(n);
        const double ri2 = P.r_inner * P.r_inner;
        const double ro2 = P.r_outer * P.r_outer;
        for (int i = 0; i < n; ++i) {
            const double r = std::sqrt(ri2 + uf[i] * (ro2 - ri2));
            dst[i] = {P.x_c + r * std::cos(th[i]), P.y_c + r * std::sin(th[i])};
        }
    }

    // Boundaries.
    for (int li = 0; li < 5; ++li) {
        const LayerSpec& L = geom.layer(li);
        cs.periodic_y[static_cast<std::size_t>(li)] =
            lhs_interval(counts.per_side_pairs, L.y_bottom, L.y_top, rng);
    }
    cs.bottom_x = lhs_interval(counts.bottom, 0.0, geom.x_n, rng);
    {
        const double len_left = geom.x_a;
        const double len_right = geom.x_n - geom.x_b;
        const double len = len_left + len_right;
        int n_left = 0;
        int n_right = 0;
        if (len_left > 0.0 && len_right > 0.0) {
            n_left = std::max(1, static_cast<int>(std::lround(counts.top_insulated * len_left / len)));
            n_right = std::max(1, counts.top_insulated - n_left);
        } else if (len_left > 0.0) {
            n_left = counts.top_insulated;
        } else if (len_right > 0.0) {
            n_right = counts.top_insulated;
        }
        if (n_left > 0) {
            auto xs = lhs_interval(n_left, 0.0, geom.x_a, rng);
            cs.top_insulated_x.insert(cs.top_insulated_x.end(), xs.begin(), xs.end());
        }
        if (n_right > 0) {
            auto xs = lhs_interval(n_right, geom.x_b, geom.x_n, rng);
            cs.top_insulated_x.insert(cs.top_insulated_x.end(), xs.begin(), xs.end());
        }
    }
    cs.top_flux_x = lhs_interval(counts.flux, geom.x_a, geom.x_b, rng);

    // Interfaces.
    for (int i = 0; i < 4; ++i) {
        cs.planar_interface_x[static_cast<std::size_t>(i)] =
            lhs_interval(counts.per_interface, 0.0, geom.x_n, rng);
    }
    for (int p = 0; p < 6; ++p) {
        cs.outer_theta[static_cast<std::size_t>(p)] =
            lhs_interval(counts.per_interface, 0.0, 2.0 * std::numbers::pi, rng);
        cs.inner_theta[static_cast<std::size_t>(p)] =
            lhs_interval(counts.per_interface, 0.0, 2.0 * std::numbers::pi, rng);
    }
    return cs;
}

}  // namespace pinnhs
