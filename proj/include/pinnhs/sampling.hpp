#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "pinnhs/geometry.hpp"

namespace pinnhs {

// Collocation counts per region. Defaults are the paper's full-scale counts;
// scaled() divides everything for desk-scale runs.
struct SampleCounts {
    std::array<int, 5> interior_layer = {7624, 6000, 6000, 6000, 7000};
    int interior_per_pipe = 200;
    int per_side_pairs = 200;  // periodic pairs per layer
    int bottom = 200;
    int top_insulated = 200;   // split across the two insulated segments
    int flux = 300;
    int per_interface = 200;   // each planar interface and each circle

    SampleCounts scaled(double divisor) const;
};

// All coordinates are physical (meters); angles parameterize circle points as
// center + r (cos, sin). Points are guaranteed to lie in their regions.
struct CollocationSet {
    std::array<std::vector<Point2>, 5> interior;        // layer 0 excludes pipe disks
    std::array<std::vector<Point2>, 6> pipe_interior;   // annulus points
    std::array<std::vector<double>, 5> periodic_y;      // one y per left/right pair
    std::vector<double> bottom_x;
    std::vector<double> top_insulated_x;
    std::vector<double> top_flux_x;
    std::array<std::vector<double>, 4> planar_interface_x;  // (0,1), (1,2), (2,3), (3,4)
    std::array<std::vector<double>, 6> outer_theta;
    std::array<std::vector<double>, 6> inner_theta;

    std::size_t total_points() const;
};

// Latin-hypercube stratified sampling per region, deterministic in the seed.
// Layer-0 interior points falling inside a pipe outer circle are rejected and
// resampled with fresh LHS rounds until the requested count is met.
CollocationSet sample(const RigGeometry& geom, const SampleCounts& counts, std::uint64_t seed);

// One LHS round over an interval / axis-aligned rectangle (building blocks,
// also used by the validation studies).
std::vector<double> lhs_interval(int n, double a, double b, std::mt19937_64& rng);
std::vector<Point2> lhs_rect(int n, double x0, double x1, double y0, double y1,
                             std::mt19937_64& rng);

}  // namespace pinnhs
