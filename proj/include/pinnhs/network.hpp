#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinnhs/tape.hpp"

namespace pinnhs {

// Fully connected u*(x*, y*) network: tanh hidden layers, linear output.
// Parameters live in one flat array, per layer [W row-major, b], so an
// ensemble of subnets plus the trainable h* packs into a single optimizer
// vector.
struct NetworkParams {
    std::vector<int> widths;     // widths[0] = 2 inputs, widths.back() = 1 output
    std::vector<double> theta;   // [W0, b0, W1, b1, ...]
    std::uint64_t seed = 0;

    std::size_t layer_count() const { return widths.size() - 1; }
    std::size_t param_count() const { return theta.size(); }
};

std::size_t network_param_count(const std::vector<int>& widths);

// Glorot-uniform weights with bound sqrt(6/(fan_in+fan_out)), zero biases,
// reproducible from the seed.
NetworkParams init_network(const std::vector<int>& widths, std::uint64_t seed);

// Non-owning view over a flat parameter slice (used by the ensemble).
struct NetView {
    const int* widths = nullptr;
    int n_layers = 0;  // number of weight layers
    const double* theta = nullptr;

    int in_width(int layer) const { return widths[layer]; }
    int out_width(int layer) const { return widths[layer + 1]; }
};

NetView view_of(const NetworkParams& p);

// Value plus first and second input derivatives, propagated layerwise.
struct Deriv5 {
    double u = 0, ux = 0, uy = 0, uxx = 0, uyy = 0;
};

// Per-thread scratch: propagated tuples per layer (kept for backprop) and
// adjoint swap buffers.
class NetWorkspace {
public:
    void prepare(const NetView& net);

    std::vector<Deriv5>& z(int layer) { return z_[layer]; }
    std::vector<Deriv5>& a(int layer) { return a_[layer]; }  // a_[0] is the input tuple
    const std::vector<Deriv5>& z(int layer) const { return z_[layer]; }
    const std::vector<Deriv5>& a(int layer) const { return a_[layer]; }
    std::vector<Deriv5>& adj_buf(int which) { return adj_[which]; }

private:
    std::vector<std::vector<Deriv5>> z_;
    std::vector<std::vector<Deriv5>> a_;
    std::vector<Deriv5> adj_[2];
};

// Plain forward value. Accumulation order is canonical (first weight product,
// then remaining products left to right, bias last) and matches the tape
// route bit for bit.
double net_forward(const NetView& net, double x, double y);
double forward(const NetworkParams& p, double x, double y);

// Forward pass propagating (u, ux, uy, uxx, uyy); fills the workspace so a
// subsequent net_backprop can run.
Deriv5 net_forward_derivs(const NetView& net, double x, double y, NetWorkspace& ws);

// Reverse pass through the derivative propagation: given the adjoint of the
// output tuple, accumulates d(scalar)/d(theta) into grad (+=). grad must have
// the network's param_count.
void net_backprop(const NetView& net, NetWorkspace& ws, const Deriv5& out_adj,
                  std::span<double> grad);

// Records the identical forward computation on a tape. Inputs are "x", "y"
// followed by every parameter in flat order, so positional binding with
// [x, y, theta...] evaluates the same graph.
Tape build_network_tape(const std::vector<int>& widths);

// Versioned JSON checkpoint (widths, seed, row-major weight/bias arrays).
void save_network(const NetworkParams& p, const std::string& path);
NetworkParams load_network(const std::string& path);

// --- ensemble --------------------------------------------------------------

// Subdomain ids: the five material layers, plus one shared net for the six
// pipe walls.
enum class Subdomain : int {
    kLayer0 = 0,
    kLayer1 = 1,
    kLayer2 = 2,
    kLayer3 = 3,
    kLayer4 = 4,
    kPipes = 5,
};
inline constexpr int kNumSubnets = 6;

const char* subdomain_name(Subdomain s);

// Per-subnet affine input conditioning: the net is evaluated at
// ŷ = y_scale·y* + y_shift so thin layers see order-one inputs. Derivatives
// returned to callers are w.r.t. the unmapped starred coordinates.
struct InputMap {
    double y_scale = 1.0;
    double y_shift = 0.0;
};

// Six subnets with identical architecture plus the trainable log h*.
// h* is the dimensionless heat transfer coefficient (h* = h·U0); the log
// parameterization keeps it positive across the 10..1e4 W/m²K range.
struct NetworkEnsemble {
    std::vector<int> widths;
    std::vector<double> flat;  // [net0 | ... | net5 | log_h_star]
    std::array<InputMap, 6> input_maps;

    std::size_t per_net() const { return network_param_count(widths); }
    std::size_t param_count() const { return flat.size(); }
    std::size_t h_index() const { return flat.size() - 1; }

    NetView subnet(Subdomain s) const;
    double log_h_star() const { return flat.back(); }
    double h_star() const;
    void set_h_star(double h_star);
};

NetworkEnsemble init_ensemble(const std::vector<int>& widths, std::uint64_t seed,
                              double h_star_init = 1.0);

// Evaluation through the subnet's input map (forward derivatives and the
// matching adjoint chain). grad_slice is the subnet's slice of the flat
// gradient.
Deriv5 ens_forward(const NetworkEnsemble& e, Subdomain sd, double xs, double ys,
                   NetWorkspace& ws);
void ens_backprop(const NetworkEnsemble& e, Subdomain sd, NetWorkspace& ws, Deriv5 adj,
                  std::span<double> grad_slice);

void save_ensemble(const NetworkEnsemble& e, const std::string& path);
NetworkEnsemble load_ensemble(const std::string& path);

}  // namespace pinnhs
