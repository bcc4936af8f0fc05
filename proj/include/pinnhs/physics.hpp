#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pinnhs/case_config.hpp"
#include "pinnhs/geometry.hpp"
#include "pinnhs/network.hpp"
#include "pinnhs/sampling.hpp"

namespace pinnhs {

// The seven loss terms of the composite objective.
struct LossTerms {
    double pde = 0, bc = 0, ic = 0, cb = 0, h = 0, q = 0, data = 0;

    std::array<double, 7> as_array() const { return {pde, bc, ic, cb, h, q, data}; }
    static const std::array<const char*, 7>& names();
};

struct LossState {
    LossTerms terms;
    std::array<double, 7> lambdas = {1, 1, 1, 1, 1, 1, 1};
    double total = 0;

    void recompute_total();
};

// Case-level boundary information in dimensionless form.
struct BoundaryData {
    double t_in_k = 0;
    double t_out_k = 0;
    double t_w_star = 0;  // nondim((t_in + t_out)/2)
    std::map<std::string, double> probe_readings_k;
};

BoundaryData make_boundary_data(const CaseConfig& c, const NondimScales& s, bool with_probes);

// Bitmask over gradient targets: bits 0..5 the subnets, bit 6 the trainable
// log h*.
inline constexpr std::uint32_t kActiveAll = 0x7F;
inline std::uint32_t active_bit(Subdomain s) { return 1u << static_cast<int>(s); }
inline constexpr std::uint32_t kActiveH = 1u << 6;

// --- spec-level residual operations ----------------------------------------
//
// Scalar residuals for single points, in the exact dimensionless form of the
// governing equations (k* = k·U0/(x_l²·y_l²) on the PDE, k̂* = k·U0/y_l on
// fluxes). These are the audited definitions; the loss assembler applies
// fixed normalization constants on top so the seven terms train on
// comparable scales.
//
// Points are physical (meters); region membership is checked and violations
// raise RegionError/GeometryError.
class ResidualEvaluator {
public:
    // Route selects how u and its derivatives are obtained: the layerwise
    // propagation used in training, or replay through the autodiff tape.
    // Both must agree; tests pin this.
    enum class Route { kLayerwise, kTape };

    ResidualEvaluator(const RigGeometry& geom, const NondimScales& scales,
                      Route route = Route::kLayerwise);

    // Replaces a subnet's field with a closed-form (value, derivatives)
    // provider in starred coordinates. Manufactured-solution tests install
    // exact fields here; the residual definitions are then checked
    // independently of any network.
    using FieldFn = std::function<Deriv5(double xs, double ys)>;
    void override_field(Subdomain sd, FieldFn fn);

    double residual_pde(const NetworkEnsemble& e, Point2 p_m, Subdomain sd) const;
    double residual_periodic(const NetworkEnsemble& e, double y_m, int layer_id) const;
    double residual_flux_top(const NetworkEnsemble& e, double x_m, double alpha_star) const;
    double residual_insulated_top(const NetworkEnsemble& e, double x_m) const;
    double residual_insulated_bottom(const NetworkEnsemble& e, double x_m) const;
    // Planar interface between layer `lower` and `lower+1`: (value jump,
    // flux jump).
    std::pair<double, double> residual_interface_planar(const NetworkEnsemble& e, double x_m,
                                                        int lower) const;
    // Outer pipe circle between the cold plate and the pipe wall; the
    // dimensionless normal carries the y_l/x_l anisotropy factor on its x
    // component.
    std::pair<double, double> residual_interface_circular(const NetworkEnsemble& e, Point2 p_m,
                                                          int pipe_id1) const;
    // Robin condition on the pipe inner surface against t_w* with the current
    // trainable h*.
    double residual_convective(const NetworkEnsemble& e, Point2 p_m, int pipe_id1,
                               double t_w_star) const;
    // Energy balance (Q_in - Q_out)/P0 with Q_out = h·A1·mean_i(t_i - t_w),
    // t_i the maximum redimensioned temperature over pipe i's inner-surface
    // points.
    double residual_energy(const NetworkEnsemble& e, const CaseConfig& c,
                           const std::array<std::vector<Point2>, 6>& inner_points_m) const;
    // Sum of squared dimensionless mismatches at the probes; empty map -> 0.
    double residual_data(const NetworkEnsemble& e,
                         const std::map<std::string, std::pair<Point2, double>>& probes_m_k) const;

    // u and its input derivatives in starred coordinates for the subnet
    // owning the point.
    Deriv5 eval_network(const NetworkEnsemble& e, Point2 p_m, Subdomain sd) const;

    const NondimScales& scales() const { return scales_; }
    const RigGeometry& geometry() const { return geom_; }

private:
    Deriv5 derivs_starred(const NetworkEnsemble& e, Subdomain sd, double xs, double ys) const;

    RigGeometry geom_;
    NondimScales scales_;
    Route route_;
    std::array<FieldFn, 6> field_override_;
    mutable NetWorkspace ws_;
    mutable std::map<std::string, Tape> tapes_;  // per-widths tape cache (tape route)
};

// Subdomain containing a physical point (layer, or the pipes subnet when the
// point falls in a pipe wall); throws RegionError if the point is in the
// water or outside the domain.
Subdomain subdomain_of(const RigGeometry& g, Point2 p_m);

// --- loss assembly -----------------------------------------------------------

// Precomputes starred collocation caches and fixed per-term normalization
// constants, then evaluates the seven-term loss and its gradient. Values are
// always computed for every term; backpropagation is restricted to the
// subnets/h selected by the active mask (the sequential-training contract).
class RigLoss {
public:
    RigLoss(const RigGeometry& geom, const NondimScales& scales, const CaseConfig& c,
            const CollocationSet& colloc, bool with_probes);

    // grad must be empty (values only) or sized e.param_count(). Accumulates
    // into grad after zeroing it.
    LossState eval(const NetworkEnsemble& e, const std::array<double, 7>& lambdas,
                   std::span<double> grad, std::uint32_t active_mask = kActiveAll);

    // RMS value jump per planar interface from the last eval.
    const std::array<double, 4>& interface_gap() const { return interface_gap_; }

    const BoundaryData& boundary() const { return boundary_; }
    double alpha_star() const { return alpha_star_; }
    // Pipe inner-surface points (meters), as used by the energy term.
    const std::array<std::vector<Point2>, 6>& inner_points_m() const { return inner_pts_m_; }

    int threads = 1;  // >1 parallelizes interior batches; results are
                      // independent of the thread count (fixed chunking)

private:
    RigGeometry geom_;
    NondimScales scales_;
    CaseConfig case_;
    CollocationSet colloc_;
    BoundaryData boundary_;
    std::map<std::string, Point2> probe_points_;
    double alpha_star_ = 0;
    double a1_ = 0;
    std::array<std::vector<Point2>, 6> inner_pts_m_;
    std::array<double, 4> interface_gap_ = {0, 0, 0, 0};
    // starred inner-circle caches for the energy term
    struct InnerCache {
        std::vector<double> xs, ys;
    };
    std::array<InnerCache, 6> inner_cache_;
    std::vector<NetWorkspace> ws_pool_;
    std::vector<std::vector<double>> grad_pool_;
};

// Training-log CSV schema (shared by the trainer and the CLI).
std::string loss_csv_header();
std::string loss_csv_row(int epoch, const LossState& s, double h_star, double wall_ms);

}  // namespace pinnhs
