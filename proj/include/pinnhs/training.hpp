#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pinnhs/physics.hpp"

namespace pinnhs {

enum class Schedule { kJoint, kSequential };

const char* schedule_name(Schedule s);

struct TrainConfig {
    int max_epochs = 5000;
    double lr_params = 1e-3;
    double lr_final = 0.0;     // >0: exponential decay toward this rate over max_epochs
    double lr_h = 0.05;        // log h* moves across decades; see README
    double lr_lambda = 0.0;    // 0 keeps the weights fixed
    double epsilon_stop = 1e-9;
    Schedule schedule = Schedule::kJoint;
    int sweeps = 2;
    int epochs_per_layer = 300;
    double joint_finetune_frac = 0.10;  // joint block after the last sweep
    std::uint64_t seed = 0;
    std::array<double, 7> lambda_init = {1, 1, 1, 1, 1, 1, 1};
    double lambda_min = 1e-3;
    double lambda_max = 1e4;
    bool deterministic = true;  // single-threaded reduction, wall clock zeroed
    int threads = 1;
    int checkpoint_every = 0;          // 0 disables periodic checkpoints
    std::string checkpoint_prefix;     // <prefix>_ensemble.json / _optimizer.json
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    LossState loss;
    double h_star = 0;
    std::array<double, 4> interface_gap = {0, 0, 0, 0};
    double wall_ms = 0;
};

struct ParamGroup {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

// A trainable objective: a flat parameter vector partitioned into groups
// (subnets and optionally the scalar log h*), with a seven-slot loss.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::vector<double>& params() = 0;
    virtual const std::vector<ParamGroup>& groups() const = 0;
    // Evaluates every term at the current parameters; accumulates the
    // gradient of total = sum lambda_s L_s for the groups in active_mask.
    virtual LossState eval(const std::array<double, 7>& lambdas, std::span<double> grad,
                           std::uint32_t active_mask) = 0;
    virtual std::array<double, 4> interface_gap() const { return {}; }
    // Index of the log h* entry, or SIZE_MAX when the objective has none.
    virtual std::size_t h_param_index() const { return SIZE_MAX; }
};

// Sequential-training targets. kPipes also unfreezes h*, kH only h*.
enum class ActiveTarget : int {
    kLayer0 = 0,
    kLayer1,
    kLayer2,
    kLayer3,
    kLayer4,
    kPipes,
    kH,
};

std::uint32_t mask_for(const Objective& obj, ActiveTarget t);
std::uint32_t mask_all(const Objective& obj);

// Adam moments plus the self-adaptive weights.
struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
    std::array<double, 7> lambdas = {1, 1, 1, 1, 1, 1, 1};
    std::vector<double> grad;  // scratch
};

OptimizerState make_optimizer(Objective& obj, const TrainConfig& cfg);

// Checkpoint of the optimizer alongside the parameters (moments, step
// counter, self-adaptive weights), versioned JSON.
void save_optimizer(const OptimizerState& st, const std::string& path);
OptimizerState load_optimizer(const std::string& path);

// One Adam step on all groups; the self-adaptive weights then take one
// ascent step lambda += lr_lambda * L_s, clipped to [lambda_min, lambda_max].
// Returns the pre-step LossState.
LossState step_joint(Objective& obj, const TrainConfig& cfg, OptimizerState& st);

// Same, but gradients flow only into the active target (parameters outside it
// are untouched bytes).
LossState step_sequential(Objective& obj, const TrainConfig& cfg, OptimizerState& st,
                          ActiveTarget active);

struct TrainResult {
    std::vector<EpochRecord> history;  // one entry per optimizer step
    bool diverged = false;
    std::string divergence_message;
};

// Runs the configured schedule. Sequential: `sweeps` passes over
// layer0 → ... → layer4 → pipes with epochs_per_layer steps each, then one
// joint fine-tune block of joint_finetune_frac * max_epochs steps. Stops when
// total <= epsilon_stop or after max_epochs optimizer steps. A divergence
// aborts the run and returns the partial history with the flag set.
TrainResult train(Objective& obj, const TrainConfig& cfg);

// --- the full-rig objective ---------------------------------------------------

class RigObjective : public Objective {
public:
    RigObjective(const RigGeometry& geom, const NondimScales& scales, const CaseConfig& c,
                 const CollocationSet& colloc, bool with_probes, NetworkEnsemble ensemble);

    std::vector<double>& params() override { return ensemble_.flat; }
    const std::vector<ParamGroup>& groups() const override { return groups_; }
    LossState eval(const std::array<double, 7>& lambdas, std::span<double> grad,
                   std::uint32_t active_mask) override;
    std::array<double, 4> interface_gap() const override { return loss_.interface_gap(); }
    std::size_t h_param_index() const override { return ensemble_.h_index(); }

    const NetworkEnsemble& ensemble() const { return ensemble_; }
    NetworkEnsemble& ensemble() { return ensemble_; }
    RigLoss& loss() { return loss_; }

private:
    NetworkEnsemble ensemble_;
    RigLoss loss_;
    std::vector<ParamGroup> groups_;
};

}  // namespace pinnhs
