#include "pinnhs/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace pinnhs {

const char* schedule_name(Schedule s) {
    return s == Schedule::kJoint ? "joint" : "sequential";
}

void TrainConfig::validate() const {
    if (max_epochs < 0) throw ConfigError("max_epochs must be non-negative");
    if (lr_params < 0 || lr_h < 0 || lr_final < 0) {
        throw ConfigError("learning rates must not be negative");
    }
    if (lr_lambda < 0) throw ConfigError("lr_lambda must be non-negative");
    if (epsilon_stop <= 0) throw ConfigError("epsilon_stop must be positive");
    if (sweeps < 1) throw ConfigError("sweeps must be at least 1");
    if (epochs_per_layer < 1) throw ConfigError("epochs_per_layer must be at least 1");
    if (joint_finetune_frac < 0 || joint_finetune_frac > 1) {
        throw ConfigError("joint_finetune_frac must lie in [0, 1]");
    }
    if (lambda_min <= 0 || lambda_max < lambda_min) {
        throw ConfigError("lambda clip bounds must satisfy 0 < min <= max");
    }
    for (double l : lambda_init) {
        if (l <= 0) throw ConfigError("lambda_init entries must be positive");
    }
    if (threads < 1) throw ConfigError("threads must be at least 1");
}

std::uint32_t mask_all(const Objective& obj) {
    std::uint32_t m = 0;
    for (std::size_t g = 0; g < obj.groups().size(); ++g) m |= (1u << g);
    return m;
}

std::uint32_t mask_for(const Objective& obj, ActiveTarget t) {
    // Group layout convention: subnets first, the h group (when present) last.
    const auto& groups = obj.groups();
    const bool has_h = obj.h_param_index() != SIZE_MAX;
    const std::size_t n_subnets = groups.size() - (has_h ? 1 : 0);
    if (t == ActiveTarget::kH) {
        if (!has_h) throw ConfigError("objective has no trainable h*");
        return 1u << n_subnets;
    }
    const auto idx = static_cast<std::size_t>(t);
    if (idx >= n_subnets) throw ConfigError("active target outside this objective's groups");
    std::uint32_t m = 1u << idx;
    if (t == ActiveTarget::kPipes && has_h) m |= 1u << n_subnets;
    return m;
}

OptimizerState make_optimizer(Objective& obj, const TrainConfig& cfg) {
    cfg.validate();
    OptimizerState st;
    const std::size_t n = obj.params().size();
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
    st.grad.assign(n, 0.0);
    st.lambdas = cfg.lambda_init;
    return st;
}

void save_optimizer(const OptimizerState& st, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["m"] = st.m;
    j["v"] = st.v;
    j["step"] = st.step;
    j["lambdas"] = st.lambdas;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write optimizer checkpoint: " + path);
    out << j.dump(1, '\t') << "\n";
}

OptimizerState load_optimizer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read optimizer checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1) {
        throw SchemaError("unsupported optimizer checkpoint schema in " + path);
    }
    OptimizerState st;
    st.m = j.at("m").get<std::vector<double>>();
    st.v = j.at("v").get<std::vector<double>>();
    st.step = j.at("step").get<long>();
    const auto lam = j.at("lambdas").get<std::vector<double>>();
    if (lam.size() != 7 || st.m.size() != st.v.size()) {
        throw SchemaError("malformed optimizer checkpoint: " + path);
    }
    std::copy(lam.begin(), lam.end(), st.lambdas.begin());
    st.grad.assign(st.m.size(), 0.0);
    return st;
}

namespace {

void check_finite(const LossState& s) {
    const auto t = s.terms.as_array();
    for (int i = 0; i < 7; ++i) {
        if (!std::isfinite(t[static_cast<std::size_t>(i)])) {
            throw DivergenceError(std::string("loss term ") + LossTerms::names()[static_cast<std::size_t>(i)] +
                                  " is not finite");
        }
    }
}

LossState do_step(Objective& obj, const TrainConfig& cfg, OptimizerState& st,
                  std::uint32_t active_mask) {
    auto& params = obj.params();
    if (st.m.size() != params.size()) throw ConfigError("optimizer state does not match objective");
    const LossState state = obj.eval(st.lambdas, st.grad, active_mask);
    check_finite(state);

    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    double decay = 1.0;
    if (cfg.lr_final > 0.0 && cfg.lr_final < cfg.lr_params && cfg.max_epochs > 0) {
        const double frac = std::min(1.0, static_cast<double>(st.step) / cfg.max_epochs);
        decay = std::pow(cfg.lr_final / cfg.lr_params, frac);
    }
    const std::size_t h_idx = obj.h_param_index();
    const auto& groups = obj.groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if ((active_mask & (1u << g)) == 0) continue;
        const std::size_t lo = groups[g].offset;
        const std::size_t hi = lo + groups[g].size;
        for (std::size_t i = lo; i < hi; ++i) {
            const double gr = st.grad[i];
            if (!std::isfinite(gr)) {
                throw DivergenceError("non-finite gradient in group " + groups[g].name);
            }
            st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * gr;
            st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * gr * gr;
            const double mhat = st.m[i] / bc1;
            const double vhat = st.v[i] / bc2;
            // the scalar log h* keeps its full rate: it rides the slow
            // manifold of (field, h) pairs and must not stall with the decay
            const double lr = (i == h_idx) ? cfg.lr_h : decay * cfg.lr_params;
            params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }

    if (cfg.lr_lambda > 0) {
        const auto t = state.terms.as_array();
        for (int s = 0; s < 7; ++s) {
            double& l = st.lambdas[static_cast<std::size_t>(s)];
            l = std::clamp(l + cfg.lr_lambda * t[static_cast<std::size_t>(s)], cfg.lambda_min,
                           cfg.lambda_max);
        }
    }
    return state;
}

// Sequential steps restrict gradient flow to the active subnet; the loss
// evaluation itself skips nothing so the recorded history stays comparable
// across schedules.
std::uint32_t objective_mask(Objective& obj, const TrainConfig& cfg, int epoch,
                             bool& joint_phase) {
    if (cfg.schedule == Schedule::kJoint) {
        joint_phase = true;
        return mask_all(obj);
    }
    const int per_sweep = 6 * cfg.epochs_per_layer;
    const int seq_total = cfg.sweeps * per_sweep;
    if (epoch >= seq_total) {
        joint_phase = true;
        return mask_all(obj);
    }
    joint_phase = false;
    const int within = epoch % per_sweep;
    const int slot = within / cfg.epochs_per_layer;  // 0..5: layer0..layer4, pipes
    return mask_for(obj, static_cast<ActiveTarget>(slot));
}

}  // namespace

LossState step_joint(Objective& obj, const TrainConfig& cfg, OptimizerState& st) {
    return do_step(obj, cfg, st, mask_all(obj));
}

LossState step_sequential(Objective& obj, const TrainConfig& cfg, OptimizerState& st,
                          ActiveTarget active) {
    return do_step(obj, cfg, st, mask_for(obj, active));
}

TrainResult train(Objective& obj, const TrainConfig& cfg) {
    cfg.validate();
    OptimizerState st = make_optimizer(obj, cfg);
    TrainResult result;
    auto& history = result.history;
    if (cfg.max_epochs == 0) return result;
    history.reserve(static_cast<std::size_t>(cfg.max_epochs));

    int budget = cfg.max_epochs;
    if (cfg.schedule == Schedule::kSequential) {
        const int seq_total = cfg.sweeps * 6 * cfg.epochs_per_layer;
        const int joint_tail = static_cast<int>(std::lround(cfg.joint_finetune_frac * cfg.max_epochs));
        budget = std::min(cfg.max_epochs, seq_total + joint_tail);
    }

    const std::size_t h_idx = obj.h_param_index();
    using clock = std::chrono::steady_clock;
    for (int epoch = 0; epoch < budget; ++epoch) {
        const auto t0 = clock::now();
        bool joint_phase = false;
        const std::uint32_t mask = objective_mask(obj, cfg, epoch, joint_phase);
        LossState state;
        try {
            state = do_step(obj, cfg, st, mask);
        } catch (const DivergenceError& e) {
            result.diverged = true;
            result.divergence_message = e.what();
            return result;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = state;
        rec.h_star = h_idx == SIZE_MAX ? 0.0 : std::exp(obj.params()[h_idx]);
        rec.interface_gap = obj.interface_gap();
        rec.wall_ms = cfg.deterministic
                          ? 0.0
                          : std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        history.push_back(rec);
        if (cfg.checkpoint_every > 0 && !cfg.checkpoint_prefix.empty() &&
            (epoch + 1) % cfg.checkpoint_every == 0) {
            save_optimizer(st, cfg.checkpoint_prefix + "_optimizer.json");
        }
        if (state.total <= cfg.epsilon_stop) break;
    }
    return result;
}

RigObjective::RigObjective(const RigGeometry& geom, const NondimScales& scales,
                           const CaseConfig& c, const CollocationSet& colloc, bool with_probes,
                           NetworkEnsemble ensemble)
    : ensemble_(std::move(ensemble)), loss_(geom, scales, c, colloc, with_probes) {
    const std::size_t pn = ensemble_.per_net();
    for (int s = 0; s < kNumSubnets; ++s) {
        groups_.push_back({subdomain_name(static_cast<Subdomain>(s)),
                           static_cast<std::size_t>(s) * pn, pn});
    }
    groups_.push_back({"h", ensemble_.h_index(), 1});
}

LossState RigObjective::eval(const std::array<double, 7>& lambdas, std::span<double> grad,
                             std::uint32_t active_mask) {
    return loss_.eval(ensemble_, lambdas, grad, active_mask);
}

}  // namespace pinnhs
