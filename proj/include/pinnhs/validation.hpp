#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pinnhs/oracle.hpp"
#include "pinnhs/training.hpp"

namespace pinnhs {

// --- intro study: 1-D transient heat equation ---------------------------------
//
// u_t = u_xx + f on (0,1)², f = e^{-t}(1+pi²) sin(pi x), u(x,0) = sin(pi x),
// u(0,t) = u(1,t) = 0; exact solution e^{-t} sin(pi x).

struct Intro1dSpec {
    int n_interior = 2500;  // 50x50 LHS
    int n_initial = 50;
    int n_boundary = 50;  // per side
    std::vector<int> widths = {2, 20, 20, 20, 1};
    int max_epochs = 12000;
    double lr = 2e-3;
    double lr_final = 1e-4;
    double boundary_weight = 20.0;  // initial/boundary terms pin the absolute level
    double epsilon_stop = 1e-10;
    std::uint64_t seed = 1;
};

struct Intro1dResult {
    double mse = 0;           // vs the exact solution on a 101x101 grid
    double initial_slice_mse = 0;
    int epochs_run = 0;
    double final_loss = 0;
    bool diverged = false;
};

double intro1d_exact(double x, double t);
// MSE of an arbitrary field against the exact solution on a 101x101 grid
// (oracle-injectable: feeding the exact solution returns 0).
double intro1d_grid_mse(const std::function<double(double, double)>& field);

Intro1dResult run_intro1d(const Intro1dSpec& spec);

// --- Part-A study: toy plate h recovery ----------------------------------------

struct ToyTrainSpec {
    ToyPlateProblem problem;
    int n_interior = 400;
    int n_boundary = 50;  // per side
    std::vector<int> widths = {2, 16, 16, 1};
    int max_epochs = 8000;
    double lr = 2e-3;
    double lr_final = 1e-4;
    double lr_h = 0.05;
    double epsilon_stop = 1e-12;
    std::uint64_t seed = 1;
    bool uniqueness_terms = true;  // energy balance + simulated T(W) reading
    // per-term weights (PDE, BC, -, -, Robin, energy, data slots)
    std::array<double, 7> lambdas = {1, 10, 1, 1, 10, 50, 200};
};

struct ToyTrainResult {
    double h_recovered = 0;
    double field_rmse_c = 0;  // vs the closed-form profile, 101x101 grid
    int epochs_run = 0;
    double final_loss = 0;
    bool diverged = false;
};

ToyTrainResult train_toy(const ToyTrainSpec& spec);

struct ToySweepRow {
    double h_true = 0;
    double h_pred = 0;
    double pct_error = 0;
    bool diverged = false;
};

struct ToySweepResult {
    std::vector<ToySweepRow> rows;
    double r_squared_loglog = 0;
    // Ablation: same problem without the uniqueness terms; h is then
    // unidentifiable and the recovery degrades.
    std::vector<double> ablation_h;
    bool ablation_degraded = false;
};

struct ToySweepSpec {
    std::vector<double> h_list = {10, 100, 1000, 10000};
    ToyTrainSpec train;  // per-entry settings (h_true replaced per row)
    bool run_ablation = true;
    double ablation_h_true = 1000.0;
    int ablation_seeds = 2;
};

ToySweepResult run_toy_h_sweep(const ToySweepSpec& spec);

// R² of the least-squares line through (log h_true, log h_pred).
double log_log_r_squared(const std::vector<ToySweepRow>& rows);

// --- convergence probe -----------------------------------------------------------

struct ConvergenceRow {
    double epsilon = 0;
    bool achieved = false;
    int epoch = -1;
    double field_l2_error_c = 0;  // RMSE in °C when the threshold was reached
};

struct ConvergenceSpec {
    std::vector<double> epsilons = {1e-2, 1e-3, 1e-4, 1e-5};
    ToyTrainSpec train;  // trained once; thresholds checkpointed on the way down

    ConvergenceSpec() {
        train.problem.h_true = 100.0;
        train.max_epochs = 30000;
        train.lr_final = 1e-5;
        train.lambdas = {1, 10, 1, 1, 10, 10, 20};  // gentler weights keep the
                                                    // total comparable to the
                                                    // epsilon ladder
    }
};

std::vector<ConvergenceRow> run_convergence_probe(const ConvergenceSpec& spec);

// CSV/JSON emission for the three studies.
void write_intro1d_csv(const Intro1dResult& r, const std::string& path);
void write_sweep_csv(const ToySweepResult& r, const std::string& path);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);

}  // namespace pinnhs
