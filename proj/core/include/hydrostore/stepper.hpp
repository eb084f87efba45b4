#pragma once

#include <functional>
#include <vector>

#include "hydrostore/grid.hpp"
#include "hydrostore/state.hpp"

namespace hydrostore {

struct StepperConfig {
    double dt = 1e-3;
    double dt_min = 1e-8;
    double tol_couple = 1e-10;  ///< max change of (u, chi, theta) across one outer sweep
    double tol_newton = 1e-12;
    double tol_linear = 1e-12;  ///< relative residual of every linear solve
    int max_outer = 50;
    int max_newton = 60;
    double relaxation = 1.0;    ///< under-relaxation of the outer iterates, in (0, 1]
};

void validate(const StepperConfig& cfg);

struct NewtonReport {
    int iterations = 0;
    double residual = 0.0;
};

struct PressureUpdate {
    Field u;
    Field p;
};

/// Implicit Euler step of u_t + A_gamma p = 0 with p = u (1 + chi) and chi frozen.
///
/// Solved in the variable p: (W / (dt (1 + chi)) + A_gamma) p = W u_prev / dt, an
/// M-matrix system, so u > 0 follows from u_prev > 0. Throws PositivityError otherwise.
PressureUpdate update_pressure(const DiscreteOperator& a_gamma, const Field& u_prev, const Field& chi,
                               double dt, double tol = 1e-12);

struct PhaseUpdate {
    Field chi;
    Field xi;
    NewtonReport newton;
};

/// Implicit Euler step of the constrained phase equation
///
///   mu (chi - chi_prev)/dt + (nu/dt) A (chi - chi_prev) + A chi + omega + log(1 + chi)
///     = h(theta) - log u,     omega in the normal cone of [0,1] at chi,
///
/// by a projected Newton method on the convex step energy; convergence is measured by
/// the complementarity residual chi - P_[0,1](chi - c G(chi)).
/// Returns chi in [0,1] and xi = omega + log(1 + chi). Throws ConvergenceError when
/// the Newton budget runs out.
PhaseUpdate update_phase(const DiscreteOperator& a, const Field& chi_prev, const Field& theta,
                         const Field& u, double dt, const ModelParams& params,
                         const StepperConfig& cfg, const Field* chi_start = nullptr);

struct EnergyUpdate {
    Field e;
    Field theta;
    NewtonReport newton;
};

/// Implicit Euler step of e_t + A theta = -h(theta) chi_dot + mu chi_dot^2 with
/// e = psi(theta, chi) and chi_dot = (chi - chi_prev)/dt frozen, by Newton in theta.
EnergyUpdate update_energy(const DiscreteOperator& a, const Field& e_prev, const Field& chi_prev,
                           const Field& chi, const Field& theta_guess, double dt,
                           const ModelParams& params, const StepperConfig& cfg);

struct StepReport {
    double dt = 0.0;
    int outer_iterations = 0;
    int phase_newton_iterations = 0;   ///< summed over the outer sweeps
    int energy_newton_iterations = 0;
    double coupling_change = 0.0;      ///< last outer-sweep change
    double phase_residual = 0.0;
    double energy_residual = 0.0;
    int halvings = 0;
    bool dt_reduced = false;
    bool near_positivity_floor = false;  ///< min u < 1e-12 max u after the step
};

struct StepResult {
    State state;
    StepReport report;
};

/// Gauss-Seidel coupling of the three updates, with step halving on failure.
class Stepper {
public:
    Stepper(GridPtr grid, ModelParams params, StepperConfig cfg);

    /// One step of size cfg.dt (or `dt` when given); halves on Newton or coupling
    /// failure and throws StepFailure once below dt_min.
    StepResult step(const State& state, long step_index = 0) const;
    StepResult step(const State& state, double dt, long step_index) const;

    /// One step of exactly `dt`; throws ConvergenceError instead of halving.
    StepResult attempt(const State& state, double dt) const;

    const ModelParams& params() const noexcept { return params_; }
    const StepperConfig& config() const noexcept { return cfg_; }
    const DiscreteOperator& neumann() const noexcept { return a_; }
    const DiscreteOperator& robin() const noexcept { return a_gamma_; }

private:
    GridPtr grid_;
    ModelParams params_;
    StepperConfig cfg_;
    DiscreteOperator a_;
    DiscreteOperator a_gamma_;
};

StepResult step(const State& state, const StepperConfig& cfg, const ModelParams& params);

using StepHook = std::function<void(const State& previous, const State& next, const StepReport&)>;

struct RunOptions {
    int output_every = 1;  ///< keep every k-th state in the trajectory
    StepHook on_step;
};

struct Trajectory {
    std::vector<State> outputs;  ///< initial state, every output_every-th state, final state
    std::vector<StepReport> reports;
    State final_state;
    long steps = 0;
};

/// Advances `initial` to t_end. dt never grows again once reduced.
Trajectory run(const State& initial, double t_end, const StepperConfig& cfg,
               const ModelParams& params, const RunOptions& options = {});

}  // namespace hydrostore
