#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hydrostore/grid.hpp"
#include "hydrostore/state.hpp"
#include "hydrostore/stepper.hpp"

namespace hydrostore {

/// Scalar monitors of one State. Optional entries are unavailable rather than NaN:
/// phi1, phi2 and the dissipation residual need gamma > 0, log_theta_l1 needs
/// min theta > 0.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;          ///< int u
    double energy = 0.0;        ///< int e
    double J = 0.0;             ///< int hatbeta(chi)
    std::optional<double> phi1;
    std::optional<double> phi2_increment;  ///< dt int (1 + chi) u^2 over the last step
    std::optional<double> phi2;            ///< running sum of phi2_increment
    double min_chi = 0.0;
    double max_chi = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double min_theta = 0.0;
    double max_theta = 0.0;
    double u_entropy = 0.0;     ///< int (u - log u)
    std::optional<double> log_theta_l1;
    double energy_residual = 0.0;  ///< int e - int e_prev - dt int (-h(theta) chi_dot + mu chi_dot^2)
    std::optional<double> dissipation_residual;  ///< phi1 - phi1_prev + dt <u, p>
    int outer_iterations = 0;
};

/// Computes every record field for `state`; identity residuals compare against `prev`
/// and are 0 when there is no previous state.
DiagnosticsRecord record(const State& state, const State* prev, const ModelParams& params,
                         double tol = 1e-12);

/// Stateful wrapper that accumulates phi2 and reuses the previous phi1.
class Monitor {
public:
    explicit Monitor(ModelParams params, double tol = 1e-12);

    const DiagnosticsRecord& start(const State& initial);
    const DiagnosticsRecord& observe(const State& previous, const State& next, const StepReport& report);
    const std::vector<DiagnosticsRecord>& records() const noexcept { return records_; }

private:
    ModelParams params_;
    double tol_;
    std::vector<DiagnosticsRecord> records_;
};

/// The two expressions of Phi_1 = (1/2) <u, zeta> = (1/2)(||grad zeta||^2 + gamma int_Gamma zeta^2).
struct Phi1Split {
    double pairing = 0.0;   ///< (1/2) <u, zeta>
    double gradient = 0.0;  ///< (1/2) ||grad zeta||^2
    double boundary = 0.0;  ///< (gamma/2) int_Gamma zeta^2
};
Phi1Split phi1_components(const DiscreteOperator& a_gamma, const Field& u, double tol = 1e-12);

struct DecayFit {
    double alpha = 0.0;  ///< minus the slope of log phi1 against t
    double r2 = 0.0;
    double log_intercept = 0.0;
};

/// Least-squares fit of log phi1 = c - alpha t. Needs >= 10 samples, all phi1 > 0.
DecayFit fit_decay_rate(std::span<const std::pair<double, double>> series);

enum class SteadyBranch { ChiOne, ChiFree, ChiZero };

const char* to_string(SteadyBranch branch);

/// Sign of h(theta) - log p, with |.| <= deadband mapped to ChiFree.
SteadyBranch classify_steady(double theta, double p, const HSpec& spec, double deadband = 1e-9);

/// Constant equilibrium with the given theta and p on the branch picked by
/// classify_steady; chi_free is the phase fraction used on the free branch.
State construct_steady_state(GridPtr grid, double theta, double p, const HSpec& spec,
                             double chi_free = 0.5, double deadband = 1e-9);

/// ||A theta|| + ||A_gamma p|| + ||A chi + omega - h(theta) + log p|| + ||beta residual||,
/// in the weighted L2 norm of nodal strong-form residuals, omega = xi - log(1 + chi).
double steady_residual(const State& state, const ModelParams& params);

}  // namespace hydrostore
