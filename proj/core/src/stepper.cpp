#include "hydrostore/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

Vector project_box(const Vector& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

// Nodal residual G of the phase equation divided by the quadrature weights; the
// multiplier is omega = -G.
struct PhaseResidual {
    const SparseMatrix& a;
    const Vector& w;
    const Vector& chi_prev;
    const Vector& forcing;  // h(theta) - log u
    double rate;            // mu / dt
    double visc;            // nu / dt

    Vector operator()(const Vector& chi) const {
        const Vector diff = chi - chi_prev;
        Vector g = (visc * (a * diff) + a * chi).cwiseQuotient(w);
        for (Index k = 0; k < g.size(); ++k) g[k] += rate * diff[k] + std::log1p(chi[k]) - forcing[k];
        return g;
    }
};

}  // namespace

void validate(const StepperConfig& cfg) {
    if (!(cfg.dt_min > 0.0)) throw ValidationError("stepper.dt_min > 0 violated");
    if (!(cfg.dt >= cfg.dt_min)) throw ValidationError("stepper.dt >= stepper.dt_min violated");
    if (!(cfg.tol_couple > 0.0) || !(cfg.tol_newton > 0.0) || !(cfg.tol_linear > 0.0))
        throw ValidationError("stepper tolerances must be > 0");
    if (cfg.max_outer < 1 || cfg.max_newton < 1)
        throw ValidationError("stepper iteration budgets must be >= 1");
    if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0))
        throw ValidationError("stepper.relaxation must lie in (0, 1]");
}

PressureUpdate update_pressure(const DiscreteOperator& a_gamma, const Field& u_prev, const Field& chi,
                               double dt, double tol) {
    if (!(dt > 0.0)) throw DomainError("update_pressure: dt must be > 0");
    if (!(u_prev.min() > 0.0)) throw PositivityError("update_pressure: u_prev must be > 0");
    const Vector& w = a_gamma.grid().weights();
    const Vector one_plus_chi = chi.values.array() + 1.0;
    const Vector shift = w.cwiseQuotient(one_plus_chi) / dt;
    const Vector rhs = w.cwiseProduct(u_prev.values) / dt;

    Vector p = solve_shifted(a_gamma, shift, rhs, tol);
    Vector u = p.cwiseQuotient(one_plus_chi);
    if (!(u.minCoeff() > 0.0))
        throw PositivityError("update_pressure: u lost strict positivity (min " +
                              std::to_string(u.minCoeff()) + ")");
    return {Field(chi.grid, std::move(u)), Field(chi.grid, std::move(p))};
}

PhaseUpdate update_phase(const DiscreteOperator& a, const Field& chi_prev, const Field& theta,
                         const Field& u, double dt, const ModelParams& params,
                         const StepperConfig& cfg, const Field* chi_start) {
    if (!(dt > 0.0)) throw DomainError("update_phase: dt must be > 0");
    if (!(u.min() > 0.0)) throw PositivityError("update_phase: log u needs u > 0");
    const Index m = chi_prev.size();
    const Vector& w = a.grid().weights();
    const SparseMatrix& lap = a.laplacian();

    Vector forcing(m);
    for (Index k = 0; k < m; ++k) forcing[k] = h_eval(theta[k], 0, params.h) - std::log(u[k]);

    const double rate = params.mu / dt;
    const double visc = params.nu / dt;
    const PhaseResidual residual{lap, w, chi_prev.values, forcing, rate, visc};
    // Scale of the complementarity function: Phi is measured in units of chi.
    const double c = 1.0 / (rate + 1.0);

    auto merit = [&](const Vector& chi, const Vector& g) {
        return inf_norm(chi - project_box(chi - c * g));
    };
    // Increment of the convex step energy
    //   E(chi) = sum w [rate/2 (chi - chi_prev)^2 + hatbeta(chi) - f chi]
    //            + visc/2 |chi - chi_prev|_A^2 + 1/2 |chi|_A^2,
    // written in terms of the update d to limit cancellation.
    auto energy_change = [&](const Vector& chi, const Vector& d) {
        const Vector diff = chi - chi_prev.values;
        const Vector two_y = 2.0 * (visc * diff + chi) + (visc + 1.0) * d;
        double acc = 0.5 * d.dot(lap * two_y);
        for (Index k = 0; k < m; ++k) {
            const double x0 = chi[k], x1 = chi[k] + d[k];
            const double beta = (1.0 + x1) * std::log1p(x1) - (1.0 + x0) * std::log1p(x0) - d[k];
            acc += w[k] * (0.5 * rate * d[k] * (2.0 * diff[k] + d[k]) + beta - forcing[k] * d[k]);
        }
        return acc;
    };

    Vector chi = project_box(chi_start ? chi_start->values : chi_prev.values);
    Vector g = residual(chi);
    double phi = merit(chi, g);

    // Projected Newton: nodes sitting on a bound with the gradient pushing outward
    // take a scaled gradient step, the rest a Newton step on the reduced Hessian;
    // the projected arc is searched with an Armijo test on E.
    int it = 0;
    std::vector<char> binding(static_cast<std::size_t>(m));
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(lap.nonZeros()));
    while (phi > cfg.tol_newton) {
        if (it >= cfg.max_newton)
            throw ConvergenceError("update_phase: projected Newton did not converge (residual " +
                                   std::to_string(phi) + ")");
        ++it;

        const double eps = std::min(1e-3, phi);
        for (Index k = 0; k < m; ++k)
            binding[k] = (chi[k] <= eps && g[k] > 0.0) || (chi[k] >= 1.0 - eps && g[k] < 0.0);

        Vector rhs(m);
        triplets.clear();
        for (Index k = 0; k < m; ++k) {
            if (binding[k]) {
                triplets.emplace_back(k, k, 1.0);
                rhs[k] = -c * g[k];
            } else {
                triplets.emplace_back(k, k, w[k] * (rate + 1.0 / (1.0 + chi[k])));
                rhs[k] = -w[k] * g[k];
            }
        }
        for (Index col = 0; col < lap.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator nz(lap, col); nz; ++nz) {
                if (binding[nz.row()] || binding[col]) continue;
                triplets.emplace_back(nz.row(), col, (visc + 1.0) * nz.value());
            }
        }
        SparseMatrix hess(m, m);
        hess.setFromTriplets(triplets.begin(), triplets.end());
        const Vector dir = solve_symmetric(hess, rhs, cfg.tol_linear);

        Vector best;
        Vector best_g;
        double best_phi = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (double s = 1.0; s > 1e-12; s *= 0.5) {
            Vector cand = project_box(chi + s * dir);
            const Vector d = cand - chi;
            double predicted = 0.0;
            for (Index k = 0; k < m; ++k) predicted += w[k] * g[k] * d[k];
            Vector cand_g = residual(cand);
            const double cand_phi = merit(cand, cand_g);
            const bool armijo = energy_change(chi, d) <= 1e-4 * predicted;
            const bool merit_drop = s == 1.0 && cand_phi <= (1.0 - 1e-4) * phi;
            if (cand_phi < best_phi) {
                best = cand;
                best_g = cand_g;
                best_phi = cand_phi;
            }
            if (armijo || merit_drop) {
                best = std::move(cand);
                best_g = std::move(cand_g);
                best_phi = cand_phi;
                accepted = true;
                break;
            }
        }
        if (!accepted && !(best_phi < phi))
            throw ConvergenceError("update_phase: line search stalled (residual " + std::to_string(phi) + ")");
        chi = std::move(best);
        g = std::move(best_g);
        phi = best_phi;
    }

    Vector xi(m);
    for (Index k = 0; k < m; ++k) xi[k] = -g[k] + std::log1p(chi[k]);
    return {Field(chi_prev.grid, std::move(chi)), Field(chi_prev.grid, std::move(xi)), {it, phi}};
}

EnergyUpdate update_energy(const DiscreteOperator& a, const Field& e_prev, const Field& chi_prev,
                           const Field& chi, const Field& theta_guess, double dt,
                           const ModelParams& params, const StepperConfig& cfg) {
    if (!(dt > 0.0)) throw DomainError("update_energy: dt must be > 0");
    if (chi.min() < 0.0 || chi.max() > 1.0 || chi_prev.min() < 0.0 || chi_prev.max() > 1.0)
        throw DomainError("update_energy: chi must lie in [0,1]");
    const Index m = chi.size();
    const Vector& w = a.grid().weights();
    const SparseMatrix& lap = a.laplacian();
    const HSpec& hs = params.h;

    const Vector rate = (chi.values - chi_prev.values) / dt;
    Vector source(m);
    for (Index k = 0; k < m; ++k) source[k] = params.mu * rate[k] * rate[k];

    // Scaled residual dt R / w, in units of e.
    auto residual = [&](const Vector& theta) {
        Vector r = dt * (lap * theta).cwiseQuotient(w);
        for (Index k = 0; k < m; ++k)
            r[k] += psi(theta[k], chi[k], hs) - e_prev[k] +
                    dt * (h_eval(theta[k], 0, hs) * rate[k] - source[k]);
        return r;
    };

    const double tol = cfg.tol_newton * (1.0 + inf_norm(e_prev.values));
    Vector theta = theta_guess.values;
    Vector r = residual(theta);
    double norm = inf_norm(r);
    int it = 0;
    while (norm > tol) {
        if (it >= cfg.max_newton)
            throw ConvergenceError("update_energy: Newton did not converge (residual " +
                                   std::to_string(norm) + ")");
        ++it;
        SparseMatrix jac = lap;
        for (Index k = 0; k < m; ++k)
            jac.coeffRef(k, k) +=
                w[k] * (psi_dtheta(theta[k], chi[k], hs) / dt + h_eval(theta[k], 1, hs) * rate[k]);
        const Vector rhs = -(r.cwiseProduct(w) / dt);
        const Vector step = solve_symmetric(jac, rhs, cfg.tol_linear);

        double s = 1.0;
        Vector best = theta + step;
        Vector best_r = residual(best);
        double best_norm = inf_norm(best_r);
        while (!(best_norm < (1.0 - 1e-4 * s) * norm) && s > 1e-6) {
            s *= 0.5;
            Vector cand = theta + s * step;
            Vector cand_r = residual(cand);
            const double cand_norm = inf_norm(cand_r);
            if (cand_norm < best_norm || !std::isfinite(best_norm)) {
                best = std::move(cand);
                best_r = std::move(cand_r);
                best_norm = cand_norm;
            }
        }
        if (!std::isfinite(best_norm)) throw ConvergenceError("update_energy: non-finite iterate");
        theta = std::move(best);
        r = std::move(best_r);
        norm = best_norm;
    }

    Vector e(m);
    for (Index k = 0; k < m; ++k) e[k] = psi(theta[k], chi[k], hs);
    return {Field(chi.grid, std::move(e)), Field(chi.grid, std::move(theta)), {it, norm}};
}

Stepper::Stepper(GridPtr grid, ModelParams params, StepperConfig cfg)
    : grid_(grid),
      params_(params),
      cfg_(cfg),
      a_(assemble_operator(grid, 0.0)),
      a_gamma_(assemble_operator(grid, params.gamma)) {
    validate(params_);
    validate(cfg_);
}

StepResult Stepper::attempt(const State& s, double dt) const {
    StepReport report;
    report.dt = dt;

    Field chi_it = s.chi;
    Field theta_it = s.theta;
    Field u_it = s.u;
    const double r = cfg_.relaxation;

    for (int outer = 1; outer <= cfg_.max_outer; ++outer) {
        PressureUpdate pr = update_pressure(a_gamma_, s.u, chi_it, dt, cfg_.tol_linear);
        PhaseUpdate ph = update_phase(a_, s.chi, theta_it, pr.u, dt, params_, cfg_, &chi_it);
        EnergyUpdate en = update_energy(a_, s.e, s.chi, ph.chi, theta_it, dt, params_, cfg_);

        const double du = inf_norm(pr.u.values - u_it.values) / std::max(1.0, inf_norm(pr.u.values));
        const double dchi = inf_norm(ph.chi.values - chi_it.values);
        const double dtheta =
            inf_norm(en.theta.values - theta_it.values) / std::max(1.0, inf_norm(en.theta.values));
        const double change = std::max({du, dchi, dtheta});

        report.outer_iterations = outer;
        report.phase_newton_iterations += ph.newton.iterations;
        report.energy_newton_iterations += en.newton.iterations;
        report.coupling_change = change;
        report.phase_residual = ph.newton.residual;
        report.energy_residual = en.newton.residual;

        if (change <= cfg_.tol_couple) {
            State next;
            next.t = s.t + dt;
            next.chi = std::move(ph.chi);
            next.xi = std::move(ph.xi);
            next.e = std::move(en.e);
            next.theta = std::move(en.theta);
            next.u = std::move(pr.u);
            next.p = Field(next.u.grid, next.u.values.cwiseProduct((next.chi.values.array() + 1.0).matrix()));
            report.near_positivity_floor = next.u.min() < 1e-12 * next.u.max();
            return {std::move(next), report};
        }

        if (r == 1.0) {
            chi_it = std::move(ph.chi);
            theta_it = std::move(en.theta);
            u_it = std::move(pr.u);
        } else {
            chi_it.values += r * (ph.chi.values - chi_it.values);
            theta_it.values += r * (en.theta.values - theta_it.values);
            u_it.values += r * (pr.u.values - u_it.values);
        }
    }
    throw ConvergenceError("outer coupling did not converge (change " +
                           std::to_string(report.coupling_change) + ")");
}

StepResult Stepper::step(const State& state, long step_index) const {
    return step(state, cfg_.dt, step_index);
}

StepResult Stepper::step(const State& state, double dt, long step_index) const {
    int halvings = 0;
    std::string last_error;
    while (dt >= cfg_.dt_min) {
        try {
            StepResult res = attempt(state, dt);
            res.report.halvings = halvings;
            res.report.dt_reduced = halvings > 0;
            return res;
        } catch (const ConvergenceError& err) {
            last_error = err.what();
            dt *= 0.5;
            ++halvings;
        }
    }
    throw StepFailure("time step fell below dt_min after " + std::to_string(halvings) +
                          " halvings; last failure: " + last_error,
                      step_index);
}

StepResult step(const State& state, const StepperConfig& cfg, const ModelParams& params) {
    return Stepper(state.grid(), params, cfg).step(state);
}

Trajectory run(const State& initial, double t_end, const StepperConfig& cfg,
               const ModelParams& params, const RunOptions& options) {
    if (!(t_end >= initial.t)) throw DomainError("run: t_end precedes the initial time");
    if (options.output_every < 1) throw ValidationError("run: output_every must be >= 1");

    Trajectory traj;
    traj.outputs.push_back(initial);
    traj.final_state = initial;
    if (t_end == initial.t) return traj;

    const Stepper stepper(initial.grid(), params, cfg);
    const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));
    double dt = cfg.dt;
    State current = initial;
    long k = 0;
    while (t_end - current.t > t_eps) {
        const double remaining = t_end - current.t;
        const bool last = remaining <= dt * (1.0 + 1e-9);
        const double h = last ? remaining : dt;

        StepResult res = stepper.step(current, h, k);
        if (res.report.dt_reduced) dt = std::min(dt, res.report.dt);
        if (last && !res.report.dt_reduced) res.state.t = t_end;

        if (options.on_step) options.on_step(current, res.state, res.report);
        traj.reports.push_back(res.report);
        current = std::move(res.state);
        ++k;
        if (k % options.output_every == 0) traj.outputs.push_back(current);
    }
    if (k % options.output_every != 0) traj.outputs.push_back(current);
    traj.steps = k;
    traj.final_state = std::move(current);
    return traj;
}

}  // namespace hydrostore
