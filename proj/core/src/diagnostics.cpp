#include "hydrostore/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

double weighted_norm(const Vector& w, const Vector& r) { return std::sqrt(w.dot(r.cwiseAbs2())); }

DiagnosticsRecord record_impl(const State& s, const State* prev, std::optional<double> prev_phi1,
                              const ModelParams& params, double tol) {
    const Grid& g = *s.grid();
    const Vector& w = g.weights();
    const Index m = g.node_count();

    DiagnosticsRecord rec;
    rec.t = s.t;
    rec.mass = integrate(s.u);
    rec.energy = integrate(s.e);
    rec.min_chi = s.chi.min();
    rec.max_chi = s.chi.max();
    rec.min_u = s.u.min();
    rec.max_u = s.u.max();
    rec.min_theta = s.theta.min();
    rec.max_theta = s.theta.max();

    double j = 0.0;
    double entropy = 0.0;
    for (Index k = 0; k < m; ++k) {
        // chi is kept inside [0,1]; clamp the few-ulp excursions a caller might hand in.
        j += w[k] * hatbeta(std::clamp(s.chi[k], 0.0, 1.0)).value();
        entropy += w[k] * (s.u[k] - std::log(s.u[k]));
    }
    rec.J = j;
    rec.u_entropy = entropy;

    if (rec.min_theta > 0.0) {
        double acc = 0.0;
        for (Index k = 0; k < m; ++k) acc += w[k] * std::abs(std::log(s.theta[k]));
        rec.log_theta_l1 = acc;
    }

    const double dt = prev ? s.t - prev->t : 0.0;
    if (prev) {
        double source = 0.0;
        for (Index k = 0; k < m; ++k) {
            const double rate = (s.chi[k] - prev->chi[k]) / dt;
            source += w[k] * (-h_eval(s.theta[k], 0, params.h) * rate + params.mu * rate * rate);
        }
        rec.energy_residual = rec.energy - integrate(prev->e) - dt * source;
    }

    if (params.gamma > 0.0) {
        const auto a_gamma = assemble_operator(s.grid(), params.gamma);
        const double phi1 = 0.5 * std::pow(dual_norm(a_gamma, s.u, tol).value, 2);
        rec.phi1 = phi1;
        const double up = inner(s.u, s.p);
        rec.phi2_increment = dt * up;
        rec.dissipation_residual = 0.0;
        if (prev) {
            const double before =
                prev_phi1 ? *prev_phi1 : 0.5 * std::pow(dual_norm(a_gamma, prev->u, tol).value, 2);
            rec.dissipation_residual = phi1 - before + dt * up;
        }
    }
    return rec;
}

}  // namespace

DiagnosticsRecord record(const State& state, const State* prev, const ModelParams& params, double tol) {
    return record_impl(state, prev, std::nullopt, params, tol);
}

Monitor::Monitor(ModelParams params, double tol) : params_(params), tol_(tol) {}

const DiagnosticsRecord& Monitor::start(const State& initial) {
    records_.clear();
    DiagnosticsRecord rec = record_impl(initial, nullptr, std::nullopt, params_, tol_);
    if (rec.phi1) rec.phi2 = 0.0;
    records_.push_back(rec);
    return records_.back();
}

const DiagnosticsRecord& Monitor::observe(const State& previous, const State& next,
                                          const StepReport& report) {
    std::optional<double> prev_phi1;
    double prev_phi2 = 0.0;
    if (!records_.empty()) {
        prev_phi1 = records_.back().phi1;
        prev_phi2 = records_.back().phi2.value_or(0.0);
    }
    DiagnosticsRecord rec = record_impl(next, &previous, prev_phi1, params_, tol_);
    rec.outer_iterations = report.outer_iterations;
    if (rec.phi2_increment) rec.phi2 = prev_phi2 + *rec.phi2_increment;
    records_.push_back(rec);
    return records_.back();
}

Phi1Split phi1_components(const DiscreteOperator& a_gamma, const Field& u, double tol) {
    const DualNorm dn = dual_norm(a_gamma, u, tol);
    const Vector& z = dn.zeta.values;
    const Vector& bw = a_gamma.grid().boundary_weights();
    Phi1Split out;
    out.pairing = 0.5 * inner(u, dn.zeta);
    out.gradient = 0.5 * z.dot(a_gamma.laplacian() * z);
    out.boundary = 0.5 * a_gamma.gamma() * bw.dot(z.cwiseAbs2());
    return out;
}

DecayFit fit_decay_rate(std::span<const std::pair<double, double>> series) {
    if (series.size() < 10) throw DomainError("fit_decay_rate: need at least 10 samples");
    const double n = static_cast<double>(series.size());
    double st = 0.0, sy = 0.0;
    for (const auto& [t, phi] : series) {
        if (!(phi > 0.0)) throw DomainError("fit_decay_rate: degenerate series (phi1 <= 0)");
        st += t;
        sy += std::log(phi);
    }
    const double tm = st / n;
    const double ym = sy / n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (const auto& [t, phi] : series) {
        const double dt = t - tm;
        const double dy = std::log(phi) - ym;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if (!(stt > 0.0)) throw DomainError("fit_decay_rate: all samples share one time");
    const double slope = sty / stt;

    DecayFit fit;
    fit.alpha = -slope;
    fit.log_intercept = ym - slope * tm;
    // A constant series is fitted exactly.
    fit.r2 = syy > 0.0 ? std::clamp(slope * sty / syy, 0.0, 1.0) : 1.0;
    return fit;
}

const char* to_string(SteadyBranch branch) {
    switch (branch) {
        case SteadyBranch::ChiOne: return "CHI_ONE";
        case SteadyBranch::ChiFree: return "CHI_FREE";
        case SteadyBranch::ChiZero: return "CHI_ZERO";
    }
    return "UNKNOWN";
}

SteadyBranch classify_steady(double theta, double p, const HSpec& spec, double deadband) {
    if (!(p > 0.0)) throw DomainError("classify_steady: p must be > 0");
    const double drive = h_eval(theta, 0, spec) - std::log(p);
    if (drive > deadband) return SteadyBranch::ChiOne;
    if (drive < -deadband) return SteadyBranch::ChiZero;
    return SteadyBranch::ChiFree;
}

State construct_steady_state(GridPtr grid, double theta, double p, const HSpec& spec, double chi_free,
                             double deadband) {
    if (!(chi_free >= 0.0 && chi_free <= 1.0))
        throw DomainError("construct_steady_state: chi_free must lie in [0,1]");
    const SteadyBranch branch = classify_steady(theta, p, spec, deadband);
    const double drive = h_eval(theta, 0, spec) - std::log(p);
    double chi = chi_free;
    double omega = 0.0;
    if (branch == SteadyBranch::ChiOne) {
        chi = 1.0;
        omega = drive;
    } else if (branch == SteadyBranch::ChiZero) {
        chi = 0.0;
        omega = drive;
    }

    State s;
    s.t = 0.0;
    s.theta = Field::constant(grid, theta);
    s.chi = Field::constant(grid, chi);
    s.xi = Field::constant(grid, omega + std::log1p(chi));
    s.p = Field::constant(grid, p);
    s.u = Field::constant(grid, p / (1.0 + chi));
    s.e = Field::constant(grid, psi(theta, chi, spec));
    return s;
}

double steady_residual(const State& s, const ModelParams& params) {
    const Grid& g = *s.grid();
    const Vector& w = g.weights();
    const Index m = g.node_count();
    const auto a = assemble_operator(s.grid(), 0.0);
    const auto a_gamma = assemble_operator(s.grid(), params.gamma);

    const Vector heat = (a.laplacian() * s.theta.values).cwiseQuotient(w);
    const Vector flow = (a_gamma.matrix() * s.p.values).cwiseQuotient(w);
    Vector phase = (a.laplacian() * s.chi.values).cwiseQuotient(w);
    Vector cone(m);
    for (Index k = 0; k < m; ++k) {
        const double omega = s.xi[k] - std::log1p(std::clamp(s.chi[k], 0.0, 1.0));
        phase[k] += omega - h_eval(s.theta[k], 0, params.h) + std::log(s.p[k]);
        cone[k] = beta_residual(s.chi[k], s.xi[k]);
    }
    return weighted_norm(w, heat) + weighted_norm(w, flow) + weighted_norm(w, phase) +
           weighted_norm(w, cone);
}

}  // namespace hydrostore
