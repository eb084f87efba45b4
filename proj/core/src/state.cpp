#include "hydrostore/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hydrostore/errors.hpp"

namespace hydrostore {

void validate(const ModelParams& params) {
    if (!(params.mu > 0.0) || !std::isfinite(params.mu)) throw ValidationError("mu > 0 violated");
    if (!(params.nu >= 0.0) || !std::isfinite(params.nu)) throw ValidationError("nu >= 0 violated");
    if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma))
        throw ValidationError("gamma >= 0 violated");
    try {
        validate(params.h);
    } catch (const DomainError& err) {
        throw ValidationError(err.what());
    }
}

bool StateCheck::passed(double tol) const { return failures(tol).empty(); }

std::vector<std::string> StateCheck::failures(double tol) const {
    std::vector<std::string> out;
    auto fmt = [](const char* label, double v) {
        std::ostringstream os;
        os.precision(6);
        os << label << " (" << v << ")";
        return os.str();
    };
    if (!consistent_grids) out.emplace_back("fields live on different grids");
    if (!finite) out.emplace_back("non-finite field values");
    if (psi_mismatch > tol) out.push_back(fmt("e != psi(theta, chi)", psi_mismatch));
    if (pressure_mismatch > tol) out.push_back(fmt("p != u (1 + chi)", pressure_mismatch));
    if (chi_below > tol) out.push_back(fmt("chi < 0", chi_below));
    if (chi_above > tol) out.push_back(fmt("chi > 1", chi_above));
    if (!(min_u > 0.0)) out.push_back(fmt("u not strictly positive", min_u));
    if (beta_violation > tol) out.push_back(fmt("xi not in beta(chi)", beta_violation));
    return out;
}

StateCheck check_state(const State& s, const HSpec& spec) {
    StateCheck c;
    const Field* fields[] = {&s.e, &s.theta, &s.chi, &s.xi, &s.u, &s.p};
    for (const Field* f : fields) {
        if (!f->grid || !s.chi.grid || !f->grid->same_layout(*s.chi.grid) ||
            f->size() != s.chi.grid->node_count()) {
            c.consistent_grids = false;
            return c;
        }
        if (!f->all_finite()) c.finite = false;
    }
    if (!c.finite) return c;

    c.min_u = s.u.min();
    for (Index k = 0; k < s.chi.size(); ++k) {
        const double chi = s.chi[k];
        c.chi_below = std::max(c.chi_below, -chi);
        c.chi_above = std::max(c.chi_above, chi - 1.0);
        const double chi_c = std::clamp(chi, 0.0, 1.0);
        c.psi_mismatch = std::max(
            c.psi_mismatch, std::abs(s.e[k] - psi(s.theta[k], chi_c, spec)) / (1.0 + std::abs(s.e[k])));
        c.pressure_mismatch = std::max(c.pressure_mismatch, std::abs(s.p[k] - s.u[k] * (1.0 + chi)) /
                                                                (1.0 + std::abs(s.p[k])));
        c.beta_violation = std::max(c.beta_violation, beta_residual(chi, s.xi[k]));
    }
    return c;
}

void validate_state(const State& state, const HSpec& spec, double tol) {
    const auto failures = check_state(state, spec).failures(tol);
    if (failures.empty()) return;
    std::string msg = "invalid state at t=" + std::to_string(state.t) + ":";
    for (const auto& f : failures) msg += " " + f + ";";
    throw ValidationError(msg);
}

}  // namespace hydrostore
