#include "hydrostore/init_reg.hpp"

#include <algorithm>
#include <cmath>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

void require_index(int n) {
    if (n < 1) throw DomainError("smoothing index n must be a positive integer");
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
    if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
        throw ValidationError(std::string("initial data: ") + what + " lives on a different grid");
}

}  // namespace

Field smooth_resolvent(const Field& v0, int n, double tol) {
    require_index(n);
    if (!v0.all_finite()) throw ValidationError("smooth_resolvent: non-finite input");
    const auto a = assemble_operator(v0.grid, 0.0);
    const Vector shift = static_cast<double>(n) * v0.grid->weights();
    return Field(v0.grid, solve_shifted(a, shift, shift.cwiseProduct(v0.values), tol));
}

Field smooth_positive(const Field& u0, int n, double tol) {
    require_index(n);
    if (!u0.all_finite()) throw ValidationError("smooth_positive: non-finite input");
    const auto a = assemble_operator(u0.grid, 0.0);
    const Vector& w = u0.grid->weights();
    const Vector shift = static_cast<double>(n) * w;
    const Vector rhs = shift.cwiseProduct(u0.values) + w;
    return Field(u0.grid, solve_shifted(a, shift, rhs, tol));
}

State build_initial_state(const InitialData& data, int n, const HSpec& spec, bool positive_theta,
                          double tol) {
    require_index(n);
    require_same_grid(data.chi0, data.theta0, "theta0");
    require_same_grid(data.chi0, data.u0, "u0");
    if (data.chi0.min() < 0.0 || data.chi0.max() > 1.0)
        throw ValidationError("initial data: chi0 must lie in [0,1]");
    if (data.u0.min() < 0.0) throw ValidationError("initial data: u0 must be >= 0");
    if (positive_theta && !(data.theta0.min() > 0.0))
        throw ValidationError("initial data: positive-theta pathway needs theta0 > 0");

    State s;
    s.t = 0.0;
    s.chi = smooth_resolvent(data.chi0, n, tol);
    // Round-off may push the resolvent a few ulps past the bounds it provably respects.
    s.chi.values = s.chi.values.cwiseMax(0.0).cwiseMin(1.0);
    s.u = smooth_positive(data.u0, n, tol);

    if (positive_theta) {
        Field eta(data.theta0.grid, data.theta0.values.cwiseSqrt());
        s.theta = smooth_positive(eta, n, tol);
        s.theta.values = s.theta.values.cwiseAbs2();
    } else {
        s.theta = smooth_resolvent(data.theta0, n, tol);
    }

    const GridPtr& g = s.chi.grid;
    const Index m = g->node_count();
    Vector e(m), xi(m), p(m);
    for (Index k = 0; k < m; ++k) {
        e[k] = psi(s.theta[k], s.chi[k], spec);
        xi[k] = std::log1p(s.chi[k]);
        p[k] = s.u[k] * (1.0 + s.chi[k]);
    }
    s.e = Field(g, std::move(e));
    s.xi = Field(g, std::move(xi));
    s.p = Field(g, std::move(p));
    return s;
}

}  // namespace hydrostore
