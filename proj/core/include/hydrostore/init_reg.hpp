#pragma once

#include "hydrostore/constitutive.hpp"
#include "hydrostore/grid.hpp"
#include "hydrostore/state.hpp"

namespace hydrostore {

/// Resolvent smoothing: solves v + (1/n) A v = v0 with the Neumann operator A.
/// The discrete maximum principle keeps v inside [min v0, max v0].
Field smooth_resolvent(const Field& v0, int n, double tol = 1e-12);

/// Positive resolvent smoothing: solves u + (1/n) A u = u0 + 1/n, so that u >= 1/n
/// whenever u0 >= 0.
Field smooth_positive(const Field& u0, int n, double tol = 1e-12);

struct InitialData {
    Field theta0;
    Field chi0;
    Field u0;
};

/// Builds a smoothed initial State at time 0.
///
/// chi and u are smoothed with the two resolvents above. With `positive_theta`, theta is
/// routed through eta = sqrt(theta0) and smooth_positive, then squared, which keeps it
/// strictly positive; otherwise theta0 is smoothed like chi. e, p and xi are then
/// rebuilt from the structural relations, so the result validates exactly.
State build_initial_state(const InitialData& data, int n, const HSpec& spec, bool positive_theta,
                          double tol = 1e-12);

}  // namespace hydrostore
