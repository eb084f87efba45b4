#pragma once

#include <string>
#include <vector>

#include "hydrostore/constitutive.hpp"
#include "hydrostore/grid.hpp"

namespace hydrostore {

/// Physical constants of the model.
struct ModelParams {
    double mu = 1.0;      ///< phase relaxation coefficient, > 0
    double nu = 1e-3;     ///< viscous regularisation of the phase rate, >= 0
    double gamma = 0.0;   ///< Robin permeability for the pressure flux, >= 0
    HSpec h;
};

void validate(const ModelParams& params);

/// The sextuple (e, theta, chi, xi, u, p) at time t. All six fields share one grid.
struct State {
    double t = 0.0;
    Field e;
    Field theta;
    Field chi;
    Field xi;
    Field u;
    Field p;

    const GridPtr& grid() const { return chi.grid; }
};

/// Largest violation of each structural relation of a State.
struct StateCheck {
    double psi_mismatch = 0.0;       ///< max |e - psi(theta, chi)| / (1 + |e|)
    double pressure_mismatch = 0.0;  ///< max |p - u (1 + chi)| / (1 + |p|)
    double chi_below = 0.0;          ///< max(0, -min chi)
    double chi_above = 0.0;          ///< max(0, max chi - 1)
    double min_u = 0.0;
    double beta_violation = 0.0;     ///< max beta_residual(chi, xi)
    bool finite = true;
    bool consistent_grids = true;

    bool passed(double tol) const;
    std::vector<std::string> failures(double tol) const;
};

StateCheck check_state(const State& state, const HSpec& spec);

/// Throws ValidationError listing every relation violated beyond tol.
void validate_state(const State& state, const HSpec& spec, double tol);

}  // namespace hydrostore
