#pragma once

#include "bristle/params.hpp"

namespace bristle {

enum class SlipDirection { Forward, Backward };

/// Static equilibria of the leg angle. theta_bar solves the neutral balance
///     m g R cos(th) + kappa (th - theta0) = 0,
/// and the directional variants solve the slip steady states
///     th - theta0 = (-g m R / kappa) (cos(th) +/- mu_k sin(th)),
/// + for forward slip (tip velocity > 0), - for backward slip.
/// Kinetic friction lowers the forward equilibrium and raises the backward
/// one, so theta_bar_p <= theta_bar <= theta_bar_n (strict for mu_k g > 0).
struct EquilibriumSet {
    double theta_bar = 0.0;
    double theta_bar_p = 0.0;
    double theta_bar_n = 0.0;
    double y_bar = 0.0;   // R sin(theta_bar)
    double y_bar_p = 0.0;
    double y_bar_n = 0.0;
    double delta_p = 0.0; // theta_bar_p - theta0
    double delta_n = 0.0; // theta_bar_n - theta0
};

/// Small-oscillation resonances about the equilibria.
///   omega_theta : stick (rotation about the planted tip)
///   omega_y     : frictionless slip; omega_y = omega_theta / cos(theta_bar)
///   omega_yp/yn : slip resonances bifurcated by kinetic friction, evaluated
///                 from the full expressions at their own equilibria
///   *_approx    : stiff-leg limits omega_y^2 / (1 +/- mu_k tan(theta_bar))
struct ResonanceSet {
    double omega_theta = 0.0;
    double omega_y = 0.0;
    double omega_yp = 0.0;
    double omega_yn = 0.0;
    double omega_yp_approx = 0.0;
    double omega_yn_approx = 0.0;
};

/// Neutral equilibrium angle. Bracketed bisection on (0, theta0] followed by
/// Newton polish; residual below 1e-12 * kappa. Throws std::runtime_error when
/// no root exists in (0, theta0] (e.g. kappa too soft to hold the body up).
double solve_equilibrium(const RobotParams& p);

/// Directional slip equilibrium (see EquilibriumSet).
double solve_equilibrium_directional(const RobotParams& p, SlipDirection dir);

EquilibriumSet equilibria(const RobotParams& p);

/// Throws std::domain_error if any squared frequency comes out negative
/// (statically unstable configuration).
ResonanceSet resonances(const RobotParams& p);

/// Kinematic ceiling on the average speed: (omega / 2 pi) R (1 - cos theta0).
double speed_upper_bound(const RobotParams& p, double omega);

/// Torsional stiffness from beam bending of n effective circular legs:
/// kappa = n * (3 E I / R^3) * R^2 with I = pi d^4 / 64.
double kappa_from_geometry(double youngs_modulus, double leg_diameter,
                           double leg_length, double n_effective_legs);

} // namespace bristle
