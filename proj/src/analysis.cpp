#include "bristle/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace bristle {

namespace {

// Residual of the equilibrium balance with a signed friction coefficient:
//   f(th) = g m R (cos th + mu sin th) + kappa (th - theta0)
// mu = 0 gives the neutral equilibrium, +mu_k forward slip, -mu_k backward.
struct EquilibriumResidual {
    double gmr;
    double kappa;
    double theta0;
    double mu;

    double operator()(double th) const {
        return gmr * (std::cos(th) + mu * std::sin(th)) + kappa * (th - theta0);
    }
    double derivative(double th) const {
        return gmr * (-std::sin(th) + mu * std::cos(th)) + kappa;
    }
};

double solve_equilibrium_impl(const RobotParams& p, double mu) {
    p.validate();
    const EquilibriumResidual f{p.gravity * p.mass * p.leg_length, p.kappa, p.theta0, mu};

    const double hi = p.theta0;
    if (f(hi) == 0.0) return hi; // g = 0: spring-neutral angle, exact

    double lo = 1e-12;
    if (!(f(lo) < 0.0 && f(hi) > 0.0))
        throw std::runtime_error(
            "equilibrium root not bracketed in (0, theta0]: spring cannot hold the body");

    // Bisection brings the bracket down far enough that Newton is safe.
    double a = lo, b = hi;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        (fm < 0.0 ? a : b) = mid;
        if (b - a < 1e-6) break;
    }

    // Newton polish down to a few ulps of the dominant residual term.
    double th = 0.5 * (a + b);
    double best = th;
    double best_r = std::abs(f(th));
    const double target = (p.kappa + f.gmr) * 4e-16;
    for (int i = 0; i < 60 && best_r > target; ++i) {
        const double dr = f.derivative(th);
        if (dr == 0.0) break;
        double next = th - f(th) / dr;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        const double r = f(next);
        if (r == 0.0) return next;
        (r < 0.0 ? a : b) = next;
        if (std::abs(r) >= best_r) break; // stalled at double precision
        best_r = std::abs(r);
        best = next;
        th = next;
    }
    if (best_r < 1e-12 * p.kappa) return best;
    throw std::runtime_error("equilibrium solve did not converge (pathological parameters)");
}

// Squared slip resonance from the full small-oscillation expansion about a
// slip equilibrium th_e with delta = th_e - theta0 and signed mu
// (+mu_k forward, -mu_k backward, 0 for the frictionless omega_y):
//
//             1 + delta tan(th_e) + mu (tan(th_e) + delta (tan^2 - sin/cos^2 - 1))
//   w^2 = k * ---------------------------------------------------------------------
//                        m R^2 cos^2(th_e) (1 + mu tan(th_e))^2
double slip_resonance_sq(const RobotParams& p, double th_e, double delta, double mu) {
    const double c = std::cos(th_e);
    const double s = std::sin(th_e);
    const double tan = s / c;
    const double num =
        1.0 + delta * tan + mu * (tan + delta * (tan * tan - s / (c * c) - 1.0));
    const double den = p.leg_length * p.leg_length * p.mass * c * c *
                       (1.0 + mu * tan) * (1.0 + mu * tan);
    return p.kappa * num / den;
}

double checked_sqrt(double w2, const char* what) {
    if (!(w2 >= 0.0))
        throw std::domain_error(std::string("negative squared frequency for ") + what +
                                ": statically unstable configuration");
    return std::sqrt(w2);
}

} // namespace

double solve_equilibrium(const RobotParams& p) { return solve_equilibrium_impl(p, 0.0); }

double solve_equilibrium_directional(const RobotParams& p, SlipDirection dir) {
    const double mu = dir == SlipDirection::Forward ? p.mu_k : -p.mu_k;
    return solve_equilibrium_impl(p, mu);
}

EquilibriumSet equilibria(const RobotParams& p) {
    EquilibriumSet e;
    e.theta_bar = solve_equilibrium(p);
    e.theta_bar_p = solve_equilibrium_directional(p, SlipDirection::Forward);
    e.theta_bar_n = solve_equilibrium_directional(p, SlipDirection::Backward);
    e.y_bar = p.leg_length * std::sin(e.theta_bar);
    e.y_bar_p = p.leg_length * std::sin(e.theta_bar_p);
    e.y_bar_n = p.leg_length * std::sin(e.theta_bar_n);
    e.delta_p = e.theta_bar_p - p.theta0;
    e.delta_n = e.theta_bar_n - p.theta0;
    return e;
}

ResonanceSet resonances(const RobotParams& p) {
    const EquilibriumSet e = equilibria(p);
    const double mr2 = p.mass * p.leg_length * p.leg_length;
    const double tan_bar = std::tan(e.theta_bar);

    ResonanceSet r;
    const double wt2 = (p.kappa / mr2) * (1.0 + (e.theta_bar - p.theta0) * tan_bar);
    r.omega_theta = checked_sqrt(wt2, "omega_theta");
    r.omega_y = checked_sqrt(slip_resonance_sq(p, e.theta_bar, e.theta_bar - p.theta0, 0.0),
                             "omega_y");
    r.omega_yp =
        checked_sqrt(slip_resonance_sq(p, e.theta_bar_p, e.delta_p, p.mu_k), "omega_yp");
    r.omega_yn =
        checked_sqrt(slip_resonance_sq(p, e.theta_bar_n, e.delta_n, -p.mu_k), "omega_yn");

    const double wy2 = r.omega_y * r.omega_y;
    r.omega_yp_approx = checked_sqrt(wy2 / (1.0 + p.mu_k * tan_bar), "omega_yp_approx");
    r.omega_yn_approx = checked_sqrt(wy2 / (1.0 - p.mu_k * tan_bar), "omega_yn_approx");
    return r;
}

double speed_upper_bound(const RobotParams& p, double omega) {
    return omega / (2.0 * M_PI) * p.leg_length * (1.0 - std::cos(p.theta0));
}

double kappa_from_geometry(double youngs_modulus, double leg_diameter, double leg_length,
                           double n_effective_legs) {
    if (!(youngs_modulus > 0.0 && leg_diameter > 0.0 && leg_length > 0.0 &&
          n_effective_legs > 0.0))
        throw std::invalid_argument("kappa_from_geometry: all inputs must be > 0");
    const double second_moment = M_PI * std::pow(leg_diameter, 4) / 64.0;
    const double k_bend = 3.0 * youngs_modulus * second_moment / std::pow(leg_length, 3);
    return n_effective_legs * k_bend * leg_length * leg_length;
}

} // namespace bristle
