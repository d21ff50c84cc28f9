#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace bristle {

/// Physical constants of the robot-surface system. All quantities SI.
/// Angles are measured from the horizontal: a vertical leg has theta = pi/2.
struct RobotParams {
    double mass = 1.0;        // kg
    double gravity = 9.8;     // m/s^2
    double leg_length = 1.0;  // m
    double kappa = 100.0;     // torsional spring constant, N*m/rad
    double mu_s = 0.0;        // static friction coefficient
    double mu_k = 0.0;        // kinetic friction coefficient
    double theta0 = M_PI / 3; // free leg angle, rad
    double zeta = 0.0;        // angular damping in stiction, N*m*s/rad

    /// Throws std::invalid_argument on hard violations
    /// (m > 0, g >= 0, R > 0, kappa > 0, zeta >= 0, mu >= 0, 0 < theta0 < pi/2).
    void validate() const;

    /// Non-fatal advisories, e.g. mu_k > mu_s.
    std::vector<std::string> warnings() const;
};

/// Sinusoidal vertical drive eta(t) = -A cos(omega t + phi).
/// Derivatives are analytic; the drive enters the dynamics only through
/// the effective gravity G(t) = g + eta_ddot(t).
struct DriveSignal {
    double amplitude = 0.0; // m
    double omega = 0.0;     // rad/s
    double phase = 0.0;     // rad

    void validate() const; // A >= 0, omega >= 0

    double height(double t) const { return -amplitude * std::cos(omega * t + phase); }
    double velocity(double t) const { return amplitude * omega * std::sin(omega * t + phase); }
    double accel(double t) const {
        return amplitude * omega * omega * std::cos(omega * t + phase);
    }
    /// Drive period; falls back to `fallback` when omega == 0.
    double period(double fallback) const {
        return omega > 0.0 ? 2.0 * M_PI / omega : fallback;
    }
};

inline double effective_gravity(const RobotParams& p, const DriveSignal& d, double t) {
    return p.gravity + d.accel(t);
}

} // namespace bristle
