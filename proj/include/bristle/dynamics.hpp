#pragma once

#include <string_view>
#include <variant>

#include "bristle/analysis.hpp"
#include "bristle/params.hpp"

namespace bristle {

/// SlipForward is valid while the leg-tip velocity xl_dot > 0,
/// SlipBackward while xl_dot < 0, Stick while the static-friction
/// inequality |xddot| < mu_s (yddot + G) holds.
enum class Regime { Stick, SlipForward, SlipBackward };

std::string_view regime_name(Regime r); // "stick" | "slip_fwd" | "slip_bwd"

/// Cartesian state of the leg joint plus the tip anchor.
/// In stick the rigid-leg constraint ties x to x_l: x - x_l = sqrt(R^2 - y^2),
/// and x_l stays constant (stored, never integrated).
struct HybridState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double x_l = 0.0;
    Regime regime = Regime::Stick;

    double theta(const RobotParams& p) const { return std::asin(y / p.leg_length); }
    double theta_dot(const RobotParams& p) const {
        // y = R sin(theta)  =>  theta_dot = vy / sqrt(R^2 - y^2)
        return vy / std::sqrt(p.leg_length * p.leg_length - y * y);
    }
    /// Tip velocity xl_dot = vx + vy * y / sqrt(R^2 - y^2).
    double tip_velocity(const RobotParams& p) const;
};

/// Accelerations of the joint in a slip regime, and the normal force
/// N = m (ay + G) they imply.
struct SlipAccel {
    double ax = 0.0;
    double ay = 0.0;
    double normal_force = 0.0;
};

/// Slip equations of motion with Coulomb kinetic friction and the drive
/// substitution g -> G(t) = g + eta_ddot(t):
///   ax = -mu_k (ay + G) s,
///   (ay + G)(1 + mu_k s y / sqrt(R^2 - y^2)) + kappa (asin(y/R) - theta0) / (m R sqrt(1 - (y/R)^2))
///       + zeta vy / (m (R^2 - y^2)) = 0,
/// where s = +1 for forward slip, -1 for backward. Throws std::domain_error
/// when the denominator 1 + mu_k s tan(theta) <= 0 (backward slip locks
/// geometrically once mu_k tan(theta) >= 1).
SlipAccel slip_accelerations(const HybridState& s, const RobotParams& p,
                             const DriveSignal& d, SlipDirection dir);

/// Stick equation of motion about the planted tip:
///   theta_ddot = -[m G(t) R cos(theta) + kappa (theta - theta0) + zeta theta_dot] / (m R^2).
double stick_acceleration(double theta, double theta_dot, double t,
                          const RobotParams& p, const DriveSignal& d);

/// Chain-rule kinematics of the joint while the tip is anchored at x_l:
///   x = x_l + R cos(theta), y = R sin(theta), and exact first/second derivatives.
struct StickKinematics {
    double x, y, vx, vy, ax, ay;
};
StickKinematics stick_cartesian_kinematics(double theta, double theta_dot,
                                           double theta_ddot, double x_l,
                                           const RobotParams& p);

/// Guard quantities for regime transitions.
/// In stick: required_tangential = m |ax|, stick_margin = mu_s N - m |ax|.
/// In slip: xl_dot and the normal force from slip_accelerations; the stick
/// fields are filled with the hypothetical values a capture would need.
struct GuardReport {
    double xl_dot = 0.0;
    double normal_force = 0.0;
    double required_tangential = 0.0;
    double stick_margin = 0.0;
};

GuardReport guard_report(const HybridState& s, const RobotParams& p, const DriveSignal& d);

/// Ground-contact loss: in stick at theta >= theta0 with theta_dot > 0, in
/// slip when the normal force reaches zero. Flags the trajectory; the contact
/// equations keep integrating through the brief unloaded stretch.
struct JumpEvent {
    double t = 0.0;
    double theta = 0.0;
    double normal_force = 0.0;
};

using TransitionDecision = std::variant<Regime, JumpEvent>;

/// Decide the regime after a located guard crossing. Priority when guards
/// coincide within tolerance: jump > stick-capture > slip-reversal > stick-yield.
///   - stick yield with ax > 0 -> SlipBackward, ax < 0 -> SlipForward
///   - slip with |xl_dot| <= epsilon_v -> Stick if the stick-consistent
///     tangential force satisfies the static bound strictly, else the
///     opposite slip regime (Karnopp-style capture test)
TransitionDecision decide_transition(const HybridState& s, const RobotParams& p,
                                     const DriveSignal& d, double epsilon_v);

/// Total mechanical energy T + V with V = m g y + kappa (theta - theta0)^2 / 2.
double total_energy(const HybridState& s, const RobotParams& p);

/// Build a consistent stick state at rest at the given leg angle.
HybridState rest_state(const RobotParams& p, double theta, double x_l = 0.0);

} // namespace bristle
