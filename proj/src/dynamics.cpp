#include "bristle/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace bristle {

std::string_view regime_name(Regime r) {
    switch (r) {
        case Regime::Stick: return "stick";
        case Regime::SlipForward: return "slip_fwd";
        case Regime::SlipBackward: return "slip_bwd";
    }
    return "?";
}

double HybridState::tip_velocity(const RobotParams& p) const {
    const double c = std::sqrt(p.leg_length * p.leg_length - y * y);
    return vx + vy * y / c;
}

SlipAccel slip_accelerations(const HybridState& s, const RobotParams& p,
                             const DriveSignal& d, SlipDirection dir) {
    const double R = p.leg_length;
    if (!(s.y > 0.0 && s.y < R))
        throw std::domain_error("slip_accelerations: y outside (0, R)");

    const double sgn = dir == SlipDirection::Forward ? 1.0 : -1.0;
    const double c = std::sqrt(R * R - s.y * s.y); // R cos(theta)
    const double den = 1.0 + p.mu_k * sgn * s.y / c;
    if (den <= 0.0)
        throw std::domain_error(
            "slip_accelerations: geometrically locked slip (mu_k tan(theta) >= 1)");

    const double G = effective_gravity(p, d, s.t);
    const double spring = p.kappa * (std::asin(s.y / R) - p.theta0) / (p.mass * c);
    const double damping = p.zeta * s.vy / (p.mass * (R * R - s.y * s.y));

    SlipAccel out;
    out.ay = -G - (spring + damping) / den;
    out.normal_force = p.mass * (out.ay + G);
    out.ax = -p.mu_k * (out.ay + G) * sgn;
    return out;
}

double stick_acceleration(double theta, double theta_dot, double t, const RobotParams& p,
                          const DriveSignal& d) {
    const double G = effective_gravity(p, d, t);
    const double R = p.leg_length;
    return -(p.mass * G * R * std::cos(theta) + p.kappa * (theta - p.theta0) +
             p.zeta * theta_dot) /
           (p.mass * R * R);
}

StickKinematics stick_cartesian_kinematics(double theta, double theta_dot,
                                           double theta_ddot, double x_l,
                                           const RobotParams& p) {
    const double R = p.leg_length;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    StickKinematics k;
    k.x = x_l + R * c;
    k.y = R * s;
    k.vx = -R * theta_dot * s;
    k.vy = R * theta_dot * c;
    k.ax = -R * theta_ddot * s - R * theta_dot * theta_dot * c;
    k.ay = R * theta_ddot * c - R * theta_dot * theta_dot * s;
    return k;
}

namespace {

// Stick quantities a state would have if the tip were (or stayed) anchored.
struct StickHypothesis {
    double required_tangential;
    double normal_force;
    double margin;
    double ax;
};

StickHypothesis stick_hypothesis(const HybridState& s, const RobotParams& p,
                                 const DriveSignal& d) {
    const double theta = s.theta(p);
    const double theta_dot = s.theta_dot(p);
    const double tdd = stick_acceleration(theta, theta_dot, s.t, p, d);
    const StickKinematics k = stick_cartesian_kinematics(theta, theta_dot, tdd, s.x_l, p);
    const double G = effective_gravity(p, d, s.t);
    StickHypothesis h;
    h.normal_force = p.mass * (k.ay + G);
    h.required_tangential = p.mass * std::abs(k.ax);
    h.margin = p.mu_s * h.normal_force - h.required_tangential;
    h.ax = k.ax;
    return h;
}

} // namespace

GuardReport guard_report(const HybridState& s, const RobotParams& p, const DriveSignal& d) {
    GuardReport g;
    if (s.regime == Regime::Stick) {
        const StickHypothesis h = stick_hypothesis(s, p, d);
        g.xl_dot = 0.0; // anchored by construction
        g.normal_force = h.normal_force;
        g.required_tangential = h.required_tangential;
        g.stick_margin = h.margin;
    } else {
        const SlipDirection dir = s.regime == Regime::SlipForward ? SlipDirection::Forward
                                                                  : SlipDirection::Backward;
        const SlipAccel a = slip_accelerations(s, p, d, dir);
        const StickHypothesis h = stick_hypothesis(s, p, d);
        g.xl_dot = s.tip_velocity(p);
        g.normal_force = a.normal_force;
        g.required_tangential = h.required_tangential;
        g.stick_margin = h.margin;
    }
    return g;
}

TransitionDecision decide_transition(const HybridState& s, const RobotParams& p,
                                     const DriveSignal& d, double epsilon_v) {
    const double theta = s.theta(p);
    if (s.regime == Regime::Stick) {
        const StickHypothesis h = stick_hypothesis(s, p, d);
        if (h.normal_force <= 0.0 || (theta >= p.theta0 && s.theta_dot(p) > 0.0))
            return JumpEvent{s.t, theta, h.normal_force};
        if (h.margin <= 0.0)
            return h.ax > 0.0 ? Regime::SlipBackward : Regime::SlipForward;
        return Regime::Stick; // no guard active
    }

    const SlipDirection dir =
        s.regime == Regime::SlipForward ? SlipDirection::Forward : SlipDirection::Backward;
    const double sgn = dir == SlipDirection::Forward ? 1.0 : -1.0;
    const SlipAccel a = slip_accelerations(s, p, d, dir);
    if (a.normal_force <= 0.0) return JumpEvent{s.t, theta, a.normal_force};

    const double xl_dot = s.tip_velocity(p);
    if (sgn * xl_dot <= epsilon_v) {
        // Tip stopped: stick if static friction can hold it, else reverse.
        const StickHypothesis h = stick_hypothesis(s, p, d);
        if (h.margin > 0.0 && h.normal_force > 0.0) return Regime::Stick;
        return dir == SlipDirection::Forward ? Regime::SlipBackward : Regime::SlipForward;
    }
    return s.regime;
}

double total_energy(const HybridState& s, const RobotParams& p) {
    const double theta = s.theta(p);
    const double dev = theta - p.theta0;
    return 0.5 * p.mass * (s.vx * s.vx + s.vy * s.vy) + p.mass * p.gravity * s.y +
           0.5 * p.kappa * dev * dev;
}

HybridState rest_state(const RobotParams& p, double theta, double x_l) {
    HybridState s;
    s.t = 0.0;
    s.x_l = x_l;
    s.x = x_l + p.leg_length * std::cos(theta);
    s.y = p.leg_length * std::sin(theta);
    s.vx = 0.0;
    s.vy = 0.0;
    s.regime = Regime::Stick;
    return s;
}

} // namespace bristle
