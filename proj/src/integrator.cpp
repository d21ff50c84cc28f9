#include "bristle/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bristle {

namespace {

using Vec = std::array<double, 4>;

// Dormand-Prince 5(4) tableau (FSAL: stage 7 is the derivative at the step end).
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights, for the error estimate.
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

// Regime-local coordinates: stick integrates [theta, theta_dot] about the
// anchored tip, slip integrates [x, vx, y, vy].
struct RegimeOde {
    const RobotParams& p;
    const DriveSignal& d;
    Regime regime;
    double x_l;

    int dim() const { return regime == Regime::Stick ? 2 : 4; }

    SlipDirection slip_dir() const {
        return regime == Regime::SlipForward ? SlipDirection::Forward
                                             : SlipDirection::Backward;
    }

    void rhs(double t, const Vec& y, Vec& dy) const {
        if (regime == Regime::Stick) {
            dy[0] = y[1];
            dy[1] = stick_acceleration(y[0], y[1], t, p, d);
            dy[2] = dy[3] = 0.0;
        } else {
            HybridState s = unpack(t, y);
            const SlipAccel a = slip_accelerations(s, p, d, slip_dir());
            dy[0] = y[1];
            dy[1] = a.ax;
            dy[2] = y[3];
            dy[3] = a.ay;
        }
    }

    Vec pack(const HybridState& s) const {
        if (regime == Regime::Stick) return {s.theta(p), s.theta_dot(p), 0.0, 0.0};
        return {s.x, s.vx, s.y, s.vy};
    }

    HybridState unpack(double t, const Vec& y) const {
        HybridState s;
        s.t = t;
        s.regime = regime;
        s.x_l = x_l;
        if (regime == Regime::Stick) {
            const double th = y[0], thd = y[1];
            const double R = p.leg_length;
            s.x = x_l + R * std::cos(th);
            s.y = R * std::sin(th);
            s.vx = -R * thd * std::sin(th);
            s.vy = R * thd * std::cos(th);
        } else {
            s.x = y[0];
            s.vx = y[1];
            s.y = y[2];
            s.vy = y[3];
        }
        return s;
    }

    double height(const Vec& y) const {
        return regime == Regime::Stick ? p.leg_length * std::sin(y[0]) : y[2];
    }

    // Guard values; positive in the regime interior, an event is a crossing
    // to <= 0. Index 0 has the higher transition priority.
    //   stick: [theta0 - theta (jump), stick margin (yield)]
    //   slip:  [normal force (jump), sgn * tip velocity (stop)]
    std::array<double, 2> guards(double t, const Vec& y) const {
        if (regime == Regime::Stick) {
            const double th = y[0], thd = y[1];
            const double tdd = stick_acceleration(th, thd, t, p, d);
            const StickKinematics k = stick_cartesian_kinematics(th, thd, tdd, x_l, p);
            const double N = p.mass * (k.ay + effective_gravity(p, d, t));
            const double margin = p.mu_s * N - p.mass * std::abs(k.ax);
            return {p.theta0 - th, margin};
        }
        HybridState s = unpack(t, y);
        const SlipAccel a = slip_accelerations(s, p, d, slip_dir());
        const double sgn = regime == Regime::SlipForward ? 1.0 : -1.0;
        return {a.normal_force, sgn * s.tip_velocity(p)};
    }
};

struct StepStages {
    Vec k1{}, k7{};
    Vec ynew{};
    double err = 0.0;
};

// One Dormand-Prince step of size h from (t, y); k1 must hold f(t, y).
// Fills ynew, k7 = f(t+h, ynew) and the scaled error norm.
void dp_step(const RegimeOde& ode, double t, const Vec& y, double h, StepStages& st,
             double rel_tol, double abs_tol) {
    const int n = ode.dim();
    Vec k2{}, k3{}, k4{}, k5{}, k6{}, tmp{};

    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * A21 * st.k1[i];
    ode.rhs(t + C2 * h, tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (A31 * st.k1[i] + A32 * k2[i]);
    ode.rhs(t + C3 * h, tmp, k3);
    for (int i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (A41 * st.k1[i] + A42 * k2[i] + A43 * k3[i]);
    ode.rhs(t + C4 * h, tmp, k4);
    for (int i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (A51 * st.k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    ode.rhs(t + C5 * h, tmp, k5);
    for (int i = 0; i < n; ++i)
        tmp[i] = y[i] +
                 h * (A61 * st.k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] +
                      A65 * k5[i]);
    ode.rhs(t + h, tmp, k6);
    for (int i = 0; i < n; ++i)
        st.ynew[i] = y[i] + h * (B1 * st.k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] +
                                 B6 * k6[i]);
    ode.rhs(t + h, st.ynew, st.k7);

    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = h * (E1 * st.k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                              E6 * k6[i] + E7 * st.k7[i]);
        const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(st.ynew[i]));
        sum += (e / sc) * (e / sc);
    }
    st.err = std::sqrt(sum / n);
}

// Non-adaptive solution at t + tau, tau <= the accepted step size. Reuses k1.
Vec substate(const RegimeOde& ode, double t, const Vec& y, const Vec& k1, double tau) {
    StepStages st;
    st.k1 = k1;
    dp_step(ode, t, y, tau, st, 1.0, 1.0);
    return st.ynew;
}

// Cubic Hermite interpolation across an accepted step, for output sampling.
Vec hermite(const RegimeOde& ode, const Vec& y0, const Vec& k1, const Vec& y1,
            const Vec& k7, double h, double u) {
    const int n = ode.dim();
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    Vec out{};
    for (int i = 0; i < n; ++i)
        out[i] = h00 * y0[i] + h10 * h * k1[i] + h01 * y1[i] + h11 * h * k7[i];
    return out;
}

double normal_force_of(const HybridState& s, const RobotParams& p, const DriveSignal& d) {
    if (s.regime == Regime::Stick) {
        const double th = s.theta(p), thd = s.theta_dot(p);
        const double tdd = stick_acceleration(th, thd, s.t, p, d);
        const StickKinematics k = stick_cartesian_kinematics(th, thd, tdd, s.x_l, p);
        return p.mass * (k.ay + effective_gravity(p, d, s.t));
    }
    const SlipDirection dir = s.regime == Regime::SlipForward ? SlipDirection::Forward
                                                              : SlipDirection::Backward;
    return slip_accelerations(s, p, d, dir).normal_force;
}

struct SampleEmitter {
    Trajectory* traj = nullptr;
    double next_t = 0.0;
    double dt = 0.0;
    std::size_t max_samples = 0;

    void emit(const HybridState& s, const RobotParams& p, const DriveSignal& d) {
        if (!traj || traj->samples.size() >= max_samples) return;
        if (!traj->samples.empty() && s.t <= traj->samples.back().state.t) return;
        traj->samples.push_back({s, normal_force_of(s, p, d)});
    }
};

double natural_period(const RobotParams& p, const DriveSignal& d) {
    // The stiffest linear mode sets the guard-scan granularity.
    const double w_nat =
        std::sqrt(p.kappa / (p.mass * p.leg_length * p.leg_length)) / std::cos(p.theta0);
    const double w = std::max(w_nat, d.omega);
    return 2.0 * M_PI / w;
}

GuardKind classify(Regime from, const TransitionDecision& dec) {
    if (std::holds_alternative<JumpEvent>(dec)) return GuardKind::Jump;
    const Regime to = std::get<Regime>(dec);
    if (from == Regime::Stick) return GuardKind::StickYield;
    if (to == Regime::Stick) return GuardKind::StickCapture;
    return GuardKind::SlipReversal;
}

std::pair<HybridState, std::optional<TransitionEvent>>
integrate_segment_impl(const HybridState& state, const RobotParams& p,
                       const DriveSignal& d, const IntegratorConfig& cfg, double t_stop,
                       SampleEmitter* emitter, double* max_overshoot) {
    if (t_stop < state.t) throw std::invalid_argument("integrate_segment: t_stop < t");
    if (t_stop == state.t) return {state, std::nullopt};

    RegimeOde ode{p, d, state.regime, state.x_l};
    Vec y = ode.pack(state);
    double t = state.t;

    const double y_ceiling = p.leg_length * std::sin(p.theta0);
    auto note_overshoot = [&](const Vec& yy) {
        if (max_overshoot)
            *max_overshoot = std::max(*max_overshoot, ode.height(yy) - y_ceiling);
    };
    note_overshoot(y);

    const double h_max = std::min(cfg.max_step, natural_period(p, d) / 8.0);
    double h = std::min(h_max, (t_stop - t) * 0.5);
    if (h <= 0.0) h = t_stop - t;

    StepStages st;
    ode.rhs(t, y, st.k1);
    std::array<double, 2> g_prev = ode.guards(t, y);

    int consecutive_rejects = 0;
    while (t < t_stop) {
        h = std::min(h, t_stop - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error("integrate_segment: step size underflow");

        dp_step(ode, t, y, h, st, cfg.rel_tol, cfg.abs_tol);
        if (st.err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(st.err, -0.2));
            if (++consecutive_rejects > 200)
                throw std::runtime_error("integrate_segment: step control stalled");
            continue;
        }
        consecutive_rejects = 0;

        // Scan the guards at quarter checkpoints plus the step end.
        constexpr std::array<double, 4> fractions{0.25, 0.5, 0.75, 1.0};
        std::array<double, 2> g_here = g_prev;
        double tau_prev = 0.0;
        double event_tau = -1.0;
        int event_guard = -1;
        bool event_ambiguous = false;
        Vec event_y{};
        for (double frac : fractions) {
            const double tau = frac * h;
            const Vec yc = frac == 1.0 ? st.ynew : substate(ode, t, y, st.k1, tau);
            const std::array<double, 2> g = ode.guards(t + tau, yc);
            for (int i = 0; i < 2; ++i) {
                if (!(g_here[i] > 0.0 && g[i] <= 0.0)) continue;
                // Bisect this guard's crossing inside (tau_prev, tau].
                double a = tau_prev, b = tau;
                Vec yb = yc;
                while (b - a > cfg.event_tol) {
                    const double m = 0.5 * (a + b);
                    const Vec ym = substate(ode, t, y, st.k1, m);
                    if (ode.guards(t + m, ym)[i] > 0.0) {
                        a = m;
                    } else {
                        b = m;
                        yb = ym;
                    }
                }
                // Earliest crossing wins; ties within event_tol resolve by
                // guard priority (index 0 first) and are flagged ambiguous.
                const bool tie =
                    event_guard >= 0 && std::abs(b - event_tau) <= cfg.event_tol;
                if (event_guard < 0 || b < event_tau - cfg.event_tol ||
                    (tie && i < event_guard)) {
                    event_tau = b;
                    event_guard = i;
                    event_y = yb;
                }
                if (tie) event_ambiguous = true;
            }
            if (event_guard >= 0) break;
            g_here = g;
            tau_prev = tau;
            note_overshoot(yc);
        }

        if (event_guard >= 0) {
            // Emit pending samples up to the event, then classify it.
            if (emitter) {
                while (emitter->next_t <= t + event_tau) {
                    const double u = (emitter->next_t - t) / h;
                    const Vec ys = hermite(ode, y, st.k1, st.ynew, st.k7, h, u);
                    emitter->emit(ode.unpack(emitter->next_t, ys), p, d);
                    emitter->next_t += emitter->dt;
                }
            }
            const HybridState at_event = ode.unpack(t + event_tau, event_y);
            note_overshoot(event_y);
            const TransitionDecision dec = decide_transition(at_event, p, d, cfg.epsilon_v);
            if (std::holds_alternative<Regime>(dec) &&
                std::get<Regime>(dec) == at_event.regime) {
                // Guard brushed zero without an actual transition (e.g. theta0
                // grazed with theta_dot <= 0). Continue from the located point.
                t = at_event.t;
                y = event_y;
                ode.rhs(t, y, st.k1);
                g_prev = ode.guards(t, y);
                continue;
            }
            TransitionEvent ev;
            ev.t = at_event.t;
            ev.from = at_event.regime;
            ev.guard = classify(at_event.regime, dec);
            ev.to = std::holds_alternative<Regime>(dec) ? std::get<Regime>(dec)
                                                        : at_event.regime;
            ev.state = at_event;
            ev.ambiguous = event_ambiguous;
            return {at_event, ev};
        }

        if (emitter) {
            while (emitter->next_t <= t + h && emitter->next_t <= t_stop) {
                const double u = (emitter->next_t - t) / h;
                const Vec ys = hermite(ode, y, st.k1, st.ynew, st.k7, h, u);
                emitter->emit(ode.unpack(emitter->next_t, ys), p, d);
                emitter->next_t += emitter->dt;
            }
        }

        t += h;
        y = st.ynew;
        st.k1 = st.k7; // FSAL
        g_prev = g_here;
        h = std::min(h_max, h * std::clamp(0.9 * std::pow(std::max(st.err, 1e-10), -0.2),
                                           0.2, 5.0));
    }

    return {ode.unpack(t_stop, y), std::nullopt};
}

} // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0 && abs_tol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
    if (!(event_tol > 0.0 && event_tol < max_step))
        throw std::invalid_argument("event_tol must lie in (0, max_step)");
    if (!(epsilon_v > 0.0)) throw std::invalid_argument("epsilon_v must be > 0");
    if (max_events_per_period < 1)
        throw std::invalid_argument("max_events_per_period must be >= 1");
    if (!(samples_per_period >= 1.0)) throw std::invalid_argument("samples_per_period >= 1");
    if (max_samples < 2) throw std::invalid_argument("max_samples must be >= 2");
}

std::string_view guard_name(GuardKind g) {
    switch (g) {
        case GuardKind::StickYield: return "stick_yield";
        case GuardKind::StickCapture: return "stick_capture";
        case GuardKind::SlipReversal: return "slip_reversal";
        case GuardKind::Jump: return "jump";
    }
    return "?";
}

std::pair<HybridState, std::optional<TransitionEvent>>
integrate_segment(const HybridState& state, const RobotParams& p, const DriveSignal& d,
                  const IntegratorConfig& cfg, double t_stop) {
    p.validate();
    d.validate();
    cfg.validate();
    return integrate_segment_impl(state, p, d, cfg, t_stop, nullptr, nullptr);
}

namespace {

// Re-anchor the tip when a slip arc is captured into stick.
HybridState apply_transition(const HybridState& at_event, Regime to, const RobotParams& p) {
    HybridState s = at_event;
    if (to == Regime::Stick && s.regime != Regime::Stick) {
        const double c = std::sqrt(p.leg_length * p.leg_length - s.y * s.y);
        s.x_l = s.x - c;
    }
    s.regime = to;
    return s;
}

} // namespace

Trajectory simulate(const HybridState& initial, const RobotParams& p, const DriveSignal& d,
                    const IntegratorConfig& cfg, double duration) {
    p.validate();
    d.validate();
    cfg.validate();
    if (!(duration > 0.0)) throw std::invalid_argument("simulate: duration must be > 0");

    Trajectory traj;
    const double t_end = initial.t + duration;
    const double period = d.period(natural_period(p, d));

    double dt_out = period / cfg.samples_per_period;
    if (duration / dt_out + 2.0 > static_cast<double>(cfg.max_samples))
        dt_out = duration / static_cast<double>(cfg.max_samples - 2);

    SampleEmitter emitter{&traj, initial.t, dt_out, cfg.max_samples};

    HybridState s = initial;
    // The initial regime tag may be infeasible (e.g. stick with mu_s too small
    // to hold); settle it before integrating.
    {
        const TransitionDecision dec = decide_transition(s, p, d, cfg.epsilon_v);
        if (std::holds_alternative<JumpEvent>(dec)) {
            traj.events.push_back({s.t, s.regime, s.regime, GuardKind::Jump, s, false});
            traj.jumped = true;
        } else if (const Regime to = std::get<Regime>(dec); to != s.regime) {
            traj.events.push_back({s.t, s.regime, to, classify(s.regime, dec), s, false});
            s = apply_transition(s, to, p);
        }
    }
    emitter.emit(s, p, d);
    emitter.next_t = initial.t + dt_out;

    while (s.t < t_end) {
        try {
            auto [st, ev] =
                integrate_segment_impl(s, p, d, cfg, t_end, &emitter, &traj.max_overshoot);
            if (!ev) {
                s = st;
                break;
            }
            traj.events.push_back(*ev);
            emitter.emit(ev->state, p, d);
            if (ev->guard == GuardKind::Jump) {
                // Ground contact momentarily lost. The contact equations stay
                // well defined through the brief unloaded stretch (the spring
                // restores past theta0), so the run is flagged and continued;
                // max_overshoot quantifies the violation.
                traj.jumped = true;
                s = ev->state;
                continue;
            }
            s = apply_transition(ev->state, ev->to, p);

            // Chatter guard: too many transitions within one drive period.
            const double window_start = s.t - period;
            std::size_t recent = 0;
            for (auto it = traj.events.rbegin(); it != traj.events.rend(); ++it) {
                if (it->t < window_start) break;
                ++recent;
            }
            if (recent > static_cast<std::size_t>(cfg.max_events_per_period))
                throw std::runtime_error("chatter limit exceeded (" +
                                         std::to_string(recent) + " events in one period)");
        } catch (const std::exception& e) {
            // Mid-run numerical failure: return what was computed so far.
            traj.error = e.what();
            emitter.emit(s, p, d);
            return traj;
        }
    }

    emitter.emit(s, p, d);
    return traj;
}

Trajectory oracle_fixed_step(const HybridState& initial, const RobotParams& p,
                             const DriveSignal& d, double dt, double duration,
                             double epsilon_v) {
    p.validate();
    d.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("oracle_fixed_step: dt must be > 0");
    if (!(duration > 0.0)) throw std::invalid_argument("oracle_fixed_step: duration > 0");

    Trajectory traj;
    const double period = d.period(natural_period(p, d));
    const std::size_t total_steps = static_cast<std::size_t>(std::ceil(duration / dt));
    std::size_t stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(period / 2000.0 / dt)));
    const std::size_t max_samples = 2000000;
    if (total_steps / stride > max_samples) stride = total_steps / max_samples + 1;

    HybridState s = initial;
    bool jump_active = false;
    {
        const TransitionDecision dec = decide_transition(s, p, d, epsilon_v);
        if (std::holds_alternative<JumpEvent>(dec)) {
            traj.events.push_back({s.t, s.regime, s.regime, GuardKind::Jump, s, false});
            traj.jumped = true;
            jump_active = true;
        } else if (const Regime to = std::get<Regime>(dec); to != s.regime) {
            traj.events.push_back({s.t, s.regime, to, classify(s.regime, dec), s, false});
            s = apply_transition(s, to, p);
        }
    }
    traj.samples.push_back({s, normal_force_of(s, p, d)});

    const double y_ceiling = p.leg_length * std::sin(p.theta0);
    const double t_end = initial.t + duration;
    std::size_t step_idx = 0;
    while (s.t < t_end - 0.5 * dt) {
        RegimeOde ode{p, d, s.regime, s.x_l};
        Vec y = ode.pack(s);
        const double t = s.t;

        // Classic RK4.
        Vec k1, k2, k3, k4, tmp;
        const int n = ode.dim();
        ode.rhs(t, y, k1);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        ode.rhs(t + 0.5 * dt, tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        ode.rhs(t + 0.5 * dt, tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
        ode.rhs(t + dt, tmp, k4);
        for (int i = 0; i < n; ++i)
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        s = ode.unpack(t + dt, y);
        traj.max_overshoot = std::max(traj.max_overshoot, s.y - y_ceiling);
        ++step_idx;

        const TransitionDecision dec = decide_transition(s, p, d, epsilon_v);
        if (std::holds_alternative<JumpEvent>(dec)) {
            if (!jump_active) {
                traj.events.push_back({s.t, s.regime, s.regime, GuardKind::Jump, s, false});
                traj.jumped = true;
                jump_active = true;
            }
        } else {
            jump_active = false;
            if (const Regime to = std::get<Regime>(dec); to != s.regime) {
                traj.events.push_back(
                    {s.t, s.regime, to, classify(s.regime, dec), s, false});
                s = apply_transition(s, to, p);
            }
        }

        if (step_idx % stride == 0) traj.samples.push_back({s, normal_force_of(s, p, d)});
    }
    if (traj.samples.back().state.t < s.t)
        traj.samples.push_back({s, normal_force_of(s, p, d)});
    return traj;
}

HybridState equilibrium_rest_state(const RobotParams& p) {
    return rest_state(p, solve_equilibrium(p), 0.0);
}

} // namespace bristle
