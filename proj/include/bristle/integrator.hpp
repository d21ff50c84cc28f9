#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "bristle/dynamics.hpp"

namespace bristle {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1e9;              // s; additionally capped at 1/8 drive period
    double event_tol = 1e-9;            // s, time width of event localization
    double epsilon_v = 1e-9;            // m/s, stiction dead-band
    int max_events_per_period = 1000;   // chatter guard
    double samples_per_period = 2000.0; // trajectory output density
    std::size_t max_samples = 2000000;

    void validate() const; // tolerances > 0, event_tol < max_step
};

enum class GuardKind { StickYield, StickCapture, SlipReversal, Jump };

std::string_view guard_name(GuardKind g); // "stick_yield" | "stick_capture" | "slip_reversal" | "jump"

struct TransitionEvent {
    double t = 0.0;
    Regime from = Regime::Stick;
    Regime to = Regime::Stick; // == from for jump events
    GuardKind guard = GuardKind::StickYield;
    HybridState state; // state at the event, before the regime tag changes
    bool ambiguous = false; // two guards crossed within event tolerance
};

struct TrajectorySample {
    HybridState state;
    double normal_force = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples; // strictly increasing in t
    std::vector<TransitionEvent> events;
    bool jumped = false;
    double max_overshoot = 0.0; // max(y - R sin(theta0)) over the run, m
    std::string error; // non-empty when integration failed mid-run (partial data)

    double duration() const {
        return samples.empty() ? 0.0 : samples.back().state.t - samples.front().state.t;
    }
    bool failed() const { return !error.empty(); }
};

/// Integrate the active regime's ODEs until t_stop or the first guard sign
/// change, whichever comes first. Events are localized by bisection over the
/// last accepted step to within event_tol; the returned state sits at the
/// event. Local error per step is controlled by rel_tol/abs_tol (embedded
/// Dormand-Prince 5(4) pair).
std::pair<HybridState, std::optional<TransitionEvent>>
integrate_segment(const HybridState& state, const RobotParams& p, const DriveSignal& d,
                  const IntegratorConfig& cfg, double t_stop);

/// Chain integrate_segment across regime transitions, recording samples on a
/// uniform grid (samples_per_period per drive period) plus one sample at every
/// event. A jump event flags the trajectory but integration continues through
/// the momentary contact loss (the spring restores past theta0); max_overshoot
/// reports how far y exceeded R sin(theta0).
Trajectory simulate(const HybridState& initial, const RobotParams& p, const DriveSignal& d,
                    const IntegratorConfig& cfg, double duration);

/// Fixed-step RK4 cross-validation oracle: per-step guard checks, transitions
/// applied at step boundaries, no event bisection.
Trajectory oracle_fixed_step(const HybridState& initial, const RobotParams& p,
                             const DriveSignal& d, double dt, double duration,
                             double epsilon_v = 1e-9);

/// Default initial condition: at rest in stick at the neutral equilibrium,
/// tip anchored at x_l = 0.
HybridState equilibrium_rest_state(const RobotParams& p);

} // namespace bristle
