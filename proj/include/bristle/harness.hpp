#pragma once

#include <map>
#include <optional>
#include <string>

#include "bristle/integrator.hpp"

namespace bristle {

/// Signed mean velocity over the trailing window of a trajectory:
/// (x(t_end) - x(t_w)) / (t_end - t_w) with t_w = t_end - fraction * duration.
/// x(t_w) is interpolated between samples. Negative = backward.
double average_speed(const Trajectory& traj, double window_fraction);

/// Time fraction spent in each regime inside the same trailing window,
/// reconstructed exactly from the event list.
struct RegimeOccupancy {
    double stick = 0.0;
    double slip_forward = 0.0;
    double slip_backward = 0.0;

    int regimes_visited(double min_fraction = 0.0) const {
        return (stick > min_fraction) + (slip_forward > min_fraction) +
               (slip_backward > min_fraction);
    }
};
RegimeOccupancy regime_occupancy(const Trajectory& traj, double window_fraction);

/// Peak-to-peak x excursion over the trailing `period` seconds; the scale a
/// non-translating oscillation can fake as displacement.
double wobble_scale(const Trajectory& traj, double period);

struct SweepSpec {
    double freq_start_hz = 0.0;
    double freq_stop_hz = 0.0;
    double freq_step_hz = 0.0;
    double amplitude = 0.0;          // m
    double duration_per_point = 0.0; // s
    double measure_window_fraction = 0.5;
    double phase = 0.0;

    void validate() const;
    std::vector<double> frequencies() const; // start, start+step, ..., <= stop
};

struct SweepPoint {
    double freq_hz = 0.0;
    double omega = 0.0;
    double avg_speed = 0.0; // m/s, signed
    double bound = 0.0;     // m/s, speed_upper_bound at this frequency
    RegimeOccupancy occupancy;
    bool jumped = false;
    double wobble = 0.0; // peak-to-peak x in the last drive period
    std::string status;  // "ok" or the failure reason

    bool ok() const { return status == "ok"; }
    /// Displacement clearly beyond what a stationary oscillation produces.
    bool moved() const {
        return ok() && std::abs(avg_speed) > 0.0 &&
               std::abs(avg_speed) * measure_time > 3.0 * wobble;
    }
    double measure_time = 0.0; // s, window length actually measured
};

struct SweepResult {
    std::vector<SweepPoint> points; // sorted by frequency
    std::optional<SweepPoint> forward_peak;  // argmax of signed speed, non-jumped points
    std::optional<SweepPoint> backward_peak; // argmin of signed speed, non-jumped points
    std::size_t failed_points = 0;
};

/// Independent cold-start simulation per frequency (rest at equilibrium each
/// time). Per-point failures are recorded in the status column and the sweep
/// continues. Deterministic and order-independent; points may be run on
/// `parallelism` threads (0 = hardware concurrency).
SweepResult frequency_sweep(const RobotParams& p, const SweepSpec& spec,
                            const IntegratorConfig& cfg, int parallelism = 1);

struct BoundCheck {
    bool all_within = true;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double min_margin = 0.0;     // min over points of (bound - |speed|)
    double worst_ratio = 0.0;    // max over points of |speed| / bound
};
BoundCheck bound_check(const SweepResult& result);

/// Amplitude-growth classification of a driven run (resonance probe).
/// Growth is max |y - y_bar| over `periods` drive periods relative to the
/// forced amplitude seen in the first two periods; resonant when the ratio
/// reaches `growth_threshold`. Also reports whether y left the band
/// [y_bar_p, y_bar_n] spanned by the directional equilibria.
struct ResonanceProbe {
    bool resonant = false;
    double growth_factor = 0.0;
    double reference_amplitude = 0.0; // max |y - y_bar| in the first 2 periods
    double peak_amplitude = 0.0;      // max |y - y_bar| over the whole probe
    bool crossed_band = false;        // y < y_bar_p or y > y_bar_n at some time
    std::vector<double> per_period_peak; // amplitude trace
};

ResonanceProbe resonance_probe(const RobotParams& p, const DriveSignal& d,
                               const IntegratorConfig& cfg, int periods = 20,
                               double growth_threshold = 5.0);

/// Net signed displacement of a mu_k = 0 run started from rest at the free
/// leg angle theta0 (legs unloaded, the "sling" release).
struct SlingResult {
    double displacement = 0.0; // m, x(end) - x(0)
    bool yielded = false;      // any stick_yield event occurred
    Trajectory trajectory;
};
SlingResult sling_experiment(const RobotParams& p, const DriveSignal& d,
                             const IntegratorConfig& cfg, double duration);

} // namespace bristle
