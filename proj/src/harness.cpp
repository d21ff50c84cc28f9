#include "bristle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace bristle {

namespace {

double interpolate_x(const Trajectory& traj, double t) {
    const auto& s = traj.samples;
    auto it = std::lower_bound(s.begin(), s.end(), t, [](const TrajectorySample& a, double tt) {
        return a.state.t < tt;
    });
    if (it == s.begin()) return it->state.x;
    if (it == s.end()) return s.back().state.x;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double u = (t - lo.state.t) / (hi.state.t - lo.state.t);
    return lo.state.x + u * (hi.state.x - lo.state.x);
}

void check_window(const Trajectory& traj, double window_fraction) {
    if (traj.samples.size() < 2 || !(traj.duration() > 0.0))
        throw std::invalid_argument("trajectory too short to measure");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw std::invalid_argument("window_fraction must lie in (0, 1]");
}

} // namespace

double average_speed(const Trajectory& traj, double window_fraction) {
    check_window(traj, window_fraction);
    const double t_end = traj.samples.back().state.t;
    const double t_w = t_end - window_fraction * traj.duration();
    const double x_w = interpolate_x(traj, t_w);
    return (traj.samples.back().state.x - x_w) / (t_end - t_w);
}

RegimeOccupancy regime_occupancy(const Trajectory& traj, double window_fraction) {
    check_window(traj, window_fraction);
    const double t0 = traj.samples.front().state.t;
    const double t_end = traj.samples.back().state.t;
    const double t_w = t_end - window_fraction * traj.duration();

    RegimeOccupancy occ;
    auto credit = [&](Regime r, double a, double b) {
        const double lo = std::max(a, t_w);
        const double hi = std::min(b, t_end);
        if (hi <= lo) return;
        switch (r) {
            case Regime::Stick: occ.stick += hi - lo; break;
            case Regime::SlipForward: occ.slip_forward += hi - lo; break;
            case Regime::SlipBackward: occ.slip_backward += hi - lo; break;
        }
    };

    double cur_t = t0;
    Regime cur = traj.samples.front().state.regime;
    for (const auto& ev : traj.events) {
        if (ev.t < t0) continue;
        credit(cur, cur_t, ev.t);
        cur_t = ev.t;
        cur = ev.to;
    }
    credit(cur, cur_t, t_end);

    const double total = t_end - t_w;
    occ.stick /= total;
    occ.slip_forward /= total;
    occ.slip_backward /= total;
    return occ;
}

double wobble_scale(const Trajectory& traj, double period) {
    if (traj.samples.empty()) return 0.0;
    const double t_from = traj.samples.back().state.t - period;
    double lo = traj.samples.back().state.x, hi = lo;
    for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
        if (it->state.t < t_from) break;
        lo = std::min(lo, it->state.x);
        hi = std::max(hi, it->state.x);
    }
    return hi - lo;
}

void SweepSpec::validate() const {
    if (!(freq_start_hz > 0.0)) throw std::invalid_argument("freq_start_hz must be > 0");
    if (!(freq_step_hz > 0.0)) throw std::invalid_argument("freq_step_hz must be > 0");
    if (!(freq_stop_hz >= freq_start_hz))
        throw std::invalid_argument("freq_stop_hz must be >= freq_start_hz");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("sweep amplitude must be >= 0");
    if (!(duration_per_point > 0.0))
        throw std::invalid_argument("duration_per_point must be > 0");
    if (!(measure_window_fraction > 0.0 && measure_window_fraction < 1.0))
        throw std::invalid_argument("measure_window_fraction must lie in (0, 1)");
}

std::vector<double> SweepSpec::frequencies() const {
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        const double f = freq_start_hz + static_cast<double>(k) * freq_step_hz;
        if (f > freq_stop_hz * (1.0 + 1e-12)) break;
        out.push_back(f);
    }
    return out;
}

SweepResult frequency_sweep(const RobotParams& p, const SweepSpec& spec,
                            const IntegratorConfig& cfg, int parallelism) {
    p.validate();
    spec.validate();
    cfg.validate();

    const std::vector<double> freqs = spec.frequencies();
    const HybridState initial = equilibrium_rest_state(p);

    SweepResult result;
    result.points.resize(freqs.size());

    auto run_point = [&](std::size_t i) {
        SweepPoint& pt = result.points[i];
        pt.freq_hz = freqs[i];
        pt.omega = 2.0 * M_PI * freqs[i];
        pt.bound = speed_upper_bound(p, pt.omega);
        try {
            const DriveSignal drive{spec.amplitude, pt.omega, spec.phase};
            const Trajectory traj = simulate(initial, p, drive, cfg, spec.duration_per_point);
            pt.jumped = traj.jumped;
            if (traj.failed()) {
                pt.status = traj.error;
                return;
            }
            if (traj.samples.size() < 2 || !(traj.duration() > 0.0)) {
                pt.status = "jumped at start";
                return;
            }
            pt.avg_speed = average_speed(traj, spec.measure_window_fraction);
            pt.occupancy = regime_occupancy(traj, spec.measure_window_fraction);
            pt.wobble = wobble_scale(traj, drive.period(traj.duration()));
            pt.measure_time = spec.measure_window_fraction * traj.duration();
            pt.status = "ok";
        } catch (const std::exception& e) {
            pt.status = e.what();
        }
    };

    int workers = parallelism;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(freqs.size())));

    if (workers == 1) {
        for (std::size_t i = 0; i < freqs.size(); ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < freqs.size();
                     i = next.fetch_add(1))
                    run_point(i);
            });
        for (auto& th : pool) th.join();
    }

    for (const auto& pt : result.points) {
        if (!pt.ok()) {
            ++result.failed_points;
            continue;
        }
        if (pt.jumped) continue; // truncated transient, not a steady measurement
        if (!result.forward_peak || pt.avg_speed > result.forward_peak->avg_speed)
            result.forward_peak = pt;
        if (!result.backward_peak || pt.avg_speed < result.backward_peak->avg_speed)
            result.backward_peak = pt;
    }
    return result;
}

BoundCheck bound_check(const SweepResult& result) {
    BoundCheck out;
    out.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& pt : result.points) {
        if (!pt.ok()) continue;
        ++out.checked;
        const double margin = pt.bound - std::abs(pt.avg_speed);
        out.min_margin = std::min(out.min_margin, margin);
        if (pt.bound > 0.0)
            out.worst_ratio = std::max(out.worst_ratio, std::abs(pt.avg_speed) / pt.bound);
        if (margin < 0.0) {
            ++out.violations;
            out.all_within = false;
        }
    }
    if (out.checked == 0) out.min_margin = 0.0;
    return out;
}

ResonanceProbe resonance_probe(const RobotParams& p, const DriveSignal& d,
                               const IntegratorConfig& cfg, int periods,
                               double growth_threshold) {
    p.validate();
    d.validate();
    if (!(d.omega > 0.0))
        throw std::invalid_argument("resonance_probe: drive omega must be > 0");
    if (periods < 3) throw std::invalid_argument("resonance_probe: periods must be >= 3");

    const EquilibriumSet eq = equilibria(p);
    const double T = 2.0 * M_PI / d.omega;
    const HybridState initial = rest_state(p, eq.theta_bar, 0.0);
    const Trajectory traj = simulate(initial, p, d, cfg, periods * T);
    if (traj.failed()) throw std::runtime_error("resonance_probe: " + traj.error);

    ResonanceProbe probe;
    probe.per_period_peak.assign(periods, 0.0);
    const auto [band_lo, band_hi] = std::minmax(eq.y_bar_p, eq.y_bar_n);
    const double t0 = traj.samples.front().state.t;
    for (const auto& s : traj.samples) {
        const double dev = std::abs(s.state.y - eq.y_bar);
        const double rel_t = s.state.t - t0;
        if (rel_t <= 2.0 * T) probe.reference_amplitude = std::max(probe.reference_amplitude, dev);
        probe.peak_amplitude = std::max(probe.peak_amplitude, dev);
        const int k = std::min<int>(periods - 1, static_cast<int>(rel_t / T));
        probe.per_period_peak[k] = std::max(probe.per_period_peak[k], dev);
        if (s.state.y < band_lo || s.state.y > band_hi) probe.crossed_band = true;
    }
    probe.growth_factor = probe.reference_amplitude > 0.0
                              ? probe.peak_amplitude / probe.reference_amplitude
                              : 0.0;
    probe.resonant = probe.growth_factor >= growth_threshold;
    return probe;
}

SlingResult sling_experiment(const RobotParams& p, const DriveSignal& d,
                             const IntegratorConfig& cfg, double duration) {
    p.validate();
    d.validate();
    SlingResult out;
    // Released from rest with the legs unloaded (theta = theta0).
    const HybridState initial = rest_state(p, p.theta0, 0.0);
    out.trajectory = simulate(initial, p, d, cfg, duration);
    if (out.trajectory.failed())
        throw std::runtime_error("sling_experiment: " + out.trajectory.error);
    out.displacement =
        out.trajectory.samples.back().state.x - out.trajectory.samples.front().state.x;
    for (const auto& ev : out.trajectory.events)
        if (ev.guard == GuardKind::StickYield) out.yielded = true;
    return out;
}

} // namespace bristle
