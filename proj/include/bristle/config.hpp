#pragma once

#include <optional>
#include <string>

#include "bristle/harness.hpp"

namespace bristle {

/// Fully validated run configuration for the CLI. Parsed from a strict JSON
/// file: unknown keys are rejected, drive frequency is given either in Hz or
/// rad/s (not both), everything else has defaults matching the classic
/// desk-scale system.
struct RunConfig {
    RobotParams robot;
    std::optional<double> poisson_ratio; // accepted for completeness, unused

    DriveSignal drive;
    bool drive_given_in_hz = false;

    IntegratorConfig integrator;

    enum class InitialKind { Equilibrium, FreeAngle, Angle };
    InitialKind initial_kind = InitialKind::Equilibrium;
    double initial_theta = 0.0; // used when initial_kind == Angle

    double sim_duration = 0.0; // s; required by the simulate command
    double sim_window_fraction = 0.5;

    std::optional<SweepSpec> sweep;
    std::vector<double> bound_freqs_hz; // analyze: Eq-bound table frequencies

    std::string out_dir = "out";
    int parallel = 0; // sweep worker threads, 0 = hardware concurrency

    HybridState initial_state() const;
};

/// Parse + validate. Throws std::invalid_argument with a key path on any
/// unknown key, wrong type, or failed invariant.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Serialize the effective configuration (round-trips through parse).
std::string effective_config_text(const RunConfig& cfg);

} // namespace bristle
