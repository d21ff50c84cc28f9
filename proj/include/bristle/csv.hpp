#pragma once

#include <ostream>
#include <string>

#include "bristle/harness.hpp"

namespace bristle {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

/// Columns: t,x,y,vx,vy,theta,xl,xl_dot,normal_force,regime
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const RobotParams& p);

/// Columns: t,guard,from,to
void write_events_csv(std::ostream& os, const std::vector<TransitionEvent>& events);

/// Columns: freq_hz,omega_rad_s,avg_speed,bound,stick_frac,fwd_frac,bwd_frac,jumped,status
void write_sweep_csv(std::ostream& os, const SweepResult& result);

} // namespace bristle
