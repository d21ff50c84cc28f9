#include "bristle/csv.hpp"

#include <charconv>

namespace bristle {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

// Minimal CSV quoting, needed only for free-text status fields.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const RobotParams& p) {
    os << "t,x,y,vx,vy,theta,xl,xl_dot,normal_force,regime\n";
    for (const auto& s : traj.samples) {
        const double xl_dot =
            s.state.regime == Regime::Stick ? 0.0 : s.state.tip_velocity(p);
        os << format_double(s.state.t) << ',' << format_double(s.state.x) << ','
           << format_double(s.state.y) << ',' << format_double(s.state.vx) << ','
           << format_double(s.state.vy) << ',' << format_double(s.state.theta(p)) << ','
           << format_double(s.state.x_l) << ',' << format_double(xl_dot) << ','
           << format_double(s.normal_force) << ',' << regime_name(s.state.regime) << '\n';
    }
}

void write_events_csv(std::ostream& os, const std::vector<TransitionEvent>& events) {
    os << "t,guard,from,to\n";
    for (const auto& ev : events)
        os << format_double(ev.t) << ',' << guard_name(ev.guard) << ','
           << regime_name(ev.from) << ',' << regime_name(ev.to) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "freq_hz,omega_rad_s,avg_speed,bound,stick_frac,fwd_frac,bwd_frac,jumped,status\n";
    for (const auto& pt : result.points)
        os << format_double(pt.freq_hz) << ',' << format_double(pt.omega) << ','
           << format_double(pt.avg_speed) << ',' << format_double(pt.bound) << ','
           << format_double(pt.occupancy.stick) << ','
           << format_double(pt.occupancy.slip_forward) << ','
           << format_double(pt.occupancy.slip_backward) << ',' << (pt.jumped ? 1 : 0)
           << ',' << csv_field(pt.status) << '\n';
}

} // namespace bristle
