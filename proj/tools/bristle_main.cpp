#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bristle/analysis.hpp"
#include "bristle/config.hpp"
#include "bristle/csv.hpp"
#include "bristle/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitPartialSweep = 3;

namespace fs = std::filesystem;
using bristle::format_double;
using nlohmann::json;

struct Overrides {
    std::optional<double> freq_hz;
    std::optional<double> amplitude_m;
    std::optional<double> duration_s;
    std::optional<std::string> out_dir;
    std::optional<int> parallel;
};

void add_common(CLI::App* cmd, std::string& config_path, Overrides& ov) {
    cmd->add_option("--config", config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--freq-hz", ov.freq_hz, "override drive/sweep frequency in Hz");
    cmd->add_option("--amplitude-m", ov.amplitude_m, "override drive amplitude in m");
    cmd->add_option("--duration-s", ov.duration_s, "override run duration in s");
    cmd->add_option("--out-dir", ov.out_dir, "output directory");
    cmd->add_option("--parallel", ov.parallel, "sweep worker threads (0 = all cores)");
}

bristle::RunConfig load_with_overrides(const std::string& path, const Overrides& ov) {
    bristle::RunConfig cfg = bristle::load_config(path);
    if (ov.freq_hz) {
        cfg.drive.omega = 2.0 * M_PI * *ov.freq_hz;
        cfg.drive_given_in_hz = true;
    }
    if (ov.amplitude_m) {
        cfg.drive.amplitude = *ov.amplitude_m;
        if (cfg.sweep) cfg.sweep->amplitude = *ov.amplitude_m;
    }
    if (ov.duration_s) {
        cfg.sim_duration = *ov.duration_s;
        if (cfg.sweep) cfg.sweep->duration_per_point = *ov.duration_s;
    }
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.parallel) cfg.parallel = *ov.parallel;
    cfg.drive.validate();
    for (const auto& w : cfg.robot.warnings()) std::cerr << "warning: " << w << "\n";
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

fs::path prepare_out_dir(const bristle::RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_file(dir / "effective_config.json", bristle::effective_config_text(cfg));
    return dir;
}

double hz(double omega) { return omega / (2.0 * M_PI); }

int cmd_analyze(const bristle::RunConfig& cfg) {
    const bristle::EquilibriumSet eq = bristle::equilibria(cfg.robot);
    const bristle::ResonanceSet res = bristle::resonances(cfg.robot);

    std::cout << "equilibria (rad / m):\n"
              << "  theta_bar   = " << format_double(eq.theta_bar)
              << "   y_bar   = " << format_double(eq.y_bar) << "\n"
              << "  theta_bar_p = " << format_double(eq.theta_bar_p)
              << "   y_bar_p = " << format_double(eq.y_bar_p)
              << "   delta_p = " << format_double(eq.delta_p) << "\n"
              << "  theta_bar_n = " << format_double(eq.theta_bar_n)
              << "   y_bar_n = " << format_double(eq.y_bar_n)
              << "   delta_n = " << format_double(eq.delta_n) << "\n";

    auto line = [](const char* name, double w) {
        std::cout << "  " << name << " = " << format_double(w) << " rad/s  ("
                  << format_double(hz(w)) << " Hz)\n";
    };
    std::cout << "resonances:\n";
    line("omega_theta    ", res.omega_theta);
    line("omega_y        ", res.omega_y);
    line("omega_yp       ", res.omega_yp);
    line("omega_yn       ", res.omega_yn);
    line("omega_yp_approx", res.omega_yp_approx);
    line("omega_yn_approx", res.omega_yn_approx);

    std::vector<double> freqs = cfg.bound_freqs_hz;
    if (freqs.empty()) {
        freqs = {hz(res.omega_theta), hz(res.omega_y), hz(res.omega_yp), hz(res.omega_yn)};
        if (cfg.drive.omega > 0.0) freqs.push_back(hz(cfg.drive.omega));
    }
    std::cout << "speed upper bound (f R (1 - cos theta0)):\n";
    json bound_rows = json::array();
    for (double f : freqs) {
        const double b = bristle::speed_upper_bound(cfg.robot, 2.0 * M_PI * f);
        std::cout << "  f = " << format_double(f) << " Hz  ->  " << format_double(b)
                  << " m/s\n";
        bound_rows.push_back({{"freq_hz", f}, {"bound_m_s", b}});
    }

    const fs::path dir = prepare_out_dir(cfg);
    json j;
    j["equilibria"] = {{"theta_bar", eq.theta_bar},     {"theta_bar_p", eq.theta_bar_p},
                       {"theta_bar_n", eq.theta_bar_n}, {"y_bar", eq.y_bar},
                       {"y_bar_p", eq.y_bar_p},         {"y_bar_n", eq.y_bar_n},
                       {"delta_p", eq.delta_p},         {"delta_n", eq.delta_n}};
    j["resonances_rad_s"] = {{"omega_theta", res.omega_theta},
                             {"omega_y", res.omega_y},
                             {"omega_yp", res.omega_yp},
                             {"omega_yn", res.omega_yn},
                             {"omega_yp_approx", res.omega_yp_approx},
                             {"omega_yn_approx", res.omega_yn_approx}};
    j["resonances_hz"] = {{"f_theta", hz(res.omega_theta)},
                          {"f_y", hz(res.omega_y)},
                          {"f_yp", hz(res.omega_yp)},
                          {"f_yn", hz(res.omega_yn)}};
    j["speed_bound"] = bound_rows;
    write_file(dir / "analysis.json", j.dump(2) + "\n");
    return kExitOk;
}

json occupancy_json(const bristle::RegimeOccupancy& occ) {
    return {{"stick", occ.stick},
            {"slip_fwd", occ.slip_forward},
            {"slip_bwd", occ.slip_backward}};
}

int cmd_simulate(const bristle::RunConfig& cfg) {
    if (!(cfg.sim_duration > 0.0))
        throw std::invalid_argument("simulate requires simulate.duration_s > 0");

    const fs::path dir = prepare_out_dir(cfg);
    const bristle::HybridState initial = cfg.initial_state();
    const bristle::Trajectory traj =
        bristle::simulate(initial, cfg.robot, cfg.drive, cfg.integrator, cfg.sim_duration);

    {
        std::ofstream out(dir / "trajectory.csv", std::ios::binary);
        bristle::write_trajectory_csv(out, traj, cfg.robot);
        std::ofstream ev(dir / "events.csv", std::ios::binary);
        bristle::write_events_csv(ev, traj.events);
    }

    json j;
    j["drive_freq_hz"] = hz(cfg.drive.omega);
    j["drive_omega_rad_s"] = cfg.drive.omega;
    j["jumped"] = traj.jumped;
    j["n_events"] = traj.events.size();
    j["max_overshoot_m"] = traj.max_overshoot;
    if (!traj.events.empty()) j["first_event_t_s"] = traj.events.front().t;
    if (traj.samples.size() >= 2) {
        const double net =
            traj.samples.back().state.x - traj.samples.front().state.x;
        j["net_displacement_m"] = net;
        j["avg_speed_m_s"] = bristle::average_speed(traj, cfg.sim_window_fraction);
        j["measure_window_fraction"] = cfg.sim_window_fraction;
        j["occupancy"] = occupancy_json(
            bristle::regime_occupancy(traj, cfg.sim_window_fraction));
    }
    if (traj.failed()) j["error"] = traj.error;
    write_file(dir / "summary.json", j.dump(2) + "\n");

    std::cout << "simulate: " << (traj.failed() ? "FAILED: " + traj.error : "ok")
              << "\n  events = " << traj.events.size() << ", jumped = " << traj.jumped
              << "\n";
    if (j.contains("net_displacement_m"))
        std::cout << "  net displacement = " << format_double(j["net_displacement_m"])
                  << " m, avg speed = " << format_double(j["avg_speed_m_s"]) << " m/s\n";
    std::cout << "  outputs in " << dir.string() << "\n";
    return traj.failed() ? kExitNumerical : kExitOk;
}

int cmd_sweep(const bristle::RunConfig& cfg) {
    if (!cfg.sweep) throw std::invalid_argument("sweep requires a sweep block in the config");

    const fs::path dir = prepare_out_dir(cfg);
    const bristle::SweepResult result =
        bristle::frequency_sweep(cfg.robot, *cfg.sweep, cfg.integrator, cfg.parallel);
    {
        std::ofstream out(dir / "sweep.csv", std::ios::binary);
        bristle::write_sweep_csv(out, result);
    }

    const bristle::BoundCheck bc = bristle::bound_check(result);
    json j;
    j["n_points"] = result.points.size();
    j["failed_points"] = result.failed_points;
    j["bound_check"] = {{"all_within", bc.all_within},
                        {"checked", bc.checked},
                        {"violations", bc.violations},
                        {"min_margin_m_s", bc.min_margin},
                        {"worst_ratio", bc.worst_ratio}};
    auto peak_json = [&](const std::optional<bristle::SweepPoint>& pk) -> json {
        if (!pk) return nullptr;
        return {{"freq_hz", pk->freq_hz},
                {"omega_rad_s", pk->omega},
                {"avg_speed_m_s", pk->avg_speed},
                {"occupancy", occupancy_json(pk->occupancy)}};
    };
    j["forward_peak"] = peak_json(result.forward_peak);
    j["backward_peak"] = peak_json(result.backward_peak);
    write_file(dir / "summary.json", j.dump(2) + "\n");

    std::cout << "sweep: " << result.points.size() << " points, "
              << result.failed_points << " failed\n";
    if (result.forward_peak)
        std::cout << "  forward peak  " << format_double(result.forward_peak->freq_hz)
                  << " Hz at " << format_double(result.forward_peak->avg_speed)
                  << " m/s\n";
    if (result.backward_peak)
        std::cout << "  backward peak " << format_double(result.backward_peak->freq_hz)
                  << " Hz at " << format_double(result.backward_peak->avg_speed)
                  << " m/s\n";
    std::cout << "  outputs in " << dir.string() << "\n";

    const double failed = static_cast<double>(result.failed_points);
    if (failed > 0.1 * static_cast<double>(result.points.size())) return kExitPartialSweep;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vertically driven bristle-bot simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    CLI::App* analyze = app.add_subcommand("analyze", "closed-form equilibria, resonances and speed bounds");
    CLI::App* simulate = app.add_subcommand("simulate", "run one trajectory, emit CSV + summary");
    CLI::App* sweep = app.add_subcommand("sweep", "frequency sweep, emit CSV + summary");
    for (CLI::App* cmd : {analyze, simulate, sweep}) add_common(cmd, config_path, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        const bristle::RunConfig cfg = load_with_overrides(config_path, ov);
        if (analyze->parsed()) return cmd_analyze(cfg);
        if (simulate->parsed()) return cmd_simulate(cfg);
        return cmd_sweep(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
