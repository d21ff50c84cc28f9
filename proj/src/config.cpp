#include "bristle/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bristle {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

// Strict object view: every key must be consumed, leftovers are errors.
class Object {
public:
    Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        return number(key);
    }
    double number(const char* key) {
        mark(key);
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(path_ + "." + key, "expected a number");
        return v.get<double>();
    }
    int integer(const char* key, int fallback) {
        if (!has(key)) return fallback;
        mark(key);
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) fail(path_ + "." + key, "expected an integer");
        return v.get<int>();
    }
    std::string text(const char* key, const std::string& fallback) {
        if (!has(key)) return fallback;
        mark(key);
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(path_ + "." + key, "expected a string");
        return v.get<std::string>();
    }
    std::vector<double> number_list(const char* key) {
        std::vector<double> out;
        if (!has(key)) return out;
        mark(key);
        const auto& v = j_.at(key);
        if (!v.is_array()) fail(path_ + "." + key, "expected an array of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) fail(path_ + "." + key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    const json* child(const char* key) {
        if (!has(key)) return nullptr;
        mark(key);
        return &j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                fail(path_.empty() ? it.key() : path_ + "." + it.key(), "unknown key");
    }

private:
    void mark(const char* key) { used_.insert(key); }
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

} // namespace

HybridState RunConfig::initial_state() const {
    switch (initial_kind) {
        case InitialKind::Equilibrium: return equilibrium_rest_state(robot);
        case InitialKind::FreeAngle: return rest_state(robot, robot.theta0, 0.0);
        case InitialKind::Angle: return rest_state(robot, initial_theta, 0.0);
    }
    throw std::logic_error("unreachable");
}

RunConfig parse_config_text(const std::string& text) {
    json root_json;
    try {
        root_json = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    RunConfig cfg;
    Object root(root_json, "");

    if (const json* jr = root.child("robot")) {
        Object robot(*jr, "robot");
        cfg.robot.mass = robot.number("mass_kg", cfg.robot.mass);
        cfg.robot.gravity = robot.number("gravity_m_s2", cfg.robot.gravity);
        cfg.robot.leg_length = robot.number("leg_length_m", cfg.robot.leg_length);
        cfg.robot.kappa = robot.number("kappa_Nm_per_rad", cfg.robot.kappa);
        cfg.robot.mu_s = robot.number("mu_s", cfg.robot.mu_s);
        cfg.robot.mu_k = robot.number("mu_k", cfg.robot.mu_k);
        cfg.robot.theta0 = robot.number("theta0_rad", cfg.robot.theta0);
        cfg.robot.zeta = robot.number("zeta_Nms_per_rad", cfg.robot.zeta);
        if (robot.has("poisson_ratio")) cfg.poisson_ratio = robot.number("poisson_ratio");
        robot.finish();
    }
    cfg.robot.validate();

    if (const json* jd = root.child("drive")) {
        Object drive(*jd, "drive");
        cfg.drive.amplitude = drive.number("amplitude_m", 0.0);
        const bool has_hz = drive.has("freq_hz");
        const bool has_omega = drive.has("omega_rad_s");
        if (has_hz && has_omega)
            fail("drive", "give either freq_hz or omega_rad_s, not both");
        if (has_hz) {
            cfg.drive.omega = 2.0 * M_PI * drive.number("freq_hz");
            cfg.drive_given_in_hz = true;
        } else if (has_omega) {
            cfg.drive.omega = drive.number("omega_rad_s");
        }
        cfg.drive.phase = drive.number("phase_rad", 0.0);
        drive.finish();
    }
    cfg.drive.validate();

    if (const json* ji = root.child("integrator")) {
        Object integ(*ji, "integrator");
        auto& ic = cfg.integrator;
        ic.rel_tol = integ.number("rel_tol", ic.rel_tol);
        ic.abs_tol = integ.number("abs_tol", ic.abs_tol);
        ic.max_step = integ.number("max_step_s", ic.max_step);
        ic.event_tol = integ.number("event_tol_s", ic.event_tol);
        ic.epsilon_v = integ.number("epsilon_v_m_s", ic.epsilon_v);
        ic.max_events_per_period =
            integ.integer("max_events_per_period", ic.max_events_per_period);
        ic.samples_per_period = integ.number("samples_per_period", ic.samples_per_period);
        ic.max_samples = static_cast<std::size_t>(
            integ.integer("max_samples", static_cast<int>(ic.max_samples)));
        integ.finish();
    }
    cfg.integrator.validate();

    if (const json* jin = root.child("initial")) {
        Object init(*jin, "initial");
        const std::string kind = init.text("type", "equilibrium");
        if (kind == "equilibrium") {
            cfg.initial_kind = RunConfig::InitialKind::Equilibrium;
        } else if (kind == "free_angle") {
            cfg.initial_kind = RunConfig::InitialKind::FreeAngle;
        } else if (kind == "angle") {
            cfg.initial_kind = RunConfig::InitialKind::Angle;
            cfg.initial_theta = init.number("theta_rad");
            if (!(cfg.initial_theta > 0.0 && cfg.initial_theta < M_PI / 2))
                fail("initial.theta_rad", "must lie in (0, pi/2)");
        } else {
            fail("initial.type", "expected equilibrium | free_angle | angle");
        }
        init.finish();
    }

    if (const json* js = root.child("simulate")) {
        Object sim(*js, "simulate");
        cfg.sim_duration = sim.number("duration_s", 0.0);
        if (!(cfg.sim_duration >= 0.0)) fail("simulate.duration_s", "must be >= 0");
        cfg.sim_window_fraction = sim.number("measure_window_fraction", 0.5);
        if (!(cfg.sim_window_fraction > 0.0 && cfg.sim_window_fraction <= 1.0))
            fail("simulate.measure_window_fraction", "must lie in (0, 1]");
        sim.finish();
    }

    if (const json* jw = root.child("sweep")) {
        Object sw(*jw, "sweep");
        SweepSpec spec;
        spec.freq_start_hz = sw.number("freq_start_hz");
        spec.freq_stop_hz = sw.number("freq_stop_hz");
        spec.freq_step_hz = sw.number("freq_step_hz");
        spec.amplitude = sw.number("amplitude_m");
        spec.duration_per_point = sw.number("duration_per_point_s");
        spec.measure_window_fraction = sw.number("measure_window_fraction", 0.5);
        spec.phase = sw.number("phase_rad", 0.0);
        sw.finish();
        spec.validate();
        cfg.sweep = spec;
    }

    if (const json* ja = root.child("analyze")) {
        Object an(*ja, "analyze");
        cfg.bound_freqs_hz = an.number_list("bound_freq_hz");
        an.finish();
    }

    if (const json* jo = root.child("output")) {
        Object out(*jo, "output");
        cfg.out_dir = out.text("dir", cfg.out_dir);
        out.finish();
    }

    cfg.parallel = root.integer("parallel", 0);
    root.finish();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string effective_config_text(const RunConfig& cfg) {
    json j;
    j["robot"] = {{"mass_kg", cfg.robot.mass},
                  {"gravity_m_s2", cfg.robot.gravity},
                  {"leg_length_m", cfg.robot.leg_length},
                  {"kappa_Nm_per_rad", cfg.robot.kappa},
                  {"mu_s", cfg.robot.mu_s},
                  {"mu_k", cfg.robot.mu_k},
                  {"theta0_rad", cfg.robot.theta0},
                  {"zeta_Nms_per_rad", cfg.robot.zeta}};
    if (cfg.poisson_ratio) j["robot"]["poisson_ratio"] = *cfg.poisson_ratio;

    j["drive"] = {{"amplitude_m", cfg.drive.amplitude},
                  {"omega_rad_s", cfg.drive.omega},
                  {"phase_rad", cfg.drive.phase}};

    j["integrator"] = {{"rel_tol", cfg.integrator.rel_tol},
                       {"abs_tol", cfg.integrator.abs_tol},
                       {"max_step_s", cfg.integrator.max_step},
                       {"event_tol_s", cfg.integrator.event_tol},
                       {"epsilon_v_m_s", cfg.integrator.epsilon_v},
                       {"max_events_per_period", cfg.integrator.max_events_per_period},
                       {"samples_per_period", cfg.integrator.samples_per_period},
                       {"max_samples", static_cast<int>(cfg.integrator.max_samples)}};

    switch (cfg.initial_kind) {
        case RunConfig::InitialKind::Equilibrium:
            j["initial"] = {{"type", "equilibrium"}};
            break;
        case RunConfig::InitialKind::FreeAngle:
            j["initial"] = {{"type", "free_angle"}};
            break;
        case RunConfig::InitialKind::Angle:
            j["initial"] = {{"type", "angle"}, {"theta_rad", cfg.initial_theta}};
            break;
    }

    j["simulate"] = {{"duration_s", cfg.sim_duration},
                     {"measure_window_fraction", cfg.sim_window_fraction}};

    if (cfg.sweep) {
        j["sweep"] = {{"freq_start_hz", cfg.sweep->freq_start_hz},
                      {"freq_stop_hz", cfg.sweep->freq_stop_hz},
                      {"freq_step_hz", cfg.sweep->freq_step_hz},
                      {"amplitude_m", cfg.sweep->amplitude},
                      {"duration_per_point_s", cfg.sweep->duration_per_point},
                      {"measure_window_fraction", cfg.sweep->measure_window_fraction},
                      {"phase_rad", cfg.sweep->phase}};
    }
    if (!cfg.bound_freqs_hz.empty()) j["analyze"] = {{"bound_freq_hz", cfg.bound_freqs_hz}};
    j["output"] = {{"dir", cfg.out_dir}};
    j["parallel"] = cfg.parallel;
    return j.dump(2) + "\n";
}

} // namespace bristle
