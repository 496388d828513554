#include "softcbf/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace softcbf {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(path + ": unknown key '" + item.key() + "'");
        }
    }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
    return obj.at(key);
}

double require_number(const json& obj, const std::string& path, const std::string& key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

int require_int(const json& obj, const std::string& path, const std::string& key) {
    const json& v = require(obj, path, key);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

std::string require_string(const json& obj, const std::string& path, const std::string& key) {
    const json& v = require(obj, path, key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

Eigen::VectorXd require_vector(const json& obj, const std::string& path, const std::string& key,
                               int expected_size) {
    const json& v = require(obj, path, key);
    if (!v.is_array()) throw ConfigError(path + "." + key + ": expected an array of numbers");
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            throw ConfigError(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
        }
        out[static_cast<int>(i)] = v[i].get<double>();
    }
    if (expected_size >= 0 && out.size() != expected_size) {
        throw ConfigError(path + "." + key + ": expected " + std::to_string(expected_size) +
                          " entries, got " + std::to_string(out.size()));
    }
    return out;
}

RobotParams parse_robot(const json& obj) {
    reject_unknown_keys(obj, "robot",
                        {"n_seg", "lengths", "seg_mass", "k_diag", "d_diag", "lambda_diag"});
    RobotParams p;
    p.n_seg = require_int(obj, "robot", "n_seg");
    if (p.n_seg < 1) throw ConfigError("robot.n_seg: must be >= 1");
    p.lengths = require_vector(obj, "robot", "lengths", p.n_seg);
    p.seg_mass = require_number(obj, "robot", "seg_mass");
    p.k_diag = require_vector(obj, "robot", "k_diag", p.n_seg);
    p.d_diag = require_vector(obj, "robot", "d_diag", p.n_seg);
    p.lambda_diag = require_vector(obj, "robot", "lambda_diag", p.n_seg);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("robot: ") + e.what());
    }
    return p;
}

void parse_environment(const json& obj, RunConfig& cfg) {
    reject_unknown_keys(obj, "environment", {"rows", "k", "f_max"});
    const json& rows = require(obj, "environment", "rows");
    if (!rows.is_array() || rows.empty()) {
        throw ConfigError("environment.rows: expected a nonempty array of [a, b, c] rows");
    }
    for (size_t i = 0; i < rows.size(); ++i) {
        const json& row = rows[i];
        const std::string path = "environment.rows[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != 3 || !row[0].is_number() || !row[1].is_number() ||
            !row[2].is_number()) {
            throw ConfigError(path + ": expected [a, b, c] meaning a*x + b*y <= c");
        }
        cfg.env_rows.emplace_back(Vec2(row[0].get<double>(), row[1].get<double>()),
                                  row[2].get<double>());
    }
    cfg.model.stiffness = require_number(obj, "environment", "k");
    cfg.model.force_limit = require_number(obj, "environment", "f_max");
    if (!(cfg.model.stiffness > 0.0)) throw ConfigError("environment.k: must be > 0");
    if (!(cfg.model.force_limit > 0.0)) throw ConfigError("environment.f_max: must be > 0");
}

void parse_barrier(const json& obj, RunConfig& cfg) {
    if (obj.contains("preset")) {
        reject_unknown_keys(obj, "barrier", {"preset"});
        const std::string name = require_string(obj, "barrier", "preset");
        try {
            cfg.barrier = BarrierConfig::preset(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("barrier.preset: ") + e.what());
        }
        cfg.barrier_label = name;
        return;
    }
    reject_unknown_keys(obj, "barrier", {"a_e", "b_e", "gamma"});
    cfg.barrier.active = true;
    cfg.barrier.a_e = require_number(obj, "barrier", "a_e");
    cfg.barrier.b_e = require_number(obj, "barrier", "b_e");
    const json& gamma = require(obj, "barrier", "gamma");
    if (gamma.is_number()) {
        cfg.barrier.gamma = Eigen::VectorXd::Constant(1, gamma.get<double>());
    } else if (gamma.is_array()) {
        cfg.barrier.gamma = require_vector(obj, "barrier", "gamma", -1);
    } else {
        throw ConfigError("barrier.gamma: expected a number or an array of numbers");
    }
    cfg.barrier_label = "custom";
    try {
        cfg.barrier.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("barrier: ") + e.what());
    }
}

IntegratorKind parse_integrator(const std::string& name, const std::string& path) {
    if (name == "euler") return IntegratorKind::Euler;
    if (name == "rk4") return IntegratorKind::Rk4;
    throw ConfigError(path + ": expected 'euler' or 'rk4', got '" + name + "'");
}

void parse_sim(const json& obj, RunConfig& cfg) {
    reject_unknown_keys(obj, "sim",
                        {"dt", "control_hz", "duration", "integrator", "amplitudes", "frequency",
                         "initial_q", "initial_qd", "seed"});
    SimConfig& sim = cfg.sim;
    const int n = cfg.robot.n_seg;
    sim.dt = require_number(obj, "sim", "dt");
    sim.control_hz = require_number(obj, "sim", "control_hz");
    sim.duration = require_number(obj, "sim", "duration");
    sim.integrator = parse_integrator(require_string(obj, "sim", "integrator"), "sim.integrator");
    const json& amp = require(obj, "sim", "amplitudes");
    if (amp.is_number()) {
        sim.nominal.amplitudes = Eigen::VectorXd::Constant(n, amp.get<double>());
    } else {
        sim.nominal.amplitudes = require_vector(obj, "sim", "amplitudes", n);
    }
    sim.nominal.frequency = require_number(obj, "sim", "frequency");
    sim.initial_state.q =
        obj.contains("initial_q") ? require_vector(obj, "sim", "initial_q", n)
                                  : Eigen::VectorXd::Zero(n);
    sim.initial_state.qd =
        obj.contains("initial_qd") ? require_vector(obj, "sim", "initial_qd", n)
                                   : Eigen::VectorXd::Zero(n);
    sim.seed = obj.contains("seed")
                   ? static_cast<std::uint64_t>(require_int(obj, "sim", "seed"))
                   : 0;
    try {
        sim.validate(n);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sim: ") + e.what());
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");

    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(root, "config",
                        {"robot", "environment", "barrier", "sim", "output", "sweep"});

    RunConfig cfg;
    cfg.robot = parse_robot(require(root, "config", "robot"));
    parse_environment(require(root, "config", "environment"), cfg);
    parse_barrier(require(root, "config", "barrier"), cfg);
    parse_sim(require(root, "config", "sim"), cfg);

    if (root.contains("output")) {
        const json& out = root.at("output");
        reject_unknown_keys(out, "output", {"dir"});
        if (out.contains("dir")) cfg.output.dir = require_string(out, "output", "dir");
    }
    if (root.contains("sweep")) {
        const json& sweep = root.at("sweep");
        reject_unknown_keys(sweep, "sweep", {"gammas"});
        const Eigen::VectorXd gammas = require_vector(sweep, "sweep", "gammas", -1);
        cfg.sweep_gammas = std::vector<double>(gammas.data(), gammas.data() + gammas.size());
        if (cfg.sweep_gammas->empty()) throw ConfigError("sweep.gammas: must be nonempty");
    }

    // Reject configs whose environment geometry is unusable right away so the
    // error carries the config path.
    try {
        cfg.environment();
    } catch (const GeometryError& e) {
        throw ConfigError("environment.rows: " + std::string(e.what()));
    }
    return cfg;
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& overrides) {
    if (overrides.preset) {
        cfg.barrier = BarrierConfig::preset(*overrides.preset);
        cfg.barrier_label = *overrides.preset;
    }
    if (overrides.out_dir) cfg.output.dir = *overrides.out_dir;
    if (overrides.integrator) {
        cfg.sim.integrator = parse_integrator(*overrides.integrator, "--integrator");
    }
    if (overrides.dt) cfg.sim.dt = *overrides.dt;
    if (overrides.duration) cfg.sim.duration = *overrides.duration;
    try {
        cfg.sim.validate(cfg.robot.n_seg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("overrides: ") + e.what());
    }
}

}  // namespace softcbf
