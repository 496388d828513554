#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "softcbf/barrier.hpp"
#include "softcbf/geometry.hpp"
#include "softcbf/pcc.hpp"
#include "softcbf/sim.hpp"

namespace softcbf {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct OutputConfig {
    std::string dir = "out";
};

// A full run description parsed from one JSON file. Parsing is strict:
// unknown keys anywhere are rejected with their path.
struct RunConfig {
    RobotParams robot;
    std::vector<std::pair<Vec2, double>> env_rows;   // raw [a, b]·r <= c rows
    DeformationModel model;
    BarrierConfig barrier;
    std::string barrier_label;                       // preset name or "custom"
    SimConfig sim;
    OutputConfig output;
    std::optional<std::vector<double>> sweep_gammas;

    HalfspacePolytope environment() const { return normalize_polytope(env_rows); }
};

RunConfig load_run_config(const std::string& path);

// Command-line overrides applied on top of the parsed file.
struct ConfigOverrides {
    std::optional<std::string> preset;
    std::optional<std::string> out_dir;
    std::optional<std::string> integrator;   // "euler" | "rk4"
    std::optional<double> dt;
    std::optional<double> duration;
};

void apply_overrides(RunConfig& cfg, const ConfigOverrides& overrides);

}  // namespace softcbf
