// Command-line front end: single filtered runs, tuning sweeps, and safe-set
// export for external plotting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softcbf/config.hpp"
#include "softcbf/io.hpp"
#include "softcbf/sim.hpp"

namespace {

namespace fs = std::filesystem;
using namespace softcbf;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;        // config/geometry/IO problems
constexpr int kExitViolation = 2;    // run completed with rho_min < 0
constexpr int kExitAborted = 3;      // infeasible QP, blow-up, bad start state

struct RunOutcome {
    bool completed = false;
    RunReport report;
    std::string error;
};

RunOutcome execute(const RunConfig& cfg, const BarrierConfig& barrier,
                   const std::string& label, bool write_files) {
    RunOutcome outcome;
    try {
        const Trajectory traj =
            run(cfg.robot, cfg.environment(), cfg.model, barrier, cfg.sim);
        outcome.completed = true;
        outcome.report = summarize(traj);
        if (write_files) {
            fs::create_directories(cfg.output.dir);
            const fs::path csv_path = fs::path(cfg.output.dir) / ("trajectory_" + label + ".csv");
            std::ofstream csv(csv_path);
            if (!csv) throw ConfigError("cannot write '" + csv_path.string() + "'");
            write_trajectory_csv(csv, traj, cfg.robot.n_seg);
        }
    } catch (const QpInfeasibleError& e) {
        outcome.error = e.what();
    } catch (const NonFiniteError& e) {
        outcome.error = e.what();
    } catch (const StartOutsideSafeSetError& e) {
        outcome.error = e.what();
    } catch (const NotInSafeSetError& e) {
        outcome.error = e.what();
    }
    return outcome;
}

int cmd_run(const RunConfig& cfg) {
    const RunOutcome outcome = execute(cfg, cfg.barrier, cfg.barrier_label, true);
    if (!outcome.completed) {
        std::cerr << "run aborted: " << outcome.error << "\n";
        return kExitAborted;
    }

    const int code = outcome.report.rho_min < 0.0 ? kExitViolation : kExitOk;
    std::cout << "preset=" << cfg.barrier_label << " rho_min=" << outcome.report.rho_min
              << " status=" << (code == kExitOk ? "safe" : "violation") << "\n";

    fs::create_directories(cfg.output.dir);
    const fs::path summary_path =
        fs::path(cfg.output.dir) / ("summary_" + cfg.barrier_label + ".json");
    std::ofstream summary(summary_path);
    summary << run_summary(cfg.barrier_label, outcome.report, code).dump(2) << "\n";
    return code;
}

int cmd_sweep(const RunConfig& cfg, bool parallel) {
    struct Entry {
        std::string label;
        BarrierConfig barrier;
    };
    std::vector<Entry> entries;
    if (cfg.sweep_gammas) {
        if (cfg.barrier_label == "none" || !cfg.barrier.active) {
            std::cerr << "sweep.gammas requires an explicit barrier {a_e, b_e, gamma} section\n";
            return kExitUsage;
        }
        for (double gamma : *cfg.sweep_gammas) {
            BarrierConfig bc = cfg.barrier;
            bc.gamma = Eigen::VectorXd::Constant(1, gamma);
            entries.push_back({"gamma_" + std::to_string(gamma), bc});
        }
    } else {
        for (const char* name : {"none", "low", "high"}) {
            entries.push_back({name, BarrierConfig::preset(name)});
        }
    }

    std::vector<RunOutcome> outcomes(entries.size());
    if (parallel) {
        std::vector<std::future<RunOutcome>> futures;
        futures.reserve(entries.size());
        for (const Entry& e : entries) {
            futures.push_back(std::async(std::launch::async, [&cfg, &e]() {
                return execute(cfg, e.barrier, e.label, true);
            }));
        }
        for (size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < entries.size(); ++i) {
            outcomes[i] = execute(cfg, entries[i].barrier, entries[i].label, true);
        }
    }

    std::printf("%-16s %8s %8s %8s %12s\n", "preset", "a_e", "b_e", "gamma", "rho_min");
    bool any_aborted = false;
    for (size_t i = 0; i < entries.size(); ++i) {
        const BarrierConfig& bc = entries[i].barrier;
        const double gamma = bc.active ? bc.gamma[0] : 0.0;
        if (outcomes[i].completed) {
            std::printf("%-16s %8.3g %8.3g %8.3g %12.6g\n", entries[i].label.c_str(),
                        bc.active ? bc.a_e : 0.0, bc.active ? bc.b_e : 0.0, gamma,
                        outcomes[i].report.rho_min);
        } else {
            any_aborted = true;
            std::printf("%-16s %8.3g %8.3g %8.3g %12s\n", entries[i].label.c_str(),
                        bc.active ? bc.a_e : 0.0, bc.active ? bc.b_e : 0.0, gamma, "aborted");
            std::cerr << entries[i].label << ": " << outcomes[i].error << "\n";
        }
    }
    return any_aborted ? kExitAborted : kExitOk;
}

int cmd_safeset(const RunConfig& cfg, const std::string& out_file) {
    const HalfspacePolytope env = cfg.environment();
    const SafeSet safe_set = expand_safe_set(env, cfg.model);
    const nlohmann::json report = safe_set_report(env, safe_set);
    if (out_file.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        fs::create_directories(fs::path(out_file).parent_path().empty()
                                   ? fs::path(".")
                                   : fs::path(out_file).parent_path());
        std::ofstream out(out_file);
        if (!out) {
            std::cerr << "cannot write '" << out_file << "'\n";
            return kExitUsage;
        }
        out << report.dump(2) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Force-safe soft manipulator simulation"};
    app.require_subcommand(1);

    std::string config_path;
    ConfigOverrides overrides;
    std::string preset, out_dir, integrator, safeset_out;
    double dt = 0.0, duration = 0.0;
    bool parallel = false;

    auto add_common = [&](CLI::App* cmd, bool with_sim_flags) {
        cmd->add_option("--config", config_path, "run configuration file (JSON)")->required();
        if (with_sim_flags) {
            cmd->add_option("--preset", preset, "barrier preset: none|low|high");
            cmd->add_option("--out", out_dir, "output directory");
            cmd->add_option("--integrator", integrator, "euler|rk4");
            cmd->add_option("--dt", dt, "integration step, s");
            cmd->add_option("--duration", duration, "simulated horizon, s");
        }
    };

    CLI::App* run_cmd = app.add_subcommand("run", "single closed-loop run");
    add_common(run_cmd, true);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run every preset (or a gamma list)");
    add_common(sweep_cmd, true);
    sweep_cmd->add_flag("--parallel", parallel, "run sweep entries concurrently");

    CLI::App* safeset_cmd = app.add_subcommand("safeset", "export no-contact and force-safe sets");
    add_common(safeset_cmd, false);
    safeset_cmd->add_option("--out", safeset_out, "output file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_run_config(config_path);
        if (!preset.empty()) overrides.preset = preset;
        if (!out_dir.empty()) overrides.out_dir = out_dir;
        if (!integrator.empty()) overrides.integrator = integrator;
        if (run_cmd->count("--dt") || sweep_cmd->count("--dt")) overrides.dt = dt;
        if (run_cmd->count("--duration") || sweep_cmd->count("--duration")) {
            overrides.duration = duration;
        }
        apply_overrides(cfg, overrides);

        if (run_cmd->parsed()) return cmd_run(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, parallel);
        return cmd_safeset(cfg, safeset_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
