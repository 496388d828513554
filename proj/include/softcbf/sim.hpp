#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "softcbf/barrier.hpp"
#include "softcbf/geometry.hpp"
#include "softcbf/pcc.hpp"
#include "softcbf/qp.hpp"

namespace softcbf {

class StartOutsideSafeSetError : public std::runtime_error {
public:
    explicit StartOutsideSafeSetError(const std::string& what) : std::runtime_error(what) {}
};

class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// The safety guarantee is lost when the QP becomes infeasible; the run is
// aborted and the event surfaced instead of silently applying u_nom.
class QpInfeasibleError : public std::runtime_error {
public:
    QpInfeasibleError(double t, const std::string& what)
        : std::runtime_error(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

enum class IntegratorKind { Euler, Rk4 };

// Per-channel open-loop sinusoid u_j = A_j sin(2 pi f t).
struct NominalSinusoid {
    Eigen::VectorXd amplitudes;   // hPa
    double frequency = 0.0;       // Hz
};

struct SimConfig {
    double dt = 1e-4;             // integration step, s
    double control_hz = 1000.0;   // zero-order-hold command rate
    double duration = 100.0;      // s
    IntegratorKind integrator = IntegratorKind::Rk4;
    NominalSinusoid nominal;
    RobotState initial_state;
    std::uint64_t seed = 0;       // consumed by randomized test harnesses only

    // Integration steps per control period; throws unless the control period
    // is a whole number of steps.
    int substeps_per_tick() const;
    void validate(int n_seg) const;
};

enum class TickStatus { Optimal, Bypassed };

struct TrajectoryRow {
    double t = 0.0;
    Eigen::VectorXd q, qd;
    Vec2 r = Vec2::Zero();
    Eigen::VectorXd u_nom, u;
    std::vector<double> b;            // per safe-set row clearance
    double n = 0.0;                   // worst-row deflection, m
    double force = 0.0;               // N
    double rho = 0.0;                 // safety margin
    TickStatus qp_status = TickStatus::Bypassed;
    std::vector<int> dropped_rows;
};

struct Trajectory {
    std::vector<TrajectoryRow> rows;   // logged at control rate
    double qp_time_total_s = 0.0;
    std::size_t qp_solve_count = 0;
};

Eigen::VectorXd nominal_control(const SimConfig& cfg, double t);

// One fixed-step integration step with the command held constant.
RobotState step(const RobotParams& params, const RobotState& state, const Eigen::VectorXd& u,
                double dt, IntegratorKind integrator);

// Closed-loop run: at every control tick the nominal command is filtered
// through the barrier QP (or passed through when the barrier is disabled),
// held for the control period, and the state integrated in substeps.
Trajectory run(const RobotParams& params, const HalfspacePolytope& env,
               const DeformationModel& model, const BarrierConfig& barrier_cfg,
               const SimConfig& sim_cfg);

struct RunReport {
    double rho_min = 0.0;
    std::optional<double> t_violation;   // first tick with rho < 0
    double mean_qp_us = 0.0;
    double max_filter_delta = 0.0;       // max |u* - u_nom| over channels and ticks
};

RunReport summarize(const Trajectory& traj);

}  // namespace softcbf
