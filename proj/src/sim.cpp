#include "softcbf/sim.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace softcbf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kAngleSanityBound = kTwoPi;   // |q_i| beyond this means blow-up

bool state_sane(const RobotState& s) {
    if (!s.q.allFinite() || !s.qd.allFinite()) return false;
    return s.q.cwiseAbs().maxCoeff() < kAngleSanityBound;
}

}  // namespace

int SimConfig::substeps_per_tick() const {
    const double ratio = 1.0 / (control_hz * dt);
    const long long rounded = std::llround(ratio);
    if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) > 1e-9 * ratio) {
        throw std::invalid_argument(
            "control period must be a whole number of integration steps");
    }
    return static_cast<int>(rounded);
}

void SimConfig::validate(int n_seg) const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(control_hz > 0.0)) throw std::invalid_argument("control_hz must be positive");
    if (control_hz * dt > 1.0 + 1e-12) {
        throw std::invalid_argument("dt must not exceed the control period");
    }
    substeps_per_tick();
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    const double ticks = duration * control_hz;
    if (std::abs(ticks - std::llround(ticks)) > 1e-6) {
        throw std::invalid_argument("duration must be a whole number of control periods");
    }
    if (nominal.amplitudes.size() != n_seg) {
        throw std::invalid_argument("nominal amplitudes must have one entry per segment");
    }
    if (!(nominal.frequency >= 0.0)) throw std::invalid_argument("frequency must be >= 0");
    if (initial_state.q.size() != n_seg || initial_state.qd.size() != n_seg) {
        throw std::invalid_argument("initial state must have n_seg entries");
    }
}

Eigen::VectorXd nominal_control(const SimConfig& cfg, double t) {
    return cfg.nominal.amplitudes * std::sin(kTwoPi * cfg.nominal.frequency * t);
}

RobotState step(const RobotParams& params, const RobotState& state, const Eigen::VectorXd& u,
                double dt, IntegratorKind integrator) {
    const int n = params.n_seg;
    auto deriv = [&](const RobotState& s) { return control_affine(params, s, u); };
    auto advance = [&](const RobotState& s, const Eigen::VectorXd& xdot, double h) {
        return RobotState{s.q + h * xdot.head(n), s.qd + h * xdot.tail(n)};
    };

    RobotState next;
    if (integrator == IntegratorKind::Euler) {
        next = advance(state, deriv(state), dt);
    } else {
        const Eigen::VectorXd k1 = deriv(state);
        const Eigen::VectorXd k2 = deriv(advance(state, k1, 0.5 * dt));
        const Eigen::VectorXd k3 = deriv(advance(state, k2, 0.5 * dt));
        const Eigen::VectorXd k4 = deriv(advance(state, k3, dt));
        next = advance(state, k1 + 2.0 * k2 + 2.0 * k3 + k4, dt / 6.0);
    }
    if (!next.q.allFinite() || !next.qd.allFinite()) {
        throw NonFiniteError("integration produced a non-finite state");
    }
    return next;
}

Trajectory run(const RobotParams& params, const HalfspacePolytope& env,
               const DeformationModel& model, const BarrierConfig& barrier_cfg,
               const SimConfig& sim_cfg) {
    params.validate();
    sim_cfg.validate(params.n_seg);
    barrier_cfg.validate();

    const SafeSet safe_set = expand_safe_set(env, model);
    const int n_rows = static_cast<int>(safe_set.rows.size());

    BarrierConfig cfg = barrier_cfg;
    if (cfg.active) cfg.gamma = cfg.gamma_per_row(n_rows);

    RobotState state = sim_cfg.initial_state;
    {
        const Vec2 r0 = fk_tip(params, state.q);
        for (int i = 0; i < n_rows; ++i) {
            const double b0 = safe_set.rows[i].offset - safe_set.rows[i].normal.dot(r0);
            if (!(b0 > 0.0)) {
                throw StartOutsideSafeSetError("initial tip position violates safe-set row " +
                                               std::to_string(i) +
                                               " (clearance " + std::to_string(b0) + ")");
            }
        }
    }

    const int substeps = sim_cfg.substeps_per_tick();
    const long long ticks = std::llround(sim_cfg.duration * sim_cfg.control_hz);

    Trajectory traj;
    traj.rows.reserve(static_cast<size_t>(ticks) + 1);

    for (long long k = 0; k <= ticks; ++k) {
        const double t = static_cast<double>(k) / sim_cfg.control_hz;

        TrajectoryRow row;
        row.t = t;
        row.q = state.q;
        row.qd = state.qd;
        row.r = fk_tip(params, state.q);
        row.u_nom = nominal_control(sim_cfg, t);

        if (cfg.active) {
            QpRows rows = qp_rows(cfg, safe_set, params, state);
            row.dropped_rows = rows.dropped;
            if (rows.a.rows() == 0) {
                row.u = row.u_nom;
                row.qp_status = TickStatus::Bypassed;
            } else {
                const auto t0 = std::chrono::steady_clock::now();
                const QpSolution sol = solve({row.u_nom, rows.a, rows.b});
                const auto t1 = std::chrono::steady_clock::now();
                traj.qp_time_total_s += std::chrono::duration<double>(t1 - t0).count();
                traj.qp_solve_count += 1;
                if (sol.status == QpStatus::Infeasible) {
                    throw QpInfeasibleError(
                        t, "barrier QP infeasible at t=" + std::to_string(t) +
                               " s: safety guarantee lost, aborting run");
                }
                row.u = sol.u_star;
                row.qp_status = TickStatus::Optimal;
            }
        } else {
            row.u = row.u_nom;
            row.qp_status = TickStatus::Bypassed;
        }

        row.b.reserve(n_rows);
        for (const SafeSetRow& sr : safe_set.rows) {
            row.b.push_back(sr.offset - sr.normal.dot(row.r));
        }
        row.n = safe_set.max_deflection(row.r);
        row.force = contact_force(model, row.n);
        row.rho = safety_margin(model, row.n);

        const Eigen::VectorXd u_hold = row.u;
        traj.rows.push_back(std::move(row));

        if (k == ticks) break;
        for (int s = 0; s < substeps; ++s) {
            state = step(params, state, u_hold, sim_cfg.dt, sim_cfg.integrator);
            if (!state_sane(state)) {
                throw NonFiniteError("state left the sane range near t=" + std::to_string(t) +
                                     " s (integration blow-up)");
            }
        }
    }

    return traj;
}

RunReport summarize(const Trajectory& traj) {
    if (traj.rows.empty()) throw std::invalid_argument("cannot summarize an empty trajectory");

    RunReport report;
    report.rho_min = traj.rows.front().rho;
    for (const TrajectoryRow& row : traj.rows) {
        report.rho_min = std::min(report.rho_min, row.rho);
        if (row.rho < 0.0 && !report.t_violation) report.t_violation = row.t;
        report.max_filter_delta =
            std::max(report.max_filter_delta, (row.u - row.u_nom).cwiseAbs().maxCoeff());
    }
    if (traj.qp_solve_count > 0) {
        report.mean_qp_us = 1e6 * traj.qp_time_total_s / static_cast<double>(traj.qp_solve_count);
    }
    return report;
}

}  // namespace softcbf
