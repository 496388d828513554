#include "softcbf/barrier.hpp"

#include <cmath>

namespace softcbf {

BarrierConfig BarrierConfig::preset(const std::string& name) {
    BarrierConfig cfg;
    if (name == "none") {
        return cfg;
    }
    if (name == "low") {
        cfg.active = true;
        cfg.a_e = 2.0;
        cfg.b_e = 2.0;
        cfg.gamma = Eigen::VectorXd::Constant(1, 2.0);
        return cfg;
    }
    if (name == "high") {
        cfg.active = true;
        cfg.a_e = 0.2;
        cfg.b_e = 0.2;
        cfg.gamma = Eigen::VectorXd::Constant(1, 0.2);
        return cfg;
    }
    throw std::invalid_argument("unknown barrier preset '" + name + "'");
}

Eigen::VectorXd BarrierConfig::gamma_per_row(int n_rows) const {
    if (gamma.size() == 1) return Eigen::VectorXd::Constant(n_rows, gamma[0]);
    if (gamma.size() == n_rows) return gamma;
    throw std::invalid_argument("gamma must be a scalar or have one entry per safe-set row (" +
                                std::to_string(n_rows) + " rows, got " +
                                std::to_string(gamma.size()) + ")");
}

void BarrierConfig::validate() const {
    if (!active) return;
    if (!(a_e > 0.0) || !(b_e > 0.0)) {
        throw std::invalid_argument("active barrier requires a_e > 0 and b_e > 0");
    }
    if (gamma.size() == 0 || (gamma.array() <= 0.0).any()) {
        throw std::invalid_argument("active barrier requires all gamma > 0");
    }
}

std::vector<std::pair<double, double>> constraint_values(const SafeSet& safe_set,
                                                         const RobotParams& params,
                                                         const RobotState& state) {
    const Vec2 r = fk_tip(params, state.q);
    const Eigen::Vector2d rdot = tip_jacobian(params, state.q) * state.qd;

    std::vector<std::pair<double, double>> out;
    out.reserve(safe_set.rows.size());
    for (const SafeSetRow& row : safe_set.rows) {
        out.emplace_back(row.offset - row.normal.dot(r), -row.normal.dot(rdot));
    }
    return out;
}

double barrier_value(const BarrierConfig& cfg, double b, double bdot) {
    if (!(b > 0.0)) throw NotInSafeSetError(-1, b);
    const double v = cfg.b_e * bdot * bdot;
    return -std::log(b / (1.0 + b)) + cfg.a_e * v / (1.0 + v);
}

namespace {

// Single evaluation pass shared by barrier_gradients and qp_rows.
std::vector<ConstraintEval> evaluate_rows(const BarrierConfig& cfg, const SafeSet& safe_set,
                                          const RobotParams& params, const RobotState& state) {
    const int n = params.n_seg;
    const Vec2 r = fk_tip(params, state.q);
    const Eigen::Matrix2Xd jac = tip_jacobian(params, state.q);
    const Eigen::Matrix2Xd jac_rate = tip_jacobian_rate(params, state.q, state.qd);
    const Eigen::Vector2d rdot = jac * state.qd;

    std::vector<ConstraintEval> evals;
    evals.reserve(safe_set.rows.size());
    for (size_t i = 0; i < safe_set.rows.size(); ++i) {
        const SafeSetRow& row = safe_set.rows[i];
        ConstraintEval ev;
        ev.b = row.offset - row.normal.dot(r);
        ev.bdot = -row.normal.dot(rdot);
        if (!(ev.b > 0.0)) throw NotInSafeSetError(static_cast<int>(i), ev.b);

        const double v = cfg.b_e * ev.bdot * ev.bdot;
        ev.barrier = -std::log(ev.b / (1.0 + ev.b)) + cfg.a_e * v / (1.0 + v);

        const double dB_db = -1.0 / (ev.b * (1.0 + ev.b));
        const double dB_dbdot = 2.0 * cfg.a_e * cfg.b_e * ev.bdot / ((1.0 + v) * (1.0 + v));

        const Eigen::VectorXd db_dq = -(jac.transpose() * row.normal);
        const Eigen::VectorXd dbdot_dq = -(jac_rate.transpose() * row.normal);

        ev.dB_dq = dB_db * db_dq + dB_dbdot * dbdot_dq;
        ev.dB_dqd = dB_dbdot * db_dq;   // dbdot/dqd equals db/dq
        ev.lg_barrier.resize(n);
        evals.push_back(std::move(ev));
    }
    return evals;
}

}  // namespace

std::vector<BarrierGradients> barrier_gradients(const BarrierConfig& cfg,
                                                const SafeSet& safe_set,
                                                const RobotParams& params,
                                                const RobotState& state) {
    std::vector<BarrierGradients> out;
    for (ConstraintEval& ev : evaluate_rows(cfg, safe_set, params, state)) {
        out.push_back({std::move(ev.dB_dq), std::move(ev.dB_dqd)});
    }
    return out;
}

QpRows qp_rows(const BarrierConfig& cfg, const SafeSet& safe_set, const RobotParams& params,
               const RobotState& state) {
    const int n = params.n_seg;
    const int n_rows = static_cast<int>(safe_set.rows.size());
    const Eigen::VectorXd gamma = cfg.gamma_per_row(n_rows);

    QpRows out;
    out.evals = evaluate_rows(cfg, safe_set, params, state);

    const AffineDecomposition affine = affine_decomposition(params, state);
    const Eigen::VectorXd drift_acc = affine.drift.tail(n);
    const Eigen::MatrixXd input_acc = affine.input_map.bottomRows(n);   // M^-1 Lambda

    for (int i = 0; i < n_rows; ++i) {
        ConstraintEval& ev = out.evals[i];
        ev.lg_barrier = ev.dB_dqd.transpose() * input_acc;
        ev.lf_barrier = ev.dB_dq.dot(state.qd) + ev.dB_dqd.dot(drift_acc);
        ev.active = ev.lg_barrier.norm() >= kDegenerateRowTol;
        if (ev.active) {
            out.retained.push_back(i);
        } else {
            out.dropped.push_back(i);
        }
    }

    out.a.resize(static_cast<int>(out.retained.size()), n);
    out.b.resize(static_cast<int>(out.retained.size()));
    for (size_t k = 0; k < out.retained.size(); ++k) {
        const ConstraintEval& ev = out.evals[out.retained[k]];
        out.a.row(static_cast<int>(k)) = ev.lg_barrier;
        out.b[static_cast<int>(k)] = gamma[out.retained[k]] / ev.barrier - ev.lf_barrier;
    }
    return out;
}

}  // namespace softcbf
