#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "softcbf/geometry.hpp"
#include "softcbf/pcc.hpp"

namespace softcbf {

// Raised when a barrier is evaluated outside its domain (constraint value
// b_i <= 0); the supervisory controller cannot recover from this state.
class NotInSafeSetError : public std::runtime_error {
public:
    NotInSafeSetError(int row, double b)
        : std::runtime_error("tip outside safe set: row " + std::to_string(row) +
                             " has constraint value " + std::to_string(b)),
          row_(row), b_(b) {}

    int row() const { return row_; }
    double constraint_value() const { return b_; }

private:
    int row_;
    double b_;
};

// Barrier tuning. Smaller a_e, b_e, gamma make the filter act earlier and
// harder; `active == false` bypasses the filter entirely (u* = u_nom).
struct BarrierConfig {
    bool active = false;
    double a_e = 0.0;
    double b_e = 0.0;
    Eigen::VectorXd gamma;   // one entry, or one per safe-set row

    static BarrierConfig disabled() { return {}; }
    static BarrierConfig preset(const std::string& name);

    // gamma resolved to one entry per safe-set row (scalar broadcast).
    Eigen::VectorXd gamma_per_row(int n_rows) const;

    void validate() const;
};

// Everything the QP needs from one safe-set row at the current state.
struct ConstraintEval {
    double b = 0.0;        // distance-like constraint value, m
    double bdot = 0.0;     // its rate, m/s
    double barrier = 0.0;  // B_i, grows without bound as b -> 0+
    Eigen::VectorXd dB_dq;
    Eigen::VectorXd dB_dqd;
    double lf_barrier = 0.0;        // L_f B_i
    Eigen::RowVectorXd lg_barrier;  // L_g B_i
    bool active = false;            // retained in the QP (L_g B_i nonzero)
};

// Per-row (b_i, bdot_i): signed clearance of the tip to each expanded facet
// and its rate. Same formula for Upper and Lower rows (sign is in the row).
std::vector<std::pair<double, double>> constraint_values(const SafeSet& safe_set,
                                                         const RobotParams& params,
                                                         const RobotState& state);

// Barrier value for one row. Throws NotInSafeSetError when b <= 0.
double barrier_value(const BarrierConfig& cfg, double b, double bdot);

struct BarrierGradients {
    Eigen::VectorXd dq;
    Eigen::VectorXd dqd;
};

// Analytic dB/dq and dB/dqd per row, chained through b(q) and bdot(q, qd).
std::vector<BarrierGradients> barrier_gradients(const BarrierConfig& cfg,
                                                const SafeSet& safe_set,
                                                const RobotParams& params,
                                                const RobotState& state);

// Inequality rows A u <= b enforcing bounded barrier growth. Rows whose
// input sensitivity ||L_g B_i|| falls below `degenerate_tol` cannot
// constrain the input and are dropped for this step (reported in `dropped`).
struct QpRows {
    Eigen::MatrixXd a;            // retained rows x N
    Eigen::VectorXd b;
    std::vector<int> retained;    // safe-set row index per QP row
    std::vector<int> dropped;
    std::vector<ConstraintEval> evals;   // all rows, safe-set order
};

QpRows qp_rows(const BarrierConfig& cfg, const SafeSet& safe_set, const RobotParams& params,
               const RobotState& state);

inline constexpr double kDegenerateRowTol = 1e-10;

}  // namespace softcbf
