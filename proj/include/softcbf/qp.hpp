#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace softcbf {

enum class QpStatus { Optimal, Infeasible };

// Strictly convex projection QP: minimize u'u - 2 u'u_nom subject to A u <= b.
struct QpProblem {
    Eigen::VectorXd u_nom;
    Eigen::MatrixXd a;   // M x N, M may be 0
    Eigen::VectorXd b;
};

struct QpSolution {
    Eigen::VectorXd u_star;
    std::vector<int> active_set;      // tight rows at the optimum, ascending
    Eigen::VectorXd multipliers;      // KKT multipliers for u'u - 2 u'u_nom, size M
    QpStatus status = QpStatus::Infeasible;
};

class QpIterationLimitError : public std::runtime_error {
public:
    QpIterationLimitError() : std::runtime_error("QP active-set iteration limit reached") {}
};

// Dual active-set solve. Starts from the unconstrained minimizer u_nom and
// adds violated rows one at a time, keeping dual feasibility; terminates with
// the exact minimizer or an infeasibility certificate. Deterministic: ties
// break toward the lowest row index. Throws QpIterationLimitError after 100
// steps (distinct from Infeasible).
QpSolution solve(const QpProblem& problem);

// Independent brute-force reference: enumerates every active-set subset,
// solves the equality-constrained projection, and keeps the best candidate
// that passes primal and dual feasibility. Intended for small instances
// (M <= 20).
QpSolution solve_oracle(const QpProblem& problem);

}  // namespace softcbf
