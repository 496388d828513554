#include "softcbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace softcbf {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-10;
constexpr int kMaxIterations = 100;

void check_finite(const QpProblem& p) {
    if (!p.u_nom.allFinite() || !p.a.allFinite() || !p.b.allFinite()) {
        throw std::invalid_argument("QP data must be finite");
    }
    if (p.a.rows() != p.b.size() || (p.a.rows() > 0 && p.a.cols() != p.u_nom.size())) {
        throw std::invalid_argument("QP dimension mismatch");
    }
}

QpSolution make_infeasible(const QpProblem& p) {
    QpSolution sol;
    sol.status = QpStatus::Infeasible;
    sol.u_star = p.u_nom;
    sol.multipliers = Eigen::VectorXd::Zero(p.b.size());
    return sol;
}

}  // namespace

QpSolution solve(const QpProblem& problem) {
    check_finite(problem);
    const int n = static_cast<int>(problem.u_nom.size());
    const int m = static_cast<int>(problem.b.size());

    // Internal form: minimize 0.5||u - u_nom||^2, stationarity
    // (u - u_nom) + A_W' mu = 0 with mu >= 0. Multipliers for the stated
    // objective u'u - 2 u'u_nom are 2 mu.
    Eigen::VectorXd u = problem.u_nom;
    std::vector<int> working;          // active rows, insertion order
    std::vector<double> mu_working;

    auto finish_optimal = [&]() {
        QpSolution sol;
        sol.status = QpStatus::Optimal;
        sol.u_star = u;
        sol.multipliers = Eigen::VectorXd::Zero(m);
        for (size_t k = 0; k < working.size(); ++k) {
            sol.multipliers[working[k]] = 2.0 * mu_working[k];
        }
        sol.active_set = working;
        std::sort(sol.active_set.begin(), sol.active_set.end());
        return sol;
    };

    if (m == 0) return finish_optimal();

    int iterations = 0;
    while (true) {
        // Most violated row, lowest index on ties.
        int p = -1;
        double worst = kPrimalTol;
        for (int i = 0; i < m; ++i) {
            const double v = problem.a.row(i).dot(u) - problem.b[i];
            if (v > worst) {
                worst = v;
                p = i;
            }
        }
        if (p < 0) return finish_optimal();

        const Eigen::VectorXd a_p = problem.a.row(p).transpose();
        if (a_p.norm() < kDualTol) {
            // 0'u <= b_p with b_p < 0: unsatisfiable by any u.
            return make_infeasible(problem);
        }

        double mu_p = 0.0;
        while (true) {
            if (++iterations > kMaxIterations) throw QpIterationLimitError();

            const int k = static_cast<int>(working.size());
            Eigen::VectorXd r(k);
            Eigen::VectorXd z;
            if (k == 0) {
                z = -a_p;
            } else {
                Eigen::MatrixXd aw(k, n);
                for (int j = 0; j < k; ++j) aw.row(j) = problem.a.row(working[j]);
                const Eigen::MatrixXd gram = aw * aw.transpose();
                r = gram.ldlt().solve(aw * a_p);
                z = -(a_p - aw.transpose() * r);
            }

            const double step_scale = -a_p.dot(z);   // ||P a_p||^2
            const double violation = problem.a.row(p).dot(u) - problem.b[p];

            // Largest dual-feasible step before some working multiplier hits 0.
            double t_dual = std::numeric_limits<double>::infinity();
            int blocking = -1;
            for (int j = 0; j < k; ++j) {
                if (r[j] > kDualTol) {
                    const double t = mu_working[j] / r[j];
                    if (t < t_dual) {
                        t_dual = t;
                        blocking = j;
                    }
                }
            }

            if (step_scale <= 1e-14 * (1.0 + a_p.squaredNorm())) {
                // a_p lies in the span of the working normals; the violation
                // cannot be reduced in the primal. With every r_j <= 0 the
                // rows certify an empty feasible set.
                if (blocking < 0) return make_infeasible(problem);
                mu_p += t_dual;
                for (int j = 0; j < k; ++j) mu_working[j] -= t_dual * r[j];
                working.erase(working.begin() + blocking);
                mu_working.erase(mu_working.begin() + blocking);
                continue;
            }

            const double t_full = violation / step_scale;
            const double t = std::min(t_full, t_dual);
            u += t * z;
            mu_p += t;
            for (int j = 0; j < k; ++j) mu_working[j] -= t * r[j];

            if (t_full <= t_dual) {
                working.push_back(p);
                mu_working.push_back(mu_p);
                break;
            }
            working.erase(working.begin() + blocking);
            mu_working.erase(mu_working.begin() + blocking);
        }
    }
}

QpSolution solve_oracle(const QpProblem& problem) {
    check_finite(problem);
    const int n = static_cast<int>(problem.u_nom.size());
    const int m = static_cast<int>(problem.b.size());
    if (m > 20) throw std::invalid_argument("oracle limited to 20 constraints");

    const double feas_tol = 1e-8;
    QpSolution best = make_infeasible(problem);
    double best_obj = std::numeric_limits<double>::infinity();
    bool found = false;

    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> subset;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) subset.push_back(i);
        }
        const int k = static_cast<int>(subset.size());

        Eigen::VectorXd u;
        Eigen::VectorXd nu = Eigen::VectorXd::Zero(k);
        if (k == 0) {
            u = problem.u_nom;
        } else {
            Eigen::MatrixXd as(k, n);
            Eigen::VectorXd bs(k);
            for (int j = 0; j < k; ++j) {
                as.row(j) = problem.a.row(subset[j]);
                bs[j] = problem.b[subset[j]];
            }
            // Projection onto {A_S u = b_S}: u = u_nom - A_S' nu with
            // (A_S A_S') nu = A_S u_nom - b_S; least-squares handles
            // rank-deficient subsets, inconsistent ones are skipped.
            const Eigen::MatrixXd gram = as * as.transpose();
            nu = gram.completeOrthogonalDecomposition().solve(as * problem.u_nom - bs);
            u = problem.u_nom - as.transpose() * nu;
            if (((as * u - bs).cwiseAbs().maxCoeff()) > feas_tol) continue;
            if (nu.minCoeff() < -feas_tol) continue;
        }

        bool feasible = true;
        for (int i = 0; i < m && feasible; ++i) {
            feasible = problem.a.row(i).dot(u) <= problem.b[i] + feas_tol;
        }
        if (!feasible) continue;

        const double obj = (u - problem.u_nom).squaredNorm();
        if (!found || obj < best_obj - 1e-12) {
            found = true;
            best_obj = obj;
            best.status = QpStatus::Optimal;
            best.u_star = u;
            best.active_set = subset;
            best.multipliers = Eigen::VectorXd::Zero(m);
            for (int j = 0; j < k; ++j) best.multipliers[subset[j]] = 2.0 * nu[j];
        }
    }
    return best;
}

}  // namespace softcbf
