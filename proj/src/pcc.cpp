#include "softcbf/pcc.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace softcbf {

namespace {

// Below this angle all sinc-type terms switch to 2-term series; keeps
// relative error under 1e-13 with no branch discontinuity.
constexpr double kTaylorThreshold = 1e-6;

// L sin(q/2)/q and its first two derivatives in q. This is both the chord
// half-length of a constant-curvature arc and the prismatic joint value of
// the equivalent rigid chain.
struct DeltaTerms {
    double val;
    double d1;
    double d2;
};

// The closed-form derivatives cancel catastrophically near q = 0 (the d2
// terms each scale like 1/q^2), so the series window is much wider than for
// the plain sinc expressions; with the cubic terms both branches agree to
// ~1e-15 relative at the switch.
constexpr double kDeltaSeriesWindow = 1e-2;

DeltaTerms seg_delta(double q, double length) {
    DeltaTerms t;
    const double q2 = q * q;
    if (std::abs(q) < kDeltaSeriesWindow) {
        const double q4 = q2 * q2;
        t.val = length * (0.5 - q2 / 48.0 + q4 / 3840.0);
        t.d1 = length * q * (-1.0 / 24.0 + q2 / 960.0 - q4 / 107520.0);
        t.d2 = length * (-1.0 / 24.0 + q2 / 320.0 - q4 / 21504.0);
    } else {
        const double s = std::sin(0.5 * q);
        const double c = std::cos(0.5 * q);
        t.val = length * s / q;
        t.d1 = length * (0.5 * q * c - s) / q2;
        t.d2 = length * (-s / (4.0 * q) - c / q2 + 2.0 * s / (q2 * q));
    }
    return t;
}

void check_sizes(const RobotParams& params, const Eigen::VectorXd& q) {
    if (q.size() != params.n_seg || params.lengths.size() != params.n_seg) {
        throw std::invalid_argument("state/parameter dimension mismatch");
    }
}

// Shared per-segment kinematic terms: mid-arc heading theta_j and its rate,
// chord half-length delta_j with derivatives.
struct ChainTerms {
    std::vector<double> theta, theta_dot;
    std::vector<Vec2> dir, perp;      // e(theta), rotated by +90 deg
    std::vector<DeltaTerms> delta;
};

ChainTerms chain_terms(const RobotParams& params, const Eigen::VectorXd& q,
                       const Eigen::VectorXd* qd) {
    const int n = params.n_seg;
    ChainTerms ct;
    ct.theta.resize(n);
    ct.theta_dot.assign(n, 0.0);
    ct.dir.resize(n);
    ct.perp.resize(n);
    ct.delta.resize(n);

    double phi = 0.0, phi_dot = 0.0;
    for (int j = 0; j < n; ++j) {
        ct.theta[j] = phi + 0.5 * q[j];
        if (qd) ct.theta_dot[j] = phi_dot + 0.5 * (*qd)[j];
        ct.dir[j] = Vec2(std::cos(ct.theta[j]), std::sin(ct.theta[j]));
        ct.perp[j] = Vec2(-ct.dir[j].y(), ct.dir[j].x());
        ct.delta[j] = seg_delta(q[j], params.lengths[j]);
        phi += q[j];
        if (qd) phi_dot += (*qd)[j];
    }
    return ct;
}

// Jacobian (and optionally its time derivative) of the point
//   x = sum_j coeff_j * delta_j * e(theta_j),
// where coeff is 2 for full chords and 1 for the half chord ending at a
// segment's mass.
void point_jacobians(const ChainTerms& ct, const Eigen::VectorXd* qd,
                     const std::vector<double>& coeff, int last_seg,
                     Eigen::Matrix2Xd* jac, Eigen::Matrix2Xd* jac_rate) {
    jac->setZero();
    if (jac_rate) jac_rate->setZero();

    for (int j = 0; j <= last_seg; ++j) {
        const double a = coeff[j];
        if (a == 0.0) continue;
        const DeltaTerms& d = ct.delta[j];
        const Vec2& e = ct.dir[j];
        const Vec2& se = ct.perp[j];
        const double th_dot = ct.theta_dot[j];

        // dtheta_j/dq_k = 1 for k < j, 1/2 for k = j.
        for (int k = 0; k < j; ++k) {
            jac->col(k) += a * d.val * se;
            if (jac_rate) {
                jac_rate->col(k) += a * (d.d1 * (*qd)[j] * se - d.val * th_dot * e);
            }
        }
        jac->col(j) += a * (d.d1 * e + 0.5 * d.val * se);
        if (jac_rate) {
            jac_rate->col(j) += a * (d.d2 * (*qd)[j] * e + d.d1 * th_dot * se +
                                     0.5 * d.d1 * (*qd)[j] * se - 0.5 * d.val * th_dot * e);
        }
    }
}

}  // namespace

void RobotParams::validate() const {
    if (n_seg < 1) throw std::invalid_argument("robot needs at least one segment");
    if (lengths.size() != n_seg || k_diag.size() != n_seg || d_diag.size() != n_seg ||
        lambda_diag.size() != n_seg) {
        throw std::invalid_argument("robot parameter vectors must have n_seg entries");
    }
    if (!(seg_mass > 0.0)) throw std::invalid_argument("segment mass must be positive");
    for (int i = 0; i < n_seg; ++i) {
        if (!(lengths[i] > 0.0)) throw std::invalid_argument("segment lengths must be positive");
        if (!(k_diag[i] > 0.0) || !(d_diag[i] > 0.0) || !(lambda_diag[i] > 0.0)) {
            throw std::invalid_argument("K, D, Lambda diagonals must be strictly positive");
        }
    }
}

PlanarTransform segment_transform(double q, double length) {
    PlanarTransform t;
    t.rotation = q;
    if (std::abs(q) < kTaylorThreshold) {
        t.translation = Vec2(length * (1.0 - q * q / 6.0),
                             length * (0.5 * q - q * q * q / 24.0));
    } else {
        t.translation = Vec2(length * std::sin(q) / q,
                             length * (1.0 - std::cos(q)) / q);
    }
    return t;
}

Vec2 fk_tip(const RobotParams& params, const Eigen::VectorXd& q) {
    check_sizes(params, q);
    Vec2 r = Vec2::Zero();
    double phi = 0.0;
    for (int i = 0; i < params.n_seg; ++i) {
        const PlanarTransform t = segment_transform(q[i], params.lengths[i]);
        const double c = std::cos(phi), s = std::sin(phi);
        r += Vec2(c * t.translation.x() - s * t.translation.y(),
                  s * t.translation.x() + c * t.translation.y());
        phi += t.rotation;
    }
    return r;
}

Eigen::Matrix2Xd tip_jacobian(const RobotParams& params, const Eigen::VectorXd& q) {
    check_sizes(params, q);
    const ChainTerms ct = chain_terms(params, q, nullptr);
    const std::vector<double> coeff(params.n_seg, 2.0);
    Eigen::Matrix2Xd jac(2, params.n_seg);
    point_jacobians(ct, nullptr, coeff, params.n_seg - 1, &jac, nullptr);
    return jac;
}

Eigen::Matrix2Xd tip_jacobian_rate(const RobotParams& params, const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& qd) {
    check_sizes(params, q);
    const ChainTerms ct = chain_terms(params, q, &qd);
    const std::vector<double> coeff(params.n_seg, 2.0);
    Eigen::Matrix2Xd jac(2, params.n_seg);
    Eigen::Matrix2Xd rate(2, params.n_seg);
    point_jacobians(ct, &qd, coeff, params.n_seg - 1, &jac, &rate);
    return rate;
}

AugmentedMap augmented_map(double q, double length) {
    const DeltaTerms d = seg_delta(q, length);
    AugmentedMap m;
    m.value << 0.5 * q, d.val, d.val, 0.5 * q;
    m.derivative << 0.5, d.d1, d.d1, 0.5;
    return m;
}

DynamicsMatrices dynamics_matrices(const RobotParams& params, const RobotState& state) {
    check_sizes(params, state.q);
    const int n = params.n_seg;
    const ChainTerms ct = chain_terms(params, state.q, &state.qd);

    DynamicsMatrices dyn;
    dyn.mass.setZero(n, n);
    dyn.coriolis.setZero(n, n);

    Eigen::Matrix2Xd jac(2, n), rate(2, n);
    std::vector<double> coeff(n, 0.0);
    for (int i = 0; i < n; ++i) {
        // Mass i sits between the two prismatic joints of segment i: full
        // chords for every earlier segment, half chord for its own.
        for (int j = 0; j < n; ++j) coeff[j] = j < i ? 2.0 : (j == i ? 1.0 : 0.0);
        point_jacobians(ct, &state.qd, coeff, i, &jac, &rate);
        dyn.mass.noalias() += params.seg_mass * jac.transpose() * jac;
        dyn.coriolis.noalias() += params.seg_mass * jac.transpose() * rate;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    if (n <= 3) {
        eig.computeDirect(dyn.mass, Eigen::EigenvaluesOnly);
    } else {
        eig.compute(dyn.mass, Eigen::EigenvaluesOnly);
    }
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi > 1e12 * lo) {
        throw SingularMassError("mass matrix numerically singular (condition > 1e12)");
    }
    return dyn;
}

Eigen::VectorXd control_affine(const RobotParams& params, const RobotState& state,
                               const Eigen::VectorXd& u) {
    if (u.size() != params.n_seg) throw std::invalid_argument("input dimension mismatch");
    const int n = params.n_seg;
    const DynamicsMatrices dyn = dynamics_matrices(params, state);

    Eigen::VectorXd torque = params.lambda_diag.cwiseProduct(u) -
                             dyn.coriolis * state.qd -
                             params.d_diag.cwiseProduct(state.qd) -
                             params.k_diag.cwiseProduct(state.q);
    Eigen::VectorXd xdot(2 * n);
    xdot.head(n) = state.qd;
    xdot.tail(n) = dyn.mass.ldlt().solve(torque);
    return xdot;
}

AffineDecomposition affine_decomposition(const RobotParams& params, const RobotState& state) {
    const int n = params.n_seg;
    const DynamicsMatrices dyn = dynamics_matrices(params, state);
    const auto ldlt = dyn.mass.ldlt();

    AffineDecomposition out;
    out.drift.resize(2 * n);
    out.drift.head(n) = state.qd;
    out.drift.tail(n) = ldlt.solve(-dyn.coriolis * state.qd -
                                   params.d_diag.cwiseProduct(state.qd).eval() -
                                   params.k_diag.cwiseProduct(state.q).eval());
    out.input_map.setZero(2 * n, n);
    out.input_map.bottomRows(n) =
        ldlt.solve(Eigen::MatrixXd(params.lambda_diag.asDiagonal()));
    return out;
}

}  // namespace softcbf
