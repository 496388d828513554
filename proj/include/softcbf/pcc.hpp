#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "softcbf/types.hpp"

namespace softcbf {

class SingularMassError : public std::runtime_error {
public:
    explicit SingularMassError(const std::string& what) : std::runtime_error(what) {}
};

// Planar constant-curvature arm: one subtended angle per segment, point mass
// per segment, diagonal joint stiffness/damping, diagonal pressure-to-torque
// input map.
struct RobotParams {
    int n_seg = 0;
    Eigen::VectorXd lengths;       // arclengths L_i, m
    double seg_mass = 0.0;         // point mass per segment, kg
    Eigen::VectorXd k_diag;        // joint stiffness, N·m/rad
    Eigen::VectorXd d_diag;        // joint damping, N·m·s/rad
    Eigen::VectorXd lambda_diag;   // input map, N·m/hPa

    double total_length() const { return lengths.sum(); }

    // Throws std::invalid_argument on nonpositive lengths/masses/diagonals.
    void validate() const;
};

struct RobotState {
    Eigen::VectorXd q;    // subtended angles, rad
    Eigen::VectorXd qd;   // angle rates, rad/s

    static RobotState zero(int n_seg) {
        return {Eigen::VectorXd::Zero(n_seg), Eigen::VectorXd::Zero(n_seg)};
    }
};

// Rigid transform from one segment frame to the next: rotate by the
// subtended angle, translate along the arc chord.
struct PlanarTransform {
    double rotation = 0.0;
    Vec2 translation = Vec2::Zero();
};

PlanarTransform segment_transform(double q, double length);

// Tip position of the composed segment chain; the undeformed arm extends
// along +x from the origin.
Vec2 fk_tip(const RobotParams& params, const Eigen::VectorXd& q);

// Analytic tip Jacobian dr/dq (2 x N).
Eigen::Matrix2Xd tip_jacobian(const RobotParams& params, const Eigen::VectorXd& q);

// Time derivative of the tip Jacobian along (q, qd) (2 x N).
Eigen::Matrix2Xd tip_jacobian_rate(const RobotParams& params, const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& qd);

// Joint values of the revolute-prismatic-prismatic-revolute chain that
// realizes one constant-curvature segment, and their derivative in q.
struct AugmentedMap {
    Eigen::Vector4d value;        // [q/2, L sin(q/2)/q, L sin(q/2)/q, q/2]
    Eigen::Vector4d derivative;
};

AugmentedMap augmented_map(double q, double length);

struct DynamicsMatrices {
    Eigen::MatrixXd mass;        // M(q), symmetric positive definite
    Eigen::MatrixXd coriolis;    // C(q, qd); M' - 2C is skew-symmetric
};

// Projects the point-mass chain onto the segment angles. Throws
// SingularMassError when M is numerically singular (condition > 1e12).
DynamicsMatrices dynamics_matrices(const RobotParams& params, const RobotState& state);

// Full state derivative [qd; M^-1 (Lambda u - C qd - D qd - K q)].
Eigen::VectorXd control_affine(const RobotParams& params, const RobotState& state,
                               const Eigen::VectorXd& u);

// The same dynamics split as xdot = drift + input_map * u.
struct AffineDecomposition {
    Eigen::VectorXd drift;       // f(x), 2N
    Eigen::MatrixXd input_map;   // g(x) = [0; M^-1 Lambda], 2N x N
};

AffineDecomposition affine_decomposition(const RobotParams& params, const RobotState& state);

}  // namespace softcbf
