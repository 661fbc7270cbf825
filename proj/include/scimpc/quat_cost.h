#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace scimpc {

class NonUnitQuaternionError : public std::runtime_error {
 public:
  explicit NonUnitQuaternionError(const std::string& what) : std::runtime_error(what) {}
};

// Quaternions are stored (w, x, y, z).

// Rotation angle in [0, pi] between two orientations. Scale-invariant in both
// arguments, so it stays well defined off the unit sphere (finite-difference
// probes rely on this).
double quat_angle_error(const Eigen::Vector4d& q_curr, const Eigen::Vector4d& q_goal);

inline double quat_angle_error_squared(const Eigen::Vector4d& q_curr,
                                       const Eigen::Vector4d& q_goal) {
  const double a = quat_angle_error(q_curr, q_goal);
  return a * a;
}

// Analytic Hessian of the squared angle error with respect to the four
// components of q_curr, no regularization.
Eigen::Matrix4d quat_error_squared_hessian(const Eigen::Vector4d& q_curr,
                                           const Eigen::Vector4d& q_goal);

struct QuatCostBlock {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
  double gamma = 0.0;  // most negative raw eigenvalue; shift applied iff < 0
};

// Regularized Hessian: the raw Hessian shifted by |gamma| I when its most
// negative eigenvalue gamma is below zero. Inputs must be unit within 1e-9.
QuatCostBlock quat_cost_hessian(const Eigen::Vector4d& q_curr,
                                const Eigen::Vector4d& q_goal);

// Diagonal tracking cost with the object-quaternion 4x4 block replaced by
// weight * quat_block. The same matrix is used at every horizon step.
Eigen::MatrixXd assemble_tracking_cost(const Eigen::VectorXd& base_q_diag,
                                       const QuatCostBlock& quat_block, int quat_offset,
                                       double weight);

// Hamilton product helpers used by goal truncation.
Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q);
Eigen::Vector4d quat_from_axis_angle(const Eigen::Vector3d& axis, double angle);

}  // namespace scimpc
