#include "scimpc/quat_cost.h"

#include <cmath>

namespace scimpc {

namespace {

// Vector part of conj(q) (x) r as a linear map L(r) q. Rows are mutually
// orthogonal, orthogonal to r, and L r = 0, so for unit r:
//   L L' = I_3,  L' L = I_4 - r r'.
Eigen::Matrix<double, 3, 4> relative_vector_map(const Eigen::Vector4d& r) {
  Eigen::Matrix<double, 3, 4> L;
  const double rw = r(0), rx = r(1), ry = r(2), rz = r(3);
  L << rx, -rw, rz, -ry,
       ry, -rz, -rw, rx,
       rz, ry, -rx, -rw;
  return L;
}

}  // namespace

double quat_angle_error(const Eigen::Vector4d& q_curr, const Eigen::Vector4d& q_goal) {
  Eigen::Vector4d r = q_goal;
  double w = q_curr.dot(r);
  if (w < 0.0) {
    r = -r;
    w = -w;
  }
  const double s = (relative_vector_map(r) * q_curr).norm();
  return 2.0 * std::atan2(s, w);
}

Eigen::Matrix4d quat_error_squared_hessian(const Eigen::Vector4d& q_curr,
                                           const Eigen::Vector4d& q_goal) {
  Eigen::Vector4d r = q_goal;
  if (q_curr.dot(r) < 0.0) r = -r;
  const Eigen::Matrix<double, 3, 4> L = relative_vector_map(r);
  const Eigen::Matrix4d LtL = L.transpose() * L;

  const double w = q_curr.dot(r);
  const double s = (L * q_curr).norm();

  // At zero error the squared angle is 4 s^2 / w^2 to leading order.
  if (s < 1e-7) {
    return 8.0 / (w * w) * LtL;
  }

  const double n2 = s * s + w * w;
  const Eigen::Vector4d grad_s = LtL * q_curr / s;
  const double phi = std::atan2(s, w);  // half the rotation angle

  const Eigen::Vector4d g = w * grad_s - s * r;
  const Eigen::Vector4d grad_phi = g / n2;

  const Eigen::Matrix4d hess_s = (LtL - grad_s * grad_s.transpose()) / s;
  const Eigen::Matrix4d J_g = grad_s * r.transpose() - r * grad_s.transpose() + w * hess_s;
  const Eigen::Vector4d grad_n2 = 2.0 * (s * grad_s + w * r);
  Eigen::Matrix4d hess_phi = (J_g - grad_phi * grad_n2.transpose()) / n2;
  hess_phi = 0.5 * (hess_phi + hess_phi.transpose()).eval();

  Eigen::Matrix4d hess =
      8.0 * grad_phi * grad_phi.transpose() + 8.0 * phi * hess_phi;
  return 0.5 * (hess + hess.transpose()).eval();
}

QuatCostBlock quat_cost_hessian(const Eigen::Vector4d& q_curr,
                                const Eigen::Vector4d& q_goal) {
  if (std::abs(q_curr.norm() - 1.0) > 1e-9 || std::abs(q_goal.norm() - 1.0) > 1e-9) {
    throw NonUnitQuaternionError("quat_cost_hessian: inputs must be unit quaternions");
  }
  QuatCostBlock out;
  const Eigen::Matrix4d raw = quat_error_squared_hessian(q_curr, q_goal);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(raw);
  out.gamma = eig.eigenvalues().minCoeff();
  out.matrix = raw;
  if (out.gamma < 0.0) {
    out.matrix += std::abs(out.gamma) * Eigen::Matrix4d::Identity();
  }
  return out;
}

Eigen::MatrixXd assemble_tracking_cost(const Eigen::VectorXd& base_q_diag,
                                       const QuatCostBlock& quat_block, int quat_offset,
                                       double weight) {
  const int n = static_cast<int>(base_q_diag.size());
  if (quat_offset < 0 || quat_offset + 4 > n) {
    throw std::invalid_argument("assemble_tracking_cost: quaternion block out of range");
  }
  Eigen::MatrixXd Q = base_q_diag.asDiagonal();
  Q.block<4, 4>(quat_offset, quat_offset) = weight * quat_block.matrix;
  return Q;
}

Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return Eigen::Vector4d(
      a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3),
      a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2),
      a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1),
      a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0));
}

Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q) {
  return Eigen::Vector4d(q(0), -q(1), -q(2), -q(3));
}

Eigen::Vector4d quat_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-12) return Eigen::Vector4d(1, 0, 0, 0);
  const Eigen::Vector3d a = axis / n;
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return Eigen::Vector4d(std::cos(half), s * a.x(), s * a.y(), s * a.z());
}

}  // namespace scimpc
