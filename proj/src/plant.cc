#include "scimpc/plant.h"

#include <cmath>
#include <limits>

namespace scimpc {

namespace {

int q_size(JointType j) {
  switch (j) {
    case JointType::kStatic: return 0;
    case JointType::kLine: return 1;
    case JointType::kTranslating: return 3;
    case JointType::kPlanar: return 3;
    case JointType::kFree: return 7;
  }
  return 0;
}

int v_size(JointType j) {
  switch (j) {
    case JointType::kStatic: return 0;
    case JointType::kLine: return 1;
    case JointType::kTranslating: return 3;
    case JointType::kPlanar: return 3;
    case JointType::kFree: return 6;
  }
  return 0;
}

int translational_dofs(JointType j) {
  switch (j) {
    case JointType::kLine: return 1;
    case JointType::kTranslating: return 3;
    default: return 0;
  }
}

Eigen::Quaterniond quat_from_segment(const Eigen::VectorXd& q, int offset) {
  Eigen::Quaterniond quat(q(offset), q(offset + 1), q(offset + 2), q(offset + 3));
  const double n = quat.norm();
  if (n < 1e-12) return Eigen::Quaterniond::Identity();
  quat.coeffs() /= n;
  return quat;
}

}  // namespace

int Plant::add_body(Body body) {
  const int index = static_cast<int>(bodies_.size());
  q_offset_.push_back(n_q_);
  v_offset_.push_back(n_v_);
  n_q_ += q_size(body.joint);
  n_v_ += v_size(body.joint);
  bodies_.push_back(std::move(body));
  return index;
}

void Plant::add_contact_pair(ContactPairSpec spec) {
  if (spec.body_a < 0 || spec.body_a >= num_bodies() || spec.body_b < 0 ||
      spec.body_b >= num_bodies()) {
    throw DimensionError("add_contact_pair: body index out of range");
  }
  pairs_.push_back(std::move(spec));
}

void Plant::set_actuated_body(int body) {
  actuated_body_ = body;
  n_u_ = translational_dofs(bodies_.at(body).joint);
}

int Plant::n_lambda() const {
  int total = 0;
  for (const auto& p : pairs_) total += p.rows();
  return total;
}

Eigen::VectorXd Plant::default_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_x());
  for (int b = 0; b < num_bodies(); ++b) {
    if (bodies_[b].joint == JointType::kFree) {
      x(q_offset_[b] + 3) = 1.0;  // identity quaternion, wxyz
    }
  }
  return x;
}

Eigen::Isometry3d Plant::body_pose(const Eigen::VectorXd& q, int body) const {
  const Body& b = bodies_.at(body);
  const int o = q_offset_.at(body);
  Eigen::Isometry3d X = Eigen::Isometry3d::Identity();
  switch (b.joint) {
    case JointType::kStatic:
      return b.fixed_pose;
    case JointType::kLine:
      X.translation() = Eigen::Vector3d(q(o), 0.0, 0.0);
      return X;
    case JointType::kTranslating:
      X.translation() = q.segment<3>(o);
      return X;
    case JointType::kPlanar: {
      X.translation() = Eigen::Vector3d(q(o), q(o + 1), b.planar_height);
      X.linear() = Eigen::AngleAxisd(q(o + 2), Eigen::Vector3d::UnitZ()).toRotationMatrix();
      return X;
    }
    case JointType::kFree: {
      X.translation() = q.segment<3>(o);
      X.linear() = quat_from_segment(q, o + 3).toRotationMatrix();
      return X;
    }
  }
  return X;
}

Eigen::MatrixXd Plant::mass_matrix(const Eigen::VectorXd& q) const {
  if (q.size() != n_q_) throw DimensionError("mass_matrix: bad q size");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_v_, n_v_);
  for (int b = 0; b < num_bodies(); ++b) {
    const Body& body = bodies_[b];
    const int o = v_offset_[b];
    switch (body.joint) {
      case JointType::kStatic:
        break;
      case JointType::kLine:
        M(o, o) = body.mass;
        break;
      case JointType::kTranslating:
        M.block<3, 3>(o, o) = body.mass * Eigen::Matrix3d::Identity();
        break;
      case JointType::kPlanar: {
        M(o, o) = body.mass;
        M(o + 1, o + 1) = body.mass;
        const Eigen::Matrix3d R = body_pose(q, b).linear();
        M(o + 2, o + 2) = (R * body.inertia * R.transpose())(2, 2);
        break;
      }
      case JointType::kFree: {
        M.block<3, 3>(o, o) = body.mass * Eigen::Matrix3d::Identity();
        const Eigen::Matrix3d R = body_pose(q, b).linear();
        M.block<3, 3>(o + 3, o + 3) = R * body.inertia * R.transpose();
        break;
      }
    }
  }
  return M;
}

Eigen::VectorXd Plant::generalized_force(const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& v,
                                         const Eigen::VectorXd& u) const {
  if (q.size() != n_q_ || v.size() != n_v_ || u.size() != n_u_) {
    throw DimensionError("generalized_force: dimension mismatch");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_v_);
  for (int b = 0; b < num_bodies(); ++b) {
    const Body& body = bodies_[b];
    const int o = v_offset_[b];
    switch (body.joint) {
      case JointType::kStatic:
        break;
      case JointType::kLine:
        f(o) -= body.linear_damping * v(o);
        break;
      case JointType::kTranslating:
        if (body.gravity_on) f(o + 2) -= body.mass * gravity_;
        f.segment<3>(o) -= body.linear_damping * v.segment<3>(o);
        break;
      case JointType::kPlanar:
        f.segment<2>(o) -= body.linear_damping * v.segment<2>(o);
        f(o + 2) -= body.angular_damping * v(o + 2);
        break;
      case JointType::kFree: {
        if (body.gravity_on) f(o + 2) -= body.mass * gravity_;
        f.segment<3>(o) -= body.linear_damping * v.segment<3>(o);
        const Eigen::Matrix3d R = body_pose(q, b).linear();
        const Eigen::Matrix3d I_w = R * body.inertia * R.transpose();
        const Eigen::Vector3d omega = v.segment<3>(o + 3);
        f.segment<3>(o + 3) -= omega.cross(I_w * omega);
        f.segment<3>(o + 3) -= body.angular_damping * omega;
        break;
      }
    }
  }
  if (actuated_body_ >= 0 && n_u_ > 0) {
    f.segment(v_offset_[actuated_body_], n_u_) += u;
  }
  return f;
}

Eigen::VectorXd Plant::integrate_positions(const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& v, double dt) const {
  if (q.size() != n_q_ || v.size() != n_v_) {
    throw DimensionError("integrate_positions: dimension mismatch");
  }
  Eigen::VectorXd out = q;
  for (int b = 0; b < num_bodies(); ++b) {
    const Body& body = bodies_[b];
    const int qo = q_offset_[b];
    const int vo = v_offset_[b];
    switch (body.joint) {
      case JointType::kStatic:
        break;
      case JointType::kLine:
        out(qo) += dt * v(vo);
        break;
      case JointType::kTranslating:
      case JointType::kPlanar:
        out.segment<3>(qo) += dt * v.segment<3>(vo);
        break;
      case JointType::kFree: {
        out.segment<3>(qo) += dt * v.segment<3>(vo);
        const Eigen::Quaterniond quat = quat_from_segment(q, qo + 3);
        const Eigen::Vector3d omega = v.segment<3>(vo + 3);
        // qdot = 0.5 * (omega as pure quaternion) * q, world-frame omega.
        const Eigen::Quaterniond omega_q(0.0, omega.x(), omega.y(), omega.z());
        Eigen::Quaterniond next = quat;
        const Eigen::Quaterniond rate = omega_q * quat;
        next.w() += 0.5 * dt * rate.w();
        next.x() += 0.5 * dt * rate.x();
        next.y() += 0.5 * dt * rate.y();
        next.z() += 0.5 * dt * rate.z();
        next.normalize();
        out(qo + 3) = next.w();
        out(qo + 4) = next.x();
        out(qo + 5) = next.y();
        out(qo + 6) = next.z();
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd Plant::normalize_configuration(Eigen::VectorXd q) const {
  for (int b = 0; b < num_bodies(); ++b) {
    if (bodies_[b].joint != JointType::kFree) continue;
    const int o = q_offset_[b] + 3;
    const double n = q.segment<4>(o).norm();
    if (n > 1e-12) q.segment<4>(o) /= n;
  }
  return q;
}

std::vector<WitnessPair> Plant::witness_pairs(const Eigen::VectorXd& q) const {
  if (q.size() != n_q_) throw DimensionError("witness_pairs: bad q size");
  std::vector<WitnessPair> out;
  out.reserve(pairs_.size());
  for (const auto& pair : pairs_) {
    const Eigen::Isometry3d Xa = body_pose(q, pair.body_a);
    const Eigen::Isometry3d Xb = body_pose(q, pair.body_b);
    WitnessPair best;
    best.gap = std::numeric_limits<double>::infinity();
    for (int ga : pair.geoms_a) {
      for (int gb : pair.geoms_b) {
        const WitnessPair w = witness(bodies_[pair.body_a].geometries.at(ga), Xa,
                                      bodies_[pair.body_b].geometries.at(gb), Xb);
        if (w.gap < best.gap) best = w;
      }
    }
    out.push_back(best);
  }
  return out;
}

Eigen::MatrixXd Plant::point_jacobian(const Eigen::VectorXd& q, int body,
                                      const Eigen::Vector3d& point_world) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, n_v_);
  const Body& b = bodies_.at(body);
  const int o = v_offset_.at(body);
  switch (b.joint) {
    case JointType::kStatic:
      break;
    case JointType::kLine:
      J(0, o) = 1.0;
      break;
    case JointType::kTranslating:
      J.block<3, 3>(0, o).setIdentity();
      break;
    case JointType::kPlanar: {
      J(0, o) = 1.0;
      J(1, o + 1) = 1.0;
      const Eigen::Vector3d r = point_world - body_pose(q, body).translation();
      J.col(o + 2) = Eigen::Vector3d::UnitZ().cross(r);
      break;
    }
    case JointType::kFree: {
      J.block<3, 3>(0, o).setIdentity();
      const Eigen::Vector3d r = point_world - body_pose(q, body).translation();
      // v_point = v + omega x r  =>  d(v_point)/d(omega) = -[r]_x
      Eigen::Matrix3d rx;
      rx << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
      J.block<3, 3>(0, o + 3) = -rx;
      break;
    }
  }
  return J;
}

std::vector<ContactJacobianSet> contact_jacobians(const Plant& plant,
                                                  const Eigen::VectorXd& q,
                                                  const std::vector<WitnessPair>& pairs) {
  if (q.size() != plant.n_q()) throw DimensionError("contact_jacobians: bad q size");
  if (pairs.size() != plant.contact_pairs().size()) {
    throw DimensionError("contact_jacobians: pair count mismatch");
  }
  std::vector<ContactJacobianSet> out;
  out.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& spec = plant.contact_pairs()[i];
    const auto& w = pairs[i];
    const Eigen::MatrixXd Ja = plant.point_jacobian(q, spec.body_a, w.point_a);
    const Eigen::MatrixXd Jb = plant.point_jacobian(q, spec.body_b, w.point_b);
    const Eigen::MatrixXd J_rel = Ja - Jb;
    const auto [d, e] = tangent_basis(w.normal);
    ContactJacobianSet set;
    set.normal = w.normal.transpose() * J_rel;
    set.tangent.resize(4, plant.n_v());
    set.tangent.row(0) = d.transpose() * J_rel;
    set.tangent.row(1) = -set.tangent.row(0);
    set.tangent.row(2) = e.transpose() * J_rel;
    set.tangent.row(3) = -set.tangent.row(2);
    out.push_back(std::move(set));
  }
  return out;
}

ContactBlocks Plant::contact_blocks(const Eigen::VectorXd& q, double dt) const {
  ContactBlocks blocks;
  const int n_l = n_lambda();
  blocks.total_rows = n_l;
  blocks.velocity_map = Eigen::MatrixXd::Zero(n_l, n_v_);
  blocks.impulse_map = Eigen::MatrixXd::Zero(n_l, n_v_);
  blocks.coupling = Eigen::MatrixXd::Zero(n_l, n_l);
  blocks.offset = Eigen::VectorXd::Zero(n_l);
  blocks.witnesses = witness_pairs(q);
  const auto jacobians = contact_jacobians(*this, q, blocks.witnesses);

  int row = 0;
  for (size_t i = 0; i < pairs_.size(); ++i) {
    const auto& spec = pairs_[i];
    const auto& jac = jacobians[i];
    const double gap = blocks.witnesses[i].gap;
    blocks.row_start.push_back(row);
    switch (spec.model) {
      case ContactModel::kPyramid: {
        for (int j = 0; j < 4; ++j) {
          const Eigen::RowVectorXd gen = jac.normal + spec.mu * jac.tangent.row(j);
          blocks.velocity_map.row(row + j) = gen;
          blocks.impulse_map.row(row + j) = gen;
          blocks.offset(row + j) = gap / dt;
        }
        row += 4;
        break;
      }
      case ContactModel::kNormalOnly: {
        blocks.velocity_map.row(row) = jac.normal;
        blocks.impulse_map.row(row) = jac.normal;
        blocks.offset(row) = gap / dt;
        row += 1;
        break;
      }
      case ContactModel::kFixedLoad: {
        // 0 <= beta_j  perp  slip + d_j . v_next >= 0           (rows 0..3)
        // 0 <= slip    perp  mu * load * dt - sum(beta) >= 0    (row 4)
        for (int j = 0; j < 4; ++j) {
          blocks.velocity_map.row(row + j) = jac.tangent.row(j);
          blocks.impulse_map.row(row + j) = jac.tangent.row(j);
          blocks.coupling(row + j, row + 4) = 1.0;
          blocks.coupling(row + 4, row + j) = -1.0;
        }
        blocks.offset(row + 4) = spec.mu * spec.normal_load * dt;
        row += 5;
        break;
      }
    }
  }
  return blocks;
}

void Plant::split_state(const Eigen::VectorXd& x, Eigen::VectorXd* q,
                        Eigen::VectorXd* v) const {
  if (x.size() != n_x()) throw DimensionError("split_state: bad state size");
  *q = x.head(n_q_);
  *v = x.tail(n_v_);
}

}  // namespace scimpc
