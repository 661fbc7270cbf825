#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scimpc/geometry.h"

namespace scimpc {

class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Degrees of freedom of a body.
//   kStatic      fixed in the world (0 dof)
//   kLine        translation along world x (1 dof)
//   kTranslating translation in 3-d, no rotation (3 dof)
//   kPlanar      x, y, yaw at a fixed height (3 dof)
//   kFree        3-d position + unit quaternion, world-frame angular velocity
//                (7 position coords, 6 velocity coords)
enum class JointType { kStatic, kLine, kTranslating, kPlanar, kFree };

struct Body {
  std::string name;
  JointType joint = JointType::kStatic;
  double mass = 0.0;
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity();  // about COM, body frame
  bool gravity_on = true;
  double linear_damping = 0.0;
  double angular_damping = 0.0;
  double planar_height = 0.0;  // body origin z for kPlanar
  Eigen::Isometry3d fixed_pose = Eigen::Isometry3d::Identity();  // for kStatic
  std::vector<Geometry> geometries;
};

// Complementarity-row structure generated by one contact pair.
//   kPyramid        4 rows, friction-cone generators n + mu d_j folded together
//   kNormalOnly     1 frictionless row
//   kFixedLoad      sticking/sliding friction under a known normal load:
//                   4 tangential rows plus one slip-speed slack row (5 rows)
enum class ContactModel { kPyramid, kNormalOnly, kFixedLoad };

struct ContactPairSpec {
  int body_a = 0;
  std::vector<int> geoms_a;  // candidate geometries; the closest one is active
  int body_b = 0;
  std::vector<int> geoms_b;
  double mu = 0.0;
  ContactModel model = ContactModel::kPyramid;
  double normal_load = 0.0;  // N, for kFixedLoad

  int rows() const {
    switch (model) {
      case ContactModel::kPyramid: return 4;
      case ContactModel::kNormalOnly: return 1;
      case ContactModel::kFixedLoad: return 5;
    }
    return 0;
  }
};

// Per-contact kinematics: normal row and the 4 pyramid tangent rows
// (directions d, -d, e, -e), mapping generalized velocity to contact-frame
// relative velocity of the witness points.
struct ContactJacobianSet {
  Eigen::MatrixXd normal;   // 1 x n_v
  Eigen::MatrixXd tangent;  // 4 x n_v
};

// Raw ingredients of the per-step contact LCP at a given configuration,
// stacked over all contact pairs (see Plant::contact_blocks).
struct ContactBlocks {
  Eigen::MatrixXd velocity_map;    // rows applied to v_next
  Eigen::MatrixXd impulse_map;     // generalized impulse = impulse_map^T lambda
  Eigen::MatrixXd coupling;        // structural lambda-to-row coupling
  Eigen::VectorXd offset;          // constant per row (phi/dt, impulse bounds)
  std::vector<WitnessPair> witnesses;
  std::vector<int> row_start;      // per pair
  int total_rows = 0;
};

// A nonlinear multibody scene: bodies, contact pairs, gravity, and the
// Cartesian force actuation used by the end-effector abstraction.
class Plant {
 public:
  int add_body(Body body);
  void add_contact_pair(ContactPairSpec spec);
  // Routes an n_u-dimensional input as world-frame force on the body's
  // translational dofs (u size must equal that dof count).
  void set_actuated_body(int body);
  void set_gravity(double g) { gravity_ = g; }
  double gravity() const { return gravity_; }

  int num_bodies() const { return static_cast<int>(bodies_.size()); }
  const Body& body(int i) const { return bodies_.at(i); }
  const std::vector<ContactPairSpec>& contact_pairs() const { return pairs_; }

  int n_q() const { return n_q_; }
  int n_v() const { return n_v_; }
  int n_x() const { return n_q_ + n_v_; }
  int n_u() const { return n_u_; }
  int n_lambda() const;

  int q_offset(int body) const { return q_offset_.at(body); }
  int v_offset(int body) const { return v_offset_.at(body); }

  // State [q; v] with identity orientations and configured fixed poses.
  Eigen::VectorXd default_state() const;

  // Pose of a body frame; quaternions are normalized before use so slightly
  // off-manifold states (e.g. finite-difference probes) are valid.
  Eigen::Isometry3d body_pose(const Eigen::VectorXd& q, int body) const;

  Eigen::MatrixXd mass_matrix(const Eigen::VectorXd& q) const;

  // Gravity, damping, gyroscopic bias, and actuation, as generalized force.
  Eigen::VectorXd generalized_force(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& u) const;

  // q + dt * qdot(v) with quaternion renormalization.
  Eigen::VectorXd integrate_positions(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                      double dt) const;

  Eigen::VectorXd normalize_configuration(Eigen::VectorXd q) const;

  // Witness pair per contact pair at configuration q (closest candidate
  // geometries win).
  std::vector<WitnessPair> witness_pairs(const Eigen::VectorXd& q) const;

  ContactBlocks contact_blocks(const Eigen::VectorXd& q, double dt) const;

  void split_state(const Eigen::VectorXd& x, Eigen::VectorXd* q, Eigen::VectorXd* v) const;

 private:
  // Velocity Jacobian of a world point attached to `body`: 3 x n_v.
  Eigen::MatrixXd point_jacobian(const Eigen::VectorXd& q, int body,
                                 const Eigen::Vector3d& point_world) const;

  friend std::vector<ContactJacobianSet> contact_jacobians(
      const Plant& plant, const Eigen::VectorXd& q,
      const std::vector<WitnessPair>& pairs);

  std::vector<Body> bodies_;
  std::vector<ContactPairSpec> pairs_;
  std::vector<int> q_offset_, v_offset_;
  int n_q_ = 0, n_v_ = 0, n_u_ = 0;
  int actuated_body_ = -1;
  double gravity_ = 9.81;
};

// Contact-frame Jacobians for the given witness pairs (one per plant contact
// pair, in order). Rows satisfy: normal * v = d(gap)/dt holding the witness
// attachment points fixed on their bodies.
std::vector<ContactJacobianSet> contact_jacobians(const Plant& plant,
                                                  const Eigen::VectorXd& q,
                                                  const std::vector<WitnessPair>& pairs);

}  // namespace scimpc
