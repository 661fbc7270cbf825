#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Dense>

namespace scimpc {

// Collision primitives. A capsule's axis is the local z axis of its frame.
struct Sphere {
  double radius = 0.0;
};

struct Capsule {
  double radius = 0.0;
  double half_length = 0.0;
};

// Points satisfying normal . p >= offset are outside the half space.
struct HalfSpace {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
};

// A primitive with a fixed pose offset in its parent body frame.
struct Geometry {
  std::variant<Sphere, Capsule, HalfSpace> shape;
  Eigen::Isometry3d pose_in_body = Eigen::Isometry3d::Identity();

  static Geometry MakeSphere(double radius,
                             const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
  static Geometry MakeCapsule(double radius, double half_length,
                              const Eigen::Isometry3d& pose = Eigen::Isometry3d::Identity());
  static Geometry MakeGroundPlane(double height = 0.0);
};

// Closest points between two geometries. The normal is a unit vector from
// point_b toward point_a, and gap = normal . (point_a - point_b), negative
// when the pair penetrates.
struct WitnessPair {
  Eigen::Vector3d point_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d point_b = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double gap = 0.0;
};

class UnsupportedGeometryPairError : public std::runtime_error {
 public:
  explicit UnsupportedGeometryPairError(const std::string& what)
      : std::runtime_error(what) {}
};

// Closest witness points between two posed geometries. Supported pairs:
// sphere-sphere, sphere-capsule, sphere-halfspace, capsule-halfspace (either
// argument order). Coincident-center degeneracies resolve to a (0,0,1) normal.
WitnessPair witness(const Geometry& geom_a, const Eigen::Isometry3d& X_WA,
                    const Geometry& geom_b, const Eigen::Isometry3d& X_WB);

// Tangent directions (d, e) completing a right-handed frame with the normal.
// d is built from the coordinate axis with the smallest |normal| component so
// the pyramid orientation is reproducible.
std::pair<Eigen::Vector3d, Eigen::Vector3d> tangent_basis(const Eigen::Vector3d& normal);

// Distance from a point to the surface of a posed geometry (negative inside).
double point_distance(const Eigen::Vector3d& point, const Geometry& geom,
                      const Eigen::Isometry3d& X_WG);

}  // namespace scimpc
