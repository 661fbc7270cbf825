#include "scimpc/geometry.h"

#include <algorithm>
#include <cmath>

namespace scimpc {

namespace {

constexpr double kDegenerate = 1e-12;

// Falls back to +z when the separation direction is undefined.
Eigen::Vector3d safe_direction(const Eigen::Vector3d& delta) {
  const double norm = delta.norm();
  if (norm < kDegenerate) {
    return Eigen::Vector3d::UnitZ();
  }
  return delta / norm;
}

WitnessPair sphere_sphere(double ra, const Eigen::Vector3d& ca, double rb,
                          const Eigen::Vector3d& cb) {
  WitnessPair out;
  out.normal = safe_direction(ca - cb);
  out.point_a = ca - ra * out.normal;
  out.point_b = cb + rb * out.normal;
  out.gap = (ca - cb).norm() - ra - rb;
  return out;
}

// Closest point on the segment {center + t*axis, |t| <= half_length} to p.
Eigen::Vector3d segment_closest(const Eigen::Vector3d& center,
                                const Eigen::Vector3d& axis, double half_length,
                                const Eigen::Vector3d& p) {
  const double t = std::clamp(axis.dot(p - center), -half_length, half_length);
  return center + t * axis;
}

WitnessPair sphere_halfspace(double r, const Eigen::Vector3d& c,
                             const Eigen::Vector3d& n, double offset) {
  WitnessPair out;
  out.normal = n;
  out.point_a = c - r * n;
  out.point_b = c - (n.dot(c) - offset) * n;
  out.gap = n.dot(c) - offset - r;
  return out;
}

WitnessPair flipped(WitnessPair w) {
  std::swap(w.point_a, w.point_b);
  w.normal = -w.normal;
  return w;
}

}  // namespace

Geometry Geometry::MakeSphere(double radius, const Eigen::Vector3d& center) {
  Geometry g;
  g.shape = Sphere{radius};
  g.pose_in_body.translation() = center;
  return g;
}

Geometry Geometry::MakeCapsule(double radius, double half_length,
                               const Eigen::Isometry3d& pose) {
  Geometry g;
  g.shape = Capsule{radius, half_length};
  g.pose_in_body = pose;
  return g;
}

Geometry Geometry::MakeGroundPlane(double height) {
  Geometry g;
  g.shape = HalfSpace{Eigen::Vector3d::UnitZ(), height};
  return g;
}

WitnessPair witness(const Geometry& geom_a, const Eigen::Isometry3d& X_WA,
                    const Geometry& geom_b, const Eigen::Isometry3d& X_WB) {
  const Eigen::Isometry3d Xa = X_WA * geom_a.pose_in_body;
  const Eigen::Isometry3d Xb = X_WB * geom_b.pose_in_body;

  if (const auto* sa = std::get_if<Sphere>(&geom_a.shape)) {
    const Eigen::Vector3d ca = Xa.translation();
    if (const auto* sb = std::get_if<Sphere>(&geom_b.shape)) {
      return sphere_sphere(sa->radius, ca, sb->radius, Xb.translation());
    }
    if (const auto* cb = std::get_if<Capsule>(&geom_b.shape)) {
      const Eigen::Vector3d axis = Xb.linear().col(2);
      const Eigen::Vector3d on_axis =
          segment_closest(Xb.translation(), axis, cb->half_length, ca);
      return sphere_sphere(sa->radius, ca, cb->radius, on_axis);
    }
    if (const auto* hb = std::get_if<HalfSpace>(&geom_b.shape)) {
      const Eigen::Vector3d n = Xb.linear() * hb->normal;
      const double offset = n.dot(Xb.translation()) + hb->offset;
      return sphere_halfspace(sa->radius, ca, n, offset);
    }
  }
  if (const auto* capsule_a = std::get_if<Capsule>(&geom_a.shape)) {
    if (std::holds_alternative<Sphere>(geom_b.shape)) {
      return flipped(witness(geom_b, X_WB, geom_a, X_WA));
    }
    if (const auto* hb = std::get_if<HalfSpace>(&geom_b.shape)) {
      // Single closest endpoint sphere of the capsule axis.
      const Eigen::Vector3d n = Xb.linear() * hb->normal;
      const double offset = n.dot(Xb.translation()) + hb->offset;
      const Eigen::Vector3d axis = Xa.linear().col(2);
      const Eigen::Vector3d e0 = Xa.translation() - capsule_a->half_length * axis;
      const Eigen::Vector3d e1 = Xa.translation() + capsule_a->half_length * axis;
      const Eigen::Vector3d& low = (n.dot(e1) < n.dot(e0)) ? e1 : e0;
      return sphere_halfspace(capsule_a->radius, low, n, offset);
    }
  }
  if (std::holds_alternative<HalfSpace>(geom_a.shape)) {
    if (std::holds_alternative<Sphere>(geom_b.shape) ||
        std::holds_alternative<Capsule>(geom_b.shape)) {
      return flipped(witness(geom_b, X_WB, geom_a, X_WA));
    }
  }
  throw UnsupportedGeometryPairError("witness: unsupported geometry pair");
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> tangent_basis(const Eigen::Vector3d& normal) {
  int smallest = 0;
  normal.cwiseAbs().minCoeff(&smallest);
  const Eigen::Vector3d axis = Eigen::Vector3d::Unit(smallest);
  const Eigen::Vector3d d = axis.cross(normal).normalized();
  const Eigen::Vector3d e = normal.cross(d);
  return {d, e};
}

double point_distance(const Eigen::Vector3d& point, const Geometry& geom,
                      const Eigen::Isometry3d& X_WG) {
  const Eigen::Isometry3d X = X_WG * geom.pose_in_body;
  if (const auto* s = std::get_if<Sphere>(&geom.shape)) {
    return (point - X.translation()).norm() - s->radius;
  }
  if (const auto* c = std::get_if<Capsule>(&geom.shape)) {
    const Eigen::Vector3d on_axis =
        segment_closest(X.translation(), X.linear().col(2), c->half_length, point);
    return (point - on_axis).norm() - c->radius;
  }
  const auto& h = std::get<HalfSpace>(geom.shape);
  const Eigen::Vector3d n = X.linear() * h.normal;
  return n.dot(point) - (n.dot(X.translation()) + h.offset);
}

}  // namespace scimpc
