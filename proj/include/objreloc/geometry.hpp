#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace objreloc {

/// Ellipsoid in the world frame. `rotation` maps the ellipsoid's principal
/// frame to world coordinates.
struct Ellipsoid {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d radii = Eigen::Vector3d::Ones();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  Ellipsoid() = default;
  /// Throws InvariantViolation on non-positive radii or a non-unit quaternion.
  Ellipsoid(const Eigen::Vector3d& center, const Eigen::Vector3d& radii,
            const Eigen::Quaterniond& rotation = Eigen::Quaterniond::Identity());

  void validate() const;
};

/// 4x4 dual (tangent-plane) form of a quadric, normalized so Q(3,3) = -1.
struct DualQuadric {
  Eigen::Matrix4d Q = Eigen::Matrix4d::Identity();

  Eigen::Vector3d center() const { return Q.block<3, 1>(0, 3) / Q(3, 3); }
};

struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Eigen::Matrix3d K() const;
  void validate() const;
};

/// World-to-camera rigid transform: x_cam = R * x_world + t.
struct PoseWC {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  PoseWC() = default;
  PoseWC(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);
  PoseWC(const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

  Eigen::Matrix3d R() const { return rotation.toRotationMatrix(); }
  Eigen::Vector3d apply(const Eigen::Vector3d& x_world) const { return rotation * x_world + translation; }
  /// Camera position in world coordinates, -R^T t.
  Eigen::Vector3d camera_center() const { return -(rotation.conjugate() * translation); }
  Eigen::Matrix4d matrix() const;

  /// Builds the world-to-camera pose from a camera-to-world pose (TUM convention).
  static PoseWC from_camera_to_world(const Eigen::Quaterniond& q_wc, const Eigen::Vector3d& position);
  void validate() const;
};

struct Ellipse {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d semi_axes = Eigen::Vector2d::Ones();  // (a, b), a >= b > 0
  double angle = 0.0;                                   // major axis, in (-pi/2, pi/2]
};

struct BBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 1.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  Eigen::Vector2d center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  void validate() const;
};

DualQuadric ellipsoid_to_dual_quadric(const Ellipsoid& e);

/// C* = P Q P^T with P = K [R | t], scaled so C*(2,2) = -1.
/// Throws DegenerateProjection when |C*(2,2)| < 1e-12 before scaling.
/// No cheirality test: quadrics behind the camera still produce a conic.
Eigen::Matrix3d project_dual_quadric(const DualQuadric& q, const PoseWC& pose, const Camera& cam);

/// Throws NotAnEllipse for hyperbolic, parabolic or imaginary conics.
Ellipse dual_conic_to_ellipse(const Eigen::Matrix3d& dual_conic);

Eigen::Matrix3d ellipse_to_dual_conic(const Ellipse& e);

/// Axis-aligned ellipse inscribed in the box.
Ellipse bbox_to_ellipse(const BBox& b);

/// Tight axis-aligned bounding box of an ellipse.
BBox ellipse_bbox(const Ellipse& e);

/// Vertices on the ellipse boundary at equally spaced parameter angles (CCW).
std::vector<Eigen::Vector2d> ellipse_polygon(const Ellipse& e, int n_vertices = 64);

/// Signed area (positive for CCW).
double polygon_area(std::span<const Eigen::Vector2d> poly);

/// Sutherland-Hodgman clip of `subject` against the convex CCW polygon `clip`.
std::vector<Eigen::Vector2d> clip_convex(std::span<const Eigen::Vector2d> subject,
                                         std::span<const Eigen::Vector2d> clip);

/// Intersection over union of two ellipses through their 64-gon approximations.
/// Exactly symmetric; 0 when the centers are further apart than the sum of the
/// major semi-axes.
double ellipse_iou(const Ellipse& a, const Ellipse& b);

double normalize_angle_half_pi(double angle);

}  // namespace objreloc
