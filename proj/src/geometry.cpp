#include "objreloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "objreloc/error.hpp"

namespace objreloc {

namespace {

constexpr double kQuatNormTol = 1e-9;

void check_unit_quaternion(const Eigen::Quaterniond& q, const char* what) {
  if (!std::isfinite(q.norm()) || std::abs(q.norm() - 1.0) > kQuatNormTol) {
    std::ostringstream os;
    os << what << ": quaternion norm " << q.norm() << " is not 1";
    fail(ErrorCode::InvariantViolation, os.str());
  }
}

}  // namespace

Ellipsoid::Ellipsoid(const Eigen::Vector3d& c, const Eigen::Vector3d& r, const Eigen::Quaterniond& q)
    : center(c), radii(r), rotation(q) {
  validate();
}

void Ellipsoid::validate() const {
  if (!center.allFinite()) fail(ErrorCode::InvariantViolation, "ellipsoid center is not finite");
  if (!radii.allFinite() || (radii.array() <= 0.0).any())
    fail(ErrorCode::InvariantViolation, "ellipsoid radii must be strictly positive");
  check_unit_quaternion(rotation, "ellipsoid rotation");
}

Eigen::Matrix3d Camera::K() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvariantViolation, "camera focal lengths must be positive");
  if (width <= 0 || height <= 0) fail(ErrorCode::InvariantViolation, "camera image size must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) fail(ErrorCode::InvariantViolation, "principal point is not finite");
}

PoseWC::PoseWC(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) : rotation(q), translation(t) {}

PoseWC::PoseWC(const Eigen::Matrix3d& R, const Eigen::Vector3d& t)
    : rotation(Eigen::Quaterniond(R).normalized()), translation(t) {}

Eigen::Matrix4d PoseWC::matrix() const {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) = R();
  T.block<3, 1>(0, 3) = translation;
  return T;
}

PoseWC PoseWC::from_camera_to_world(const Eigen::Quaterniond& q_wc, const Eigen::Vector3d& position) {
  const Eigen::Quaterniond q_cw = q_wc.conjugate();
  return PoseWC(q_cw, -(q_cw * position));
}

void PoseWC::validate() const {
  check_unit_quaternion(rotation, "pose rotation");
  if (!translation.allFinite()) fail(ErrorCode::InvariantViolation, "pose translation is not finite");
}

void BBox::validate() const {
  if (!std::isfinite(xmin) || !std::isfinite(xmax) || !std::isfinite(ymin) || !std::isfinite(ymax))
    fail(ErrorCode::InvariantViolation, "bbox coordinates must be finite");
  if (!(xmin < xmax) || !(ymin < ymax)) fail(ErrorCode::InvariantViolation, "bbox must satisfy xmin < xmax, ymin < ymax");
}

DualQuadric ellipsoid_to_dual_quadric(const Ellipsoid& e) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) = e.rotation.toRotationMatrix();
  T.block<3, 1>(0, 3) = e.center;
  Eigen::Vector4d d;
  d << e.radii.cwiseProduct(e.radii), -1.0;
  DualQuadric q;
  q.Q = T * d.asDiagonal() * T.transpose();
  q.Q = 0.5 * (q.Q + q.Q.transpose()).eval();
  q.Q /= -q.Q(3, 3);
  return q;
}

Eigen::Matrix3d project_dual_quadric(const DualQuadric& q, const PoseWC& pose, const Camera& cam) {
  Eigen::Matrix<double, 3, 4> Rt;
  Rt.block<3, 3>(0, 0) = pose.R();
  Rt.block<3, 1>(0, 3) = pose.translation;
  const Eigen::Matrix<double, 3, 4> P = cam.K() * Rt;
  Eigen::Matrix3d C = P * q.Q * P.transpose();
  if (std::abs(C(2, 2)) < 1e-12) fail(ErrorCode::DegenerateProjection, "conic center at infinity");
  C = 0.5 * (C + C.transpose()).eval();
  C /= -C(2, 2);
  return C;
}

double normalize_angle_half_pi(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle, pi);
  if (a <= -pi / 2) a += pi;
  if (a > pi / 2) a -= pi;
  return a;
}

Ellipse dual_conic_to_ellipse(const Eigen::Matrix3d& dual_conic) {
  if (!dual_conic.allFinite() || std::abs(dual_conic(2, 2)) < 1e-300)
    fail(ErrorCode::NotAnEllipse, "conic has no finite center");
  const Eigen::Matrix3d C = dual_conic / -dual_conic(2, 2);
  const Eigen::Vector2d center = -C.block<2, 1>(0, 2);
  // Shape matrix R diag(a^2, b^2) R^T of the centered dual conic.
  const Eigen::Matrix2d M = C.block<2, 2>(0, 0) + center * center.transpose();
  const double p = M(0, 0);
  const double s = M(1, 1);
  const double q = 0.5 * (M(0, 1) + M(1, 0));
  const double mean = 0.5 * (p + s);
  const double radius = std::hypot(0.5 * (p - s), q);
  const double l_major = mean + radius;
  const double l_minor = mean - radius;
  if (!(l_minor > 0.0) || !(l_major > 0.0)) fail(ErrorCode::NotAnEllipse, "conic is not a real ellipse");
  Ellipse e;
  e.center = center;
  e.semi_axes = {std::sqrt(l_major), std::sqrt(l_minor)};
  e.angle = normalize_angle_half_pi(0.5 * std::atan2(2.0 * q, p - s));
  return e;
}

Eigen::Matrix3d ellipse_to_dual_conic(const Ellipse& e) {
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
  H.block<2, 2>(0, 0) = Eigen::Rotation2Dd(e.angle).toRotationMatrix();
  H.block<2, 1>(0, 2) = e.center;
  const Eigen::Vector3d d(e.semi_axes.x() * e.semi_axes.x(), e.semi_axes.y() * e.semi_axes.y(), -1.0);
  return H * d.asDiagonal() * H.transpose();
}

Ellipse bbox_to_ellipse(const BBox& b) {
  Ellipse e;
  e.center = b.center();
  const double hw = 0.5 * b.width();
  const double hh = 0.5 * b.height();
  if (hh > hw) {
    e.semi_axes = {hh, hw};
    e.angle = std::numbers::pi / 2;
  } else {
    e.semi_axes = {hw, hh};
    e.angle = 0.0;
  }
  return e;
}

BBox ellipse_bbox(const Ellipse& e) {
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  const double a2 = e.semi_axes.x() * e.semi_axes.x();
  const double b2 = e.semi_axes.y() * e.semi_axes.y();
  const double hw = std::sqrt(a2 * c * c + b2 * s * s);
  const double hh = std::sqrt(a2 * s * s + b2 * c * c);
  return {e.center.x() - hw, e.center.y() - hh, e.center.x() + hw, e.center.y() + hh};
}

std::vector<Eigen::Vector2d> ellipse_polygon(const Ellipse& e, int n_vertices) {
  std::vector<Eigen::Vector2d> poly;
  poly.reserve(n_vertices);
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  for (int i = 0; i < n_vertices; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n_vertices;
    const double x = e.semi_axes.x() * std::cos(t);
    const double y = e.semi_axes.y() * std::sin(t);
    poly.emplace_back(e.center.x() + c * x - s * y, e.center.y() + s * x + c * y);
  }
  return poly;
}

double polygon_area(std::span<const Eigen::Vector2d> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

std::vector<Eigen::Vector2d> clip_convex(std::span<const Eigen::Vector2d> subject,
                                         std::span<const Eigen::Vector2d> clip) {
  std::vector<Eigen::Vector2d> output(subject.begin(), subject.end());
  std::vector<Eigen::Vector2d> input;
  const std::size_t n_clip = clip.size();
  for (std::size_t i = 0; i < n_clip && !output.empty(); ++i) {
    const Eigen::Vector2d& a = clip[i];
    const Eigen::Vector2d& b = clip[(i + 1) % n_clip];
    const Eigen::Vector2d edge = b - a;
    auto side = [&](const Eigen::Vector2d& p) { return edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x()); };
    input.swap(output);
    output.clear();
    const std::size_t n_in = input.size();
    for (std::size_t j = 0; j < n_in; ++j) {
      const Eigen::Vector2d& cur = input[j];
      const Eigen::Vector2d& prev = input[(j + n_in - 1) % n_in];
      const double s_cur = side(cur);
      const double s_prev = side(prev);
      if (s_cur >= 0.0) {
        if (s_prev < 0.0) output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
        output.push_back(cur);
      } else if (s_prev >= 0.0) {
        output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
      }
    }
  }
  return output;
}

double ellipse_iou(const Ellipse& a, const Ellipse& b) {
  const double reach = a.semi_axes.maxCoeff() + b.semi_axes.maxCoeff();
  if ((a.center - b.center).norm() > reach) return 0.0;

  // Fixed argument order so that iou(a, b) and iou(b, a) run the same arithmetic.
  auto key = [](const Ellipse& e) {
    return std::make_tuple(e.center.x(), e.center.y(), e.semi_axes.x(), e.semi_axes.y(), e.angle);
  };
  const bool swap = key(b) < key(a);
  const Ellipse& first = swap ? b : a;
  const Ellipse& second = swap ? a : b;

  const auto pa = ellipse_polygon(first);
  const auto pb = ellipse_polygon(second);
  const double area_a = polygon_area(pa);
  const double area_b = polygon_area(pb);
  const auto inter = clip_convex(pa, pb);
  const double area_i = std::max(0.0, polygon_area(inter));
  const double uni = area_a + area_b - area_i;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(area_i / uni, 0.0, 1.0);
}

}  // namespace objreloc
