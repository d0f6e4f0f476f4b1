#include "objreloc/pnp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "objreloc/error.hpp"

namespace objreloc {

namespace {

// Polynomials in v as coefficient arrays, lowest degree first.
using Poly = std::array<double, 5>;

Poly mul(const Poly& p, const Poly& q) {
  Poly r{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; i + j < 5; ++j) r[i + j] += p[i] * q[j];
  return r;
}

Poly sub(const Poly& p, const Poly& q) {
  Poly r{};
  for (int i = 0; i < 5; ++i) r[i] = p[i] - q[i];
  return r;
}

double eval(const Poly& p, double x) {
  double r = 0.0;
  for (int i = 4; i >= 0; --i) r = r * x + p[i];
  return r;
}

double eval_derivative(const Poly& p, double x) {
  double r = 0.0;
  for (int i = 4; i >= 1; --i) r = r * x + i * p[i];
  return r;
}

}  // namespace

Eigen::Vector3d pixel_to_bearing(const Eigen::Vector2d& pixel, const Camera& cam) {
  return Eigen::Vector3d((pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0).normalized();
}

std::vector<double> solve_quartic(double a4, double a3, double a2, double a1, double a0) {
  const Poly p{a0, a1, a2, a3, a4};
  const double scale = std::max({std::abs(a4), std::abs(a3), std::abs(a2), std::abs(a1), std::abs(a0)});
  if (scale == 0.0) return {};

  int degree = 4;
  while (degree > 0 && std::abs(p[degree]) <= 1e-14 * scale) --degree;
  if (degree == 0) return {};

  // Companion matrix of the monic polynomial of the effective degree.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i) companion(0, i) = -p[degree - 1 - i] / p[degree];
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();

  std::vector<double> roots;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const double re = eig[i].real();
    if (std::abs(eig[i].imag()) >= 1e-8 * std::max(1.0, std::abs(re))) continue;
    double x = re;
    for (int it = 0; it < 2; ++it) {
      const double d = eval_derivative(p, x);
      if (d == 0.0) break;
      const double step = eval(p, x) / d;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<PoseWC> solve_p3p(const std::array<Correspondence3D2D, 3>& c, const Camera& cam) {
  const Eigen::Vector3d& P1 = c[0].world_point;
  const Eigen::Vector3d& P2 = c[1].world_point;
  const Eigen::Vector3d& P3 = c[2].world_point;
  if (0.5 * (P2 - P1).cross(P3 - P1).norm() <= 1e-9)
    fail(ErrorCode::DegenerateSample, "world points are collinear");
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if ((c[i].pixel - c[j].pixel).norm() <= 1e-6) fail(ErrorCode::DegenerateSample, "pixels coincide");

  const Eigen::Vector3d f1 = pixel_to_bearing(c[0].pixel, cam);
  const Eigen::Vector3d f2 = pixel_to_bearing(c[1].pixel, cam);
  const Eigen::Vector3d f3 = pixel_to_bearing(c[2].pixel, cam);
  const double cos_alpha = f2.dot(f3);  // rays 2-3, opposite side a
  const double cos_beta = f1.dot(f3);   // rays 1-3, opposite side b
  const double cos_gamma = f1.dot(f2);  // rays 1-2, opposite side c

  // Side lengths scaled by b, depths s2 = u s1, s3 = v s1:
  //   s1^2 (u^2 + v^2 - 2uv cos_alpha) = a^2
  //   s1^2 (1 + v^2 - 2v cos_beta)     = b^2
  //   s1^2 (1 + u^2 - 2u cos_gamma)    = c^2
  const double b = (P1 - P3).norm();
  const double a2 = (P2 - P3).squaredNorm() / (b * b);
  const double c2 = (P1 - P2).squaredNorm() / (b * b);

  // Two quadratics in u whose coefficients are polynomials in v:
  //   u^2 + A1 u + A0(v) = 0,  u^2 + B1(v) u + B0(v) = 0.
  const Poly A0{1.0 - c2, 2.0 * c2 * cos_beta, -c2, 0.0, 0.0};
  const Poly A1{-2.0 * cos_gamma, 0.0, 0.0, 0.0, 0.0};
  const Poly B0{-a2, 2.0 * a2 * cos_beta, 1.0 - a2, 0.0, 0.0};
  const Poly B1{0.0, -2.0 * cos_alpha, 0.0, 0.0, 0.0};
  // Resultant in u: (B0 - A0)^2 - (B1 - A1)(A1 B0 - A0 B1).
  const Poly D1 = sub(B0, A0);
  const Poly D2 = sub(B1, A1);
  const Poly D3 = sub(mul(A1, B0), mul(A0, B1));
  const Poly res = sub(mul(D1, D1), mul(D2, D3));

  const std::vector<double> v_roots = solve_quartic(res[4], res[3], res[2], res[1], res[0]);
  if (v_roots.empty()) fail(ErrorCode::NoRealSolution, "P3P quartic has no real root");

  Eigen::Matrix3d world;
  world << P1, P2, P3;
  const double focal = std::max(cam.fx, cam.fy);

  std::vector<PoseWC> poses;
  for (const double v : v_roots) {
    if (!(v > 0.0)) continue;
    const double denom_b = 1.0 + v * v - 2.0 * v * cos_beta;
    if (!(denom_b > 0.0)) continue;

    std::vector<double> u_candidates;
    const double d2 = eval(D2, v);
    if (std::abs(d2) > 1e-10) {
      u_candidates.push_back(-eval(D1, v) / d2);
    } else {
      // Both quadratics share their roots here; take the real roots of the first.
      const double a0 = eval(A0, v);
      const double disc = cos_gamma * cos_gamma - a0;
      if (disc >= 0.0) {
        u_candidates.push_back(cos_gamma + std::sqrt(disc));
        u_candidates.push_back(cos_gamma - std::sqrt(disc));
      }
    }

    for (const double u : u_candidates) {
      if (!(u > 0.0)) continue;
      const double s1 = b / std::sqrt(denom_b);
      const double s2 = u * s1;
      const double s3 = v * s1;
      Eigen::Matrix3d cam_pts;
      cam_pts << s1 * f1, s2 * f2, s3 * f3;

      const Eigen::Matrix4d T = Eigen::umeyama(world, cam_pts, false);
      const PoseWC pose(Eigen::Matrix3d(T.block<3, 3>(0, 0)), Eigen::Vector3d(T.block<3, 1>(0, 3)));

      bool admissible = true;
      for (int i = 0; i < 3 && admissible; ++i) {
        const Eigen::Vector3d x = pose.apply(c[i].world_point);
        if (!(x.z() > 0.0)) {
          admissible = false;
          break;
        }
        const Eigen::Vector2d px(cam.fx * x.x() / x.z() + cam.cx, cam.fy * x.y() / x.z() + cam.cy);
        // Rejects spurious roots; genuine ones reproject to rounding error.
        if (!((px - c[i].pixel).norm() < 1e-3 * focal)) admissible = false;
      }
      if (!admissible) continue;

      const bool duplicate = std::any_of(poses.begin(), poses.end(), [&](const PoseWC& other) {
        return other.rotation.angularDistance(pose.rotation) < 1e-9 &&
               (other.translation - pose.translation).norm() < 1e-9 * std::max(1.0, b);
      });
      if (!duplicate) poses.push_back(pose);
    }
  }
  return poses;
}

double sample_overlap(const PoseWC& pose, const std::array<SampledPair, 3>& sampled, const Camera& cam) {
  double sum = 0.0;
  for (const SampledPair& s : sampled) {
    try {
      const Ellipse projected = dual_conic_to_ellipse(project_dual_quadric(*s.quadric, pose, cam));
      sum += ellipse_iou(bbox_to_ellipse(s.bbox), projected);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotAnEllipse && e.code() != ErrorCode::DegenerateProjection) throw;
    }
  }
  return sum;
}

std::size_t select_pose_index(const std::vector<PoseWC>& poses, const std::array<SampledPair, 3>& sampled,
                              const Camera& cam) {
  if (poses.empty()) fail(ErrorCode::InvalidArgument, "select_pose needs at least one pose");
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double score = sample_overlap(poses[i], sampled, cam);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

PoseWC select_pose(const std::vector<PoseWC>& poses, const std::array<SampledPair, 3>& sampled, const Camera& cam) {
  return poses[select_pose_index(poses, sampled, cam)];
}

}  // namespace objreloc
