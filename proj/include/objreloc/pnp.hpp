#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "objreloc/geometry.hpp"

namespace objreloc {

/// One 3D-2D pair fed to the minimal solver: an ellipsoid center and the
/// center of the detection box it is hypothesized to match.
struct Correspondence3D2D {
  Eigen::Vector3d world_point = Eigen::Vector3d::Zero();
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

Eigen::Vector3d pixel_to_bearing(const Eigen::Vector2d& pixel, const Camera& cam);

/// Real roots of a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0, polished by two Newton
/// steps. Companion-matrix eigenvalues with |imag| < 1e-8 count as real.
/// Falls back to lower degree when the leading coefficients vanish.
std::vector<double> solve_quartic(double a4, double a3, double a2, double a1, double a0);

/// Grunert-style P3P. Returns 0-4 poses, each with all three points at
/// positive camera depth, in root order (deterministic).
/// Throws DegenerateSample for collinear world points (triangle area <= 1e-9)
/// or coincident pixels (<= 1e-6 px apart), NoRealSolution when the quartic
/// has no real root.
std::vector<PoseWC> solve_p3p(const std::array<Correspondence3D2D, 3>& c, const Camera& cam);

/// A sampled correspondence as seen by pose disambiguation.
struct SampledPair {
  const DualQuadric* quadric = nullptr;
  BBox bbox;
};

/// Overlap of the three sampled observations with their projected landmarks.
double sample_overlap(const PoseWC& pose, const std::array<SampledPair, 3>& sampled, const Camera& cam);

/// Index of the candidate pose with the largest summed IoU over the sampled
/// pairs. Projections that are not ellipses score 0; ties keep the lowest index.
std::size_t select_pose_index(const std::vector<PoseWC>& poses, const std::array<SampledPair, 3>& sampled,
                              const Camera& cam);

PoseWC select_pose(const std::vector<PoseWC>& poses, const std::array<SampledPair, 3>& sampled, const Camera& cam);

}  // namespace objreloc
