#pragma once

#include <optional>

#include <Eigen/Core>

#include "sdm/camera.hpp"
#include "sdm/pose.hpp"

namespace sdm {

// Clipped search segment in the current frame. Points are
// origin + t * direction for t in [t_min, t_max]; the whole range stays at
// least 2 px inside the image so the 5-point pattern and bilinear lookups
// around any scan position are in bounds.
struct EpipolarSegment {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();  // unit, increasing inverse depth
  double t_min = 0.0;
  double t_max = 0.0;

  double length() const { return t_max - t_min; }
  Eigen::Vector2d point_at(double t) const { return origin + t * direction; }
};

enum class SegmentStatus {
  Ok,
  OutsideFrame,  // segment-frame intersection empty
  TooShort,      // clipped length < min_epl_length
  NearEpipole,   // keypoint projects onto itself, no line to search
};

struct SegmentResult {
  SegmentStatus status = SegmentStatus::Ok;
  EpipolarSegment segment;

  bool ok() const { return status == SegmentStatus::Ok; }
};

struct EpipolarParams {
  double idepth_min = 0.05;      // exhaustive bracket, 1/m
  double idepth_max = 10.0;
  int max_steps = 100;           // cap on scan steps along the segment
  double step = 1.0;             // px per scan step
  double min_epl_length = 1.75;  // px, reject shorter clipped segments
  double min_search_length = 3.0;  // px, prior intervals are padded up to this
};

// Inverse-depth prior used to restrict the search to d ± 2 sigma.
struct DepthPrior {
  double idepth = 0.0;
  double sigma = 0.0;  // standard deviation of the inverse depth
};

// Direction of the epipolar line in the current frame at the keypoint's
// projection, oriented towards increasing inverse depth. Empty when the
// direction norm before normalisation is < 1e-6 (zero baseline / epipole).
std::optional<Eigen::Vector2d> current_epipolar_direction(
    const Eigen::Vector2d& keypoint, const Pose& rel_pose,
    const CameraIntrinsics& k);

// Direction of the epipolar line in the keyframe at the keypoint, oriented
// consistently with current_epipolar_direction: stepping the reference
// pattern one pixel along this direction corresponds to stepping the scan
// forward in the current frame.
std::optional<Eigen::Vector2d> keyframe_epipolar_direction(
    const Eigen::Vector2d& keypoint, const Pose& rel_pose,
    const CameraIntrinsics& k);

// Builds the clipped scan segment for a keypoint. With a prior the range
// covers the projections of idepth in [d-2s, d+2s] centered on the
// projection of d; otherwise it covers the exhaustive bracket. The range is
// clipped to the frame interior, padded to min_search_length when a prior
// made it shorter, and capped so it holds at most max_steps scan positions.
SegmentResult epipolar_segment(const Eigen::Vector2d& keypoint,
                               const Pose& rel_pose, const CameraIntrinsics& k,
                               const std::optional<DepthPrior>& prior,
                               const EpipolarParams& params);

enum class TriangulationStatus { Ok, BehindCamera, DivergentRays };

struct TriangulationResult {
  TriangulationStatus status = TriangulationStatus::Ok;
  double idepth = 0.0;  // 1/m in the keyframe

  bool ok() const { return status == TriangulationStatus::Ok; }
};

// Two-view closed form: depth z along the keyframe ray solves
// q_a (z r_z + t_z) = z r_a + t_a with r = R * unproject(keypoint), q the
// normalized match coordinates and axis a the dominant component of the
// epipolar direction. Returns 1/z.
TriangulationResult triangulate_inverse_depth(const Eigen::Vector2d& keypoint,
                                              const Eigen::Vector2d& matched,
                                              const Pose& rel_pose,
                                              const CameraIntrinsics& k);

}  // namespace sdm
